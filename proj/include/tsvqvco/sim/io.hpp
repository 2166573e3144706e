#pragma once

// Waveform CSV export and a line-per-element netlist dump.
//
// Dump format, one element per line, fields separated by single spaces:
//   <kind> <name> <node>... <key>=<value>...
// Nodes are printed by name, ground as "0". Values use shortest round-trip
// formatting in SI base units. Coupled sets print one "coil" line per winding
// followed by the inductance matrix row by row.

#include <charconv>
#include <ostream>
#include <string>
#include <vector>

#include "tsvqvco/sim/engine.hpp"
#include "tsvqvco/sim/netlist.hpp"

namespace tsvqvco::sim {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Header `time_s,<node>,...` then one row per time point.
inline void write_csv(std::ostream& os, const Waveforms& w, const std::vector<std::string>& nodes) {
    std::vector<const std::vector<double>*> cols;
    os << "time_s";
    for (const auto& n : nodes) {
        cols.push_back(&w.voltage(n));
        os << ',' << n;
    }
    os << '\n';
    for (std::size_t i = 0; i < w.time.size(); ++i) {
        os << format_double(w.time[i]);
        for (const auto* c : cols) os << ',' << format_double((*c)[i]);
        os << '\n';
    }
}

inline void dump_netlist(std::ostream& os, const Netlist& n) {
    const auto& names = n.node_names();
    auto nm = [&](NodeId id) { return names[static_cast<std::size_t>(id)]; };
    auto kv = [&](const char* k, double v) { os << ' ' << k << '=' << format_double(v); };
    for (const auto& e : n.elements()) {
        os << kind(e) << ' ' << element_name(e);
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Resistor>) {
                    os << ' ' << nm(x.a) << ' ' << nm(x.b);
                    kv("r", x.r);
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    os << ' ' << nm(x.a) << ' ' << nm(x.b);
                    kv("c", x.c);
                } else if constexpr (std::is_same_v<T, Inductor>) {
                    os << ' ' << nm(x.a) << ' ' << nm(x.b);
                    kv("l", x.l);
                    kv("r", x.r);
                } else if constexpr (std::is_same_v<T, CoupledInductors>) {
                    os << " coils=" << x.pos.size();
                    for (std::size_t i = 0; i < x.pos.size(); ++i) {
                        os << "\n  coil " << i << ' ' << nm(x.pos[i]) << ' ' << nm(x.neg[i]);
                        kv("r", x.r[i]);
                    }
                    for (Eigen::Index i = 0; i < x.l.rows(); ++i) {
                        os << "\n  row " << i;
                        for (Eigen::Index j = 0; j < x.l.cols(); ++j) os << ' ' << format_double(x.l(i, j));
                    }
                } else if constexpr (std::is_same_v<T, Mosfet>) {
                    os << ' ' << nm(x.d) << ' ' << nm(x.g) << ' ' << nm(x.s)
                       << (x.p.polarity == devices::Polarity::n ? " type=n" : " type=p");
                    kv("k", x.p.k);
                    kv("vth", x.p.v_th);
                    kv("lambda", x.p.lambda);
                } else if constexpr (std::is_same_v<T, Varactor>) {
                    os << ' ' << nm(x.a) << ' ' << nm(x.b) << ' ' << nm(x.ctrl);
                    kv("cmin", x.m.c_min);
                    kv("cmax", x.m.c_max);
                    kv("vlo", x.m.v_lo);
                    kv("vhi", x.m.v_hi);
                } else if constexpr (std::is_same_v<T, Switch>) {
                    os << ' ' << nm(x.a) << ' ' << nm(x.b) << (x.closed ? " state=closed" : " state=open");
                    kv("r", x.resistance());
                } else if constexpr (std::is_same_v<T, VoltageSource>) {
                    os << ' ' << nm(x.p) << ' ' << nm(x.n);
                    kv("v", x.w.dc);
                } else if constexpr (std::is_same_v<T, CurrentSource>) {
                    os << ' ' << nm(x.from) << ' ' << nm(x.to);
                    kv("i", x.w.dc);
                } else if constexpr (std::is_same_v<T, Vccs>) {
                    os << ' ' << nm(x.op) << ' ' << nm(x.on) << ' ' << nm(x.cp) << ' ' << nm(x.cn);
                    kv("gm", x.gm);
                }
            },
            e);
        os << '\n';
    }
}

}  // namespace tsvqvco::sim

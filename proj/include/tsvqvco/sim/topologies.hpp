#pragma once

// Netlist generators for the four oscillator topologies and a linear
// behavioral quadrature model used for startup and frequency checks.

#include <array>
#include <string>

#include "tsvqvco/analysis/tank.hpp"
#include "tsvqvco/devices/mos.hpp"
#include "tsvqvco/devices/passive.hpp"
#include "tsvqvco/em/transformer.hpp"
#include "tsvqvco/errors.hpp"
#include "tsvqvco/sim/netlist.hpp"

namespace tsvqvco::sim {

enum class Topology { lc_vco, tf_vco, cr_vco, tc_qvco };

inline const char* to_string(Topology t) {
    switch (t) {
        case Topology::lc_vco: return "lc-vco";
        case Topology::tf_vco: return "tf-vco";
        case Topology::cr_vco: return "cr-vco";
        case Topology::tc_qvco: return "tc-qvco";
    }
    return "?";
}

inline Topology parse_topology(const std::string& s) {
    for (Topology t : {Topology::lc_vco, Topology::tf_vco, Topology::cr_vco, Topology::tc_qvco})
        if (s == to_string(t)) return t;
    throw NetlistError("unknown topology '" + s + "' (expected lc-vco, tf-vco, cr-vco or tc-qvco)");
}

/// Committed toroidal TSV transformer with the two secondaries averaged.
inline em::TransformerModel default_transformer() {
    em::TransformerModel m;
    m.L_p = 2.969e-9;
    m.L_s1 = m.L_s2 = 0.4855e-9;
    m.R_pdc = 0.464;
    m.R_sdc = 0.096;
    m.R_pac = 1.31;
    m.R_sac = 0.27;
    m.k_ps1 = m.k_ps2 = 0.368;
    m.k_ss = 0.043;
    m.area = 0.1436;
    return m;
}

/// Shared settings of the tank and supply.
struct CommonParams {
    double vdd = 0.7;                       // V
    double v_c = 0.4;                       // V, varactor control
    devices::VaractorModel varactor{};
    double c_parasitic = 0.65e-12;          // F, differential, lumped with the tank
    double c_node = 10e-15;                 // F, to ground at every internal node
};

struct LcVcoParams {
    CommonParams common{};
    double l_tank = 2.969e-9;               // H, differential
    double r_tank = 1.31;                   // Ω, series, differential
    double i_tail = 2e-3;                   // A
    devices::MosParams nmos{devices::Polarity::n, 27e-3, 0.1, 0.0};
    bool cross_coupled = true;              // false removes the active pair
};

struct TfVcoParams {
    CommonParams common{};
    em::TransformerModel transformer = default_transformer();
    devices::MosParams nmos{devices::Polarity::n, 12e-3, 0.1, 0.0};
};

struct CrVcoParams {
    CommonParams common{};
    double l_tank = 2.969e-9;               // H, differential
    double r_tank = 1.31;                   // Ω
    devices::MosParams nmos{devices::Polarity::n, 27e-3, 0.1, 0.0};
    devices::MosParams pmos{devices::Polarity::p, 27e-3, -0.1, 0.0};
};

struct TcQvcoParams {
    CommonParams common{};
    em::TransformerModel transformer = default_transformer();
    std::string array_code = "00";
    double array_unit_c = 1e-12;            // F
    devices::SwitchParams sw{};
    devices::MosParams nmos{devices::Polarity::n, 27e-3, 0.1, 0.0};
    devices::MosParams pmos{devices::Polarity::p, 27e-3, -0.1, 0.0};
    bool buffers = true;
    devices::BufferParams buffer{};
    double vdd_buf = 0.7;                   // V
    // Transformer B's secondaries are wound opposite to A's; that sign
    // asymmetry is what forces the 90 degree relation. Setting this makes
    // both transformers alike.
    bool same_dots = false;
    bool swap_labels = false;               // build B before A (isomorphism checks)
};

namespace detail {

inline void add_node_cap(Netlist& n, const std::string& node, double c) {
    if (c > 0.0) n.add(Capacitor{"CN_" + node, n.node(node), ground, c});
}

inline void add_tank_caps(Netlist& n, const CommonParams& p, const std::string& suffix, const std::string& a,
                          const std::string& b) {
    // Back-to-back halves with the control at the midpoint; each half is twice
    // the model value so the differential capacitance equals the model.
    devices::VaractorModel half = p.varactor;
    half.c_min *= 2.0;
    half.c_max *= 2.0;
    n.add(Varactor{"VAR" + suffix + "p", n.node(a), n.node("VC"), n.node("VC"), half});
    n.add(Varactor{"VAR" + suffix + "n", n.node(b), n.node("VC"), n.node("VC"), half});
    if (p.c_parasitic > 0.0) n.add(Capacitor{"CP" + suffix, n.node(a), n.node(b), p.c_parasitic});
}

inline void add_supplies(Netlist& n, const CommonParams& p) {
    n.add(VoltageSource{"VDD", n.node("VDD"), ground, {p.vdd}});
    n.add(VoltageSource{"VCTRL", n.node("VC"), ground, {p.v_c}});
}

inline void check_common(const CommonParams& p) {
    if (!(p.vdd > 0.0)) throw NetlistError("supply voltage must be positive");
    if (!(p.c_parasitic >= 0.0 && p.c_node >= 0.0)) throw NetlistError("parasitic capacitances must be non-negative");
    try {
        devices::validate(p.varactor);
    } catch (const Error& e) {
        throw NetlistError(std::string("varactor: ") + e.what());
    }
}

inline void check_mos(const devices::MosParams& m, devices::Polarity want, const std::string& who) {
    try {
        devices::validate(m);
    } catch (const Error& e) {
        throw NetlistError(who + ": " + e.what());
    }
    if (m.polarity != want) throw NetlistError(who + " has the wrong polarity");
}

inline CoupledInductors coupled(const std::string& name, const std::array<std::string, 3>& pos,
                                const std::array<std::string, 3>& neg, const devices::CoupledInductorSet& s,
                                Netlist& n) {
    CoupledInductors k;
    k.name = name;
    for (int i = 0; i < 3; ++i) {
        k.pos.push_back(n.node(pos[static_cast<std::size_t>(i)]));
        k.neg.push_back(n.node(neg[static_cast<std::size_t>(i)]));
        k.r.push_back(s.resistance[static_cast<std::size_t>(i)]);
    }
    k.l = s.inductance;
    return k;
}

// Self-biased inverter driven through a coupling capacitor.
inline void add_buffer(Netlist& n, const devices::BufferParams& b, const std::string& in, const std::string& out,
                       const std::string& tag) {
    const std::string g = "BG" + tag;
    n.add(Capacitor{"CB" + tag, n.node(in), n.node(g), b.c_couple});
    n.add(Resistor{"RB" + tag, n.node(g), n.node(out), b.r_feedback});
    n.add(Mosfet{"MBP" + tag, n.node(out), n.node(g), n.node("VDD_BUF"),
                 {devices::Polarity::p, b.k_n * b.pn_ratio, -b.v_th, 0.0}});
    n.add(Mosfet{"MBN" + tag, n.node(out), n.node(g), ground, {devices::Polarity::n, b.k_n, b.v_th, 0.0}});
    n.add(Capacitor{"CL" + tag, n.node(out), ground, b.c_load});
}

// One current-reuse core whose supply and ground returns pass through the
// secondaries of the other core's transformer.
inline void add_cr_core(Netlist& n, const TcQvcoParams& p, char id, const std::string& op, const std::string& on,
                        const std::string& sp, const std::string& sn) {
    const std::string s(1, id);
    n.add(Mosfet{"MP" + s, n.node(op), n.node(on), n.node(sp), p.pmos});
    n.add(Mosfet{"MN" + s, n.node(on), n.node(op), n.node(sn), p.nmos});
    add_tank_caps(n, p.common, s, op, on);
    const int bits = devices::bits_set(devices::parse_array_code(p.array_code));
    for (int bit = 0; bit < 2; ++bit) {
        const std::string t = s + std::to_string(bit);
        const std::string m1 = "SCA" + t + "a", m2 = "SCA" + t + "b";
        n.add(Capacitor{"CA" + t + "a", n.node(op), n.node(m1), p.array_unit_c});
        n.add(Switch{"SW" + t, n.node(m1), n.node(m2), bit < bits, p.sw});
        n.add(Capacitor{"CA" + t + "b", n.node(m2), n.node(on), p.array_unit_c});
        add_node_cap(n, m1, p.common.c_node);
        add_node_cap(n, m2, p.common.c_node);
    }
    for (const auto& node : {op, on, sp, sn}) add_node_cap(n, node, p.common.c_node);
}

}  // namespace detail

inline Netlist build_lc_vco(const LcVcoParams& p) {
    detail::check_common(p.common);
    detail::check_mos(p.nmos, devices::Polarity::n, "NMOS");
    if (!(p.l_tank > 0.0 && p.r_tank >= 0.0 && p.i_tail > 0.0)) throw NetlistError("LC-VCO tank or tail parameters invalid");
    Netlist n;
    detail::add_supplies(n, p.common);
    n.add(Inductor{"L1", n.node("VDD"), n.node("V_o1"), 0.5 * p.l_tank, 0.5 * p.r_tank});
    n.add(Inductor{"L2", n.node("VDD"), n.node("V_o2"), 0.5 * p.l_tank, 0.5 * p.r_tank});
    detail::add_tank_caps(n, p.common, "", "V_o1", "V_o2");
    if (p.cross_coupled) {
        n.add(Mosfet{"M1", n.node("V_o1"), n.node("V_o2"), n.node("TAIL"), p.nmos});
        n.add(Mosfet{"M2", n.node("V_o2"), n.node("V_o1"), n.node("TAIL"), p.nmos});
        n.add(CurrentSource{"ITAIL", n.node("TAIL"), ground, {p.i_tail}});
        detail::add_node_cap(n, "TAIL", p.common.c_node);
    }
    for (const char* node : {"V_o1", "V_o2"}) detail::add_node_cap(n, node, p.common.c_node);
    return n;
}

/// Center-tapped primary realized as two halves from the supply, each coupled
/// to the secondary in its own transistor's source.
inline Netlist build_tf_vco(const TfVcoParams& p) {
    detail::check_common(p.common);
    detail::check_mos(p.nmos, devices::Polarity::n, "NMOS");
    try {
        em::validate(p.transformer);
    } catch (const Error& e) {
        throw NetlistError(std::string("transformer: ") + e.what());
    }
    const auto& t = p.transformer;
    const double lh = 0.5 * t.L_p;
    // Negative mutual term: source swings in phase with its drain.
    const double m1 = -t.k_ps1 * std::sqrt(lh * t.L_s1), m2 = -t.k_ps2 * std::sqrt(lh * t.L_s2);
    Netlist n;
    detail::add_supplies(n, p.common);
    CoupledInductors k;
    k.name = "K1";
    k.pos = {n.node("VDD"), n.node("VDD"), n.node("S1"), n.node("S2")};
    k.neg = {n.node("V_o1"), n.node("V_o2"), ground, ground};
    k.l = Eigen::MatrixXd::Zero(4, 4);
    k.l(0, 0) = k.l(1, 1) = lh;
    k.l(2, 2) = t.L_s1;
    k.l(3, 3) = t.L_s2;
    k.l(0, 2) = k.l(2, 0) = m1;
    k.l(1, 3) = k.l(3, 1) = m2;
    k.l(2, 3) = k.l(3, 2) = t.k_ss * std::sqrt(t.L_s1 * t.L_s2);
    k.r = {0.5 * t.R_pac, 0.5 * t.R_pac, t.R_sac, t.R_sac};
    n.add(k);
    n.add(Mosfet{"M1", n.node("V_o1"), n.node("V_o2"), n.node("S1"), p.nmos});
    n.add(Mosfet{"M2", n.node("V_o2"), n.node("V_o1"), n.node("S2"), p.nmos});
    detail::add_tank_caps(n, p.common, "", "V_o1", "V_o2");
    for (const char* node : {"V_o1", "V_o2", "S1", "S2"}) detail::add_node_cap(n, node, p.common.c_node);
    return n;
}

inline Netlist build_cr_vco(const CrVcoParams& p) {
    detail::check_common(p.common);
    detail::check_mos(p.nmos, devices::Polarity::n, "NMOS");
    detail::check_mos(p.pmos, devices::Polarity::p, "PMOS");
    if (!(p.l_tank > 0.0 && p.r_tank >= 0.0)) throw NetlistError("CR-VCO tank parameters invalid");
    Netlist n;
    detail::add_supplies(n, p.common);
    n.add(Mosfet{"MP", n.node("V_o1"), n.node("V_o2"), n.node("VDD"), p.pmos});
    n.add(Mosfet{"MN", n.node("V_o2"), n.node("V_o1"), ground, p.nmos});
    n.add(Inductor{"L1", n.node("V_o1"), n.node("V_o2"), p.l_tank, p.r_tank});
    detail::add_tank_caps(n, p.common, "", "V_o1", "V_o2");
    for (const char* node : {"V_o1", "V_o2"}) detail::add_node_cap(n, node, p.common.c_node);
    return n;
}

/// Two current-reuse cores; each core's primary senses its own outputs and
/// its secondaries sit in the supply and ground returns of the other core.
inline Netlist build_tc_qvco(const TcQvcoParams& p) {
    detail::check_common(p.common);
    detail::check_mos(p.nmos, devices::Polarity::n, "NMOS");
    detail::check_mos(p.pmos, devices::Polarity::p, "PMOS");
    if (!(p.array_unit_c > 0.0)) throw NetlistError("array unit capacitance must be positive");
    if (p.buffers) {
        try {
            devices::validate(p.buffer);
        } catch (const Error& e) {
            throw NetlistError(std::string("buffer: ") + e.what());
        }
    }
    devices::CoupledInductorSet ta, tb;
    try {
        devices::parse_array_code(p.array_code);
        ta = devices::coupled_inductor_matrix(p.transformer, {1, 1, 1});
        tb = devices::coupled_inductor_matrix(p.transformer, p.same_dots ? std::array{1, 1, 1} : std::array{1, -1, -1});
    } catch (const Error& e) {
        throw NetlistError(e.what());
    }
    Netlist n;
    detail::add_supplies(n, p.common);
    if (p.buffers) n.add(VoltageSource{"VDD_BUF", n.node("VDD_BUF"), ground, {p.vdd_buf}});
    auto core_a = [&] {
        detail::add_cr_core(n, p, 'A', "V_o1", "V_o2", "SPA", "SNA");
        n.add(detail::coupled("KA", {"V_o1", "VDD", "SNB"}, {"V_o2", "SPB", "0"}, ta, n));
    };
    auto core_b = [&] {
        detail::add_cr_core(n, p, 'B', "V_o3", "V_o4", "SPB", "SNB");
        n.add(detail::coupled("KB", {"V_o3", "VDD", "SNA"}, {"V_o4", "SPA", "0"}, tb, n));
    };
    if (p.swap_labels) {
        core_b();
        core_a();
    } else {
        core_a();
        core_b();
    }
    if (p.buffers)
        for (int i = 1; i <= 4; ++i)
            detail::add_buffer(n, p.buffer, "V_o" + std::to_string(i), "V_buf" + std::to_string(i), std::to_string(i));
    return n;
}

/// Behavioral quadrature oscillator with exactly linear elements. Each output
/// node carries R ‖ C ‖ k²L_p to ground; transconductors reproduce the
/// small-signal coupling of the transformer-fed cores with pair g_m `gm`.
inline Netlist build_linear_qvco(const analysis::TankParams& t, double gm) {
    analysis::validate(t);
    if (!(gm >= 0.0)) throw NetlistError("transconductance must be non-negative");
    const double a = t.kn();
    const double self = 0.25 * gm * (1.0 - 2.0 / (a * a));  // per half of D = (Vp − Vn)/2
    const double cross = 0.75 * gm / a;
    Netlist n;
    const std::array<NodeId, 4> o{n.node("V_o1"), n.node("V_o2"), n.node("V_o3"), n.node("V_o4")};
    for (int i = 0; i < 4; ++i) {
        const std::string s = std::to_string(i + 1);
        const auto node = o[static_cast<std::size_t>(i)];
        n.add(Resistor{"R" + s, node, ground, t.r});
        n.add(Capacitor{"C" + s, node, ground, t.c});
        n.add(Inductor{"L" + s, node, ground, t.l_eff(), 0.0});
    }
    // Vccs current leaves `op`; injection into a node uses op = ground.
    auto inject = [&](const std::string& name, NodeId into, NodeId cp, NodeId cn, double g) {
        if (g != 0.0) n.add(Vccs{name, ground, into, cp, cn, g});
    };
    inject("G1s", o[0], o[0], o[1], self);
    inject("G1c", o[0], o[2], o[3], cross);
    inject("G2s", o[1], o[0], o[1], -self);
    inject("G2c", o[1], o[2], o[3], -cross);
    inject("G3s", o[2], o[2], o[3], self);
    inject("G3c", o[2], o[0], o[1], -cross);
    inject("G4s", o[3], o[2], o[3], -self);
    inject("G4c", o[3], o[0], o[1], cross);
    return n;
}

}  // namespace tsvqvco::sim

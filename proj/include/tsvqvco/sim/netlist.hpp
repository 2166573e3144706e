#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tsvqvco/devices/mos.hpp"
#include "tsvqvco/devices/passive.hpp"
#include "tsvqvco/errors.hpp"

namespace tsvqvco::sim {

using NodeId = int;
inline constexpr NodeId ground = 0;

/// Source value: DC level, optionally stepping to another level at `step_time`.
struct SourceWave {
    double dc = 0.0;
    double step_time = std::numeric_limits<double>::infinity();
    double step_value = 0.0;

    double at(double t) const { return t >= step_time ? step_value : dc; }
};

struct Resistor {
    std::string name;
    NodeId a, b;
    double r;
};

struct Capacitor {
    std::string name;
    NodeId a, b;
    double c;
};

/// Inductor with series resistance; its branch current (a -> b) is an unknown.
struct Inductor {
    std::string name;
    NodeId a, b;
    double l;
    double r = 0.0;
};

/// Magnetically coupled coils. Coil i runs from pos[i] to neg[i]; the
/// inductance matrix already carries the dot signs.
struct CoupledInductors {
    std::string name;
    std::vector<NodeId> pos;
    std::vector<NodeId> neg;
    Eigen::MatrixXd l;
    std::vector<double> r;
};

struct Mosfet {
    std::string name;
    NodeId d, g, s;
    devices::MosParams p;
};

/// Capacitor between a and b whose value follows the control node voltage.
struct Varactor {
    std::string name;
    NodeId a, b, ctrl;
    devices::VaractorModel m;
};

struct Switch {
    std::string name;
    NodeId a, b;
    bool closed;
    devices::SwitchParams p;

    double resistance() const { return closed ? p.r_on : p.r_off; }
};

/// Voltage source; its branch current flows from `p` through the source to `n`.
struct VoltageSource {
    std::string name;
    NodeId p, n;
    SourceWave w;
};

/// Current source pushing current from `from` through the source into `to`.
struct CurrentSource {
    std::string name;
    NodeId from, to;
    SourceWave w;
};

/// Linear transconductor: current gm·(v(cp) − v(cn)) flows from `op` through the source to `on`.
struct Vccs {
    std::string name;
    NodeId op, on, cp, cn;
    double gm;
};

using Element = std::variant<Resistor, Capacitor, Inductor, CoupledInductors, Mosfet, Varactor, Switch,
                             VoltageSource, CurrentSource, Vccs>;

inline const char* kind(const Element& e) {
    constexpr const char* names[] = {"resistor", "capacitor", "inductor", "coupled", "mos",
                                     "varactor", "switch",    "vsource",  "isource", "vccs"};
    return names[e.index()];
}

inline const std::string& element_name(const Element& e) {
    return std::visit([](const auto& x) -> const std::string& { return x.name; }, e);
}

class Netlist {
public:
    Netlist() { names_.push_back("0"); }

    /// Returns the id of `name`, creating the node if needed.
    NodeId node(const std::string& name) {
        if (name == "0" || name == "gnd") return ground;
        const auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        const NodeId id = static_cast<NodeId>(names_.size());
        names_.push_back(name);
        index_.emplace(name, id);
        return id;
    }

    /// Id of an existing node; throws NetlistError if absent.
    NodeId find(const std::string& name) const {
        if (name == "0" || name == "gnd") return ground;
        const auto it = index_.find(name);
        if (it == index_.end()) throw NetlistError("unknown node '" + name + "'");
        return it->second;
    }

    bool has_node(const std::string& name) const { return name == "0" || name == "gnd" || index_.count(name) > 0; }

    void add(Element e) {
        check(e);
        if (element_index_.count(element_name(e))) throw NetlistError("duplicate element name '" + element_name(e) + "'");
        element_index_.emplace(element_name(e), elements_.size());
        elements_.push_back(std::move(e));
    }

    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<std::string>& node_names() const { return names_; }
    int node_count() const { return static_cast<int>(names_.size()); }

    const Element* element(const std::string& name) const {
        const auto it = element_index_.find(name);
        return it == element_index_.end() ? nullptr : &elements_[it->second];
    }

    /// Names of branch-current unknowns in MNA order.
    std::vector<std::string> branch_names() const {
        std::vector<std::string> out;
        for (const auto& e : elements_) {
            if (const auto* l = std::get_if<Inductor>(&e)) out.push_back(l->name);
            if (const auto* v = std::get_if<VoltageSource>(&e)) out.push_back(v->name);
            if (const auto* c = std::get_if<CoupledInductors>(&e))
                for (std::size_t i = 0; i < c->pos.size(); ++i) out.push_back(c->name + "." + std::to_string(i));
        }
        return out;
    }

private:
    void check_node(NodeId n, const std::string& who) const {
        if (n < 0 || n >= node_count()) throw NetlistError(who + " references a node that does not exist");
    }

    void check(const Element& e) {
        const std::string who = std::string(kind(e)) + " '" + element_name(e) + "'";
        if (element_name(e).empty()) throw NetlistError(std::string(kind(e)) + " has no name");
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Resistor>) {
                    check_node(x.a, who), check_node(x.b, who);
                    if (!(x.r > 0.0)) throw NetlistError(who + " needs R > 0");
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    check_node(x.a, who), check_node(x.b, who);
                    if (!(x.c > 0.0)) throw NetlistError(who + " needs C > 0");
                } else if constexpr (std::is_same_v<T, Inductor>) {
                    check_node(x.a, who), check_node(x.b, who);
                    if (!(x.l > 0.0 && x.r >= 0.0)) throw NetlistError(who + " needs L > 0 and R >= 0");
                } else if constexpr (std::is_same_v<T, CoupledInductors>) {
                    const auto n = static_cast<Eigen::Index>(x.pos.size());
                    if (x.pos.empty() || x.neg.size() != x.pos.size() || x.r.size() != x.pos.size() ||
                        x.l.rows() != n || x.l.cols() != n)
                        throw NetlistError(who + " has inconsistent dimensions");
                    for (std::size_t i = 0; i < x.pos.size(); ++i) check_node(x.pos[i], who), check_node(x.neg[i], who);
                    for (double r : x.r)
                        if (!(r >= 0.0)) throw NetlistError(who + " needs R >= 0");
                    try {
                        devices::require_positive_definite(x.l, who + " inductance matrix");
                    } catch (const InvalidModel& err) {
                        throw NetlistError(err.what());
                    }
                } else if constexpr (std::is_same_v<T, Mosfet>) {
                    check_node(x.d, who), check_node(x.g, who), check_node(x.s, who);
                    try {
                        devices::validate(x.p);
                    } catch (const Error& err) {
                        throw NetlistError(who + ": " + err.what());
                    }
                } else if constexpr (std::is_same_v<T, Varactor>) {
                    check_node(x.a, who), check_node(x.b, who), check_node(x.ctrl, who);
                    try {
                        devices::validate(x.m);
                    } catch (const Error& err) {
                        throw NetlistError(who + ": " + err.what());
                    }
                } else if constexpr (std::is_same_v<T, Switch>) {
                    check_node(x.a, who), check_node(x.b, who);
                    if (!(x.p.r_on > 0.0 && x.p.r_off > x.p.r_on)) throw NetlistError(who + " needs 0 < R_on < R_off");
                } else if constexpr (std::is_same_v<T, VoltageSource>) {
                    check_node(x.p, who), check_node(x.n, who);
                    if (x.p == x.n) throw NetlistError(who + " is shorted");
                } else if constexpr (std::is_same_v<T, CurrentSource>) {
                    check_node(x.from, who), check_node(x.to, who);
                } else if constexpr (std::is_same_v<T, Vccs>) {
                    check_node(x.op, who), check_node(x.on, who), check_node(x.cp, who), check_node(x.cn, who);
                }
            },
            e);
    }

    std::vector<std::string> names_;
    std::map<std::string, NodeId> index_;
    std::vector<Element> elements_;
    std::map<std::string, std::size_t> element_index_;
};

}  // namespace tsvqvco::sim

#pragma once

// Transient analysis by modified nodal analysis: charge-based companion
// models, trapezoidal integration on a uniform grid, Newton per time point.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsvqvco/errors.hpp"
#include "tsvqvco/sim/netlist.hpp"

namespace tsvqvco::sim {

enum class Integration { trapezoidal, backward_euler };

inline const char* to_string(Integration m) { return m == Integration::trapezoidal ? "trapezoidal" : "backward_euler"; }

struct SimConfig {
    double step = 1e-12;              // s
    double stop = 10e-9;              // s
    double rtol = 1e-9;
    double atol = 1e-12;              // A for KCL rows, V for branch rows
    int max_newton = 50;
    double perturbation = 1e-3;       // V added to `perturb_node` at t = 0
    std::string perturb_node = "V_o1";
    Integration method = Integration::trapezoidal;
    double gmin = 1e-12;              // S from every node to ground
    double ramp_time = 1e-9;          // s, source ramp used if the first step fails
    bool operating_point = true;      // start from the DC solution; otherwise from zero
    std::map<std::string, double> initial_voltages;  // V, overrides applied before the perturbation
    std::map<std::string, double> initial_currents;  // A, inductor branch overrides
};

inline void validate(const SimConfig& c) {
    if (!(c.step > 0.0)) throw DomainError("time step must be positive");
    if (!(c.stop > c.step)) throw DomainError("stop time must exceed the time step");
    if (!(c.rtol > 0.0 && c.atol > 0.0)) throw DomainError("tolerances must be positive");
    if (c.max_newton < 1) throw DomainError("max Newton iterations must be at least 1");
    if (!(c.gmin >= 0.0)) throw DomainError("gmin must be non-negative");
    if (!(c.ramp_time > 0.0)) throw DomainError("ramp time must be positive");
}

struct Waveforms {
    std::vector<double> time;                       // s
    std::vector<std::string> node_names;            // excluding ground
    std::vector<std::vector<double>> voltages;      // V, [node][sample]
    std::vector<std::string> branch_names;
    std::vector<std::vector<double>> currents;      // A, [branch][sample]
    double max_kcl_residual = 0.0;                  // A, over accepted steps
    double max_branch_residual = 0.0;               // V, over accepted steps
    long newton_iterations = 0;
    bool source_ramped = false;

    const std::vector<double>& voltage(const std::string& node) const {
        for (std::size_t i = 0; i < node_names.size(); ++i)
            if (node_names[i] == node) return voltages[i];
        throw NetlistError("no trace for node '" + node + "'");
    }

    const std::vector<double>& current(const std::string& branch) const {
        for (std::size_t i = 0; i < branch_names.size(); ++i)
            if (branch_names[i] == branch) return currents[i];
        throw NetlistError("no trace for branch '" + branch + "'");
    }

    bool has_node(const std::string& node) const {
        return std::find(node_names.begin(), node_names.end(), node) != node_names.end();
    }
};

namespace detail {

enum class Mode { dc, transient };

// Per-element integration history.
struct ChargeState {
    double q = 0.0;  // C
    double i = 0.0;  // A
};

class Engine {
public:
    Engine(const Netlist& n, const SimConfig& c) : net_(n), cfg_(c) {
        n_nodes_ = n.node_count() - 1;
        int b = n_nodes_;
        for (const auto& e : n.elements()) {
            branch_of_.push_back(b);
            if (std::holds_alternative<Inductor>(e) || std::holds_alternative<VoltageSource>(e)) b += 1;
            if (const auto* k = std::get_if<CoupledInductors>(&e)) b += static_cast<int>(k->pos.size());
            if (std::holds_alternative<Capacitor>(e) || std::holds_alternative<Varactor>(e)) {
                charge_of_.push_back(static_cast<int>(charges_.size()));
                charges_.emplace_back();
            } else {
                charge_of_.push_back(-1);
            }
        }
        size_ = b;
        for (int i = 1; i <= n_nodes_; ++i) unknown_names_.push_back("node " + n.node_names()[static_cast<std::size_t>(i)]);
        for (const auto& s : n.branch_names()) unknown_names_.push_back("branch " + s);
        jac_.resize(size_, size_);
        res_.resize(size_);
    }

    int size() const { return size_; }
    int node_unknowns() const { return n_nodes_; }

    Waveforms run() {
        Waveforms w;
        try {
            run_from(initial_state(), 0.0, w);
        } catch (const StepFailure&) {
            if (w.time.size() > 2) throw;
            // Retry from rest with the sources ramped in.
            w = Waveforms{};
            ramp_ = true;
            w.source_ramped = true;
            Eigen::VectorXd x = Eigen::VectorXd::Zero(size_);
            apply_overrides(x);
            run_from(x, 0.0, w);
        }
        return w;
    }

    /// DC operating point with source stepping as fallback.
    Eigen::VectorXd operating_point() {
        mode_ = Mode::dc;
        scale_ = 1.0;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(size_);
        double resid = 0.0;
        int iters = 0;
        if (newton(x, 0.0, resid, iters, cfg_.max_newton)) return x;
        x.setZero();
        double alpha = 0.0, inc = 0.05;
        while (alpha < 1.0) {
            const double next = std::min(1.0, alpha + inc);
            Eigen::VectorXd trial = x;
            scale_ = next;
            if (newton(trial, 0.0, resid, iters, cfg_.max_newton)) {
                x = trial;
                alpha = next;
                inc = std::min(inc * 2.0, 0.25);
            } else {
                inc *= 0.25;
                if (inc < 1e-6) throw NumericError("DC operating point did not converge (source stepping stalled at " +
                                                   std::to_string(alpha) + ")");
            }
        }
        scale_ = 1.0;
        return x;
    }

    /// Residual and Jacobian of the DC system at x (for diagnostics and tests).
    Eigen::VectorXd dc_residual(const Eigen::VectorXd& x) {
        mode_ = Mode::dc;
        scale_ = 1.0;
        assemble(x, 0.0);
        return res_;
    }

private:
    double source_scale(double t) const {
        if (mode_ == Mode::dc) return scale_;
        return ramp_ ? std::min(1.0, t / cfg_.ramp_time) : 1.0;
    }

    int idx(NodeId n) const { return n - 1; }
    double v(const Eigen::VectorXd& x, NodeId n) const { return n == ground ? 0.0 : x[idx(n)]; }

    void add_f(NodeId n, double val) {
        if (n != ground) res_[idx(n)] += val;
    }
    void add_j(NodeId r, NodeId c, double val) {
        if (r != ground && c != ground) jac_(idx(r), idx(c)) += val;
    }
    void add_jr(int row, NodeId c, double val) {
        if (c != ground) jac_(row, idx(c)) += val;
    }
    void add_jc(NodeId r, int col, double val) {
        if (r != ground) jac_(idx(r), col) += val;
    }

    // Conductance-type two-terminal stamp: current g·(va − vb) leaves a.
    void stamp_conductance(NodeId a, NodeId b, double g, const Eigen::VectorXd& x) {
        const double i = g * (v(x, a) - v(x, b));
        add_f(a, i);
        add_f(b, -i);
        add_j(a, a, g), add_j(a, b, -g), add_j(b, a, -g), add_j(b, b, g);
    }

    // Companion current of a charge q with dq/dv given per node.
    double companion_current(const ChargeState& st, double q) const {
        if (mode_ == Mode::dc) return 0.0;
        if (method_ == Integration::trapezoidal) return (2.0 / h_) * (q - st.q) - st.i;
        return (q - st.q) / h_;
    }
    double companion_gain() const {
        if (mode_ == Mode::dc) return 0.0;
        return method_ == Integration::trapezoidal ? 2.0 / h_ : 1.0 / h_;
    }

    void assemble(const Eigen::VectorXd& x, double t) {
        jac_.setZero();
        res_.setZero();
        const double alpha = source_scale(t);
        const auto& els = net_.elements();
        for (std::size_t k = 0; k < els.size(); ++k) {
            const auto& e = els[k];
            const int br = branch_of_[k];
            if (const auto* r = std::get_if<Resistor>(&e)) {
                stamp_conductance(r->a, r->b, 1.0 / r->r, x);
            } else if (const auto* s = std::get_if<Switch>(&e)) {
                stamp_conductance(s->a, s->b, 1.0 / s->resistance(), x);
            } else if (const auto* c = std::get_if<Capacitor>(&e)) {
                const auto& st = charges_[static_cast<std::size_t>(charge_of_[k])];
                const double q = c->c * (v(x, c->a) - v(x, c->b));
                const double i = companion_current(st, q);
                const double g = companion_gain() * c->c;
                add_f(c->a, i), add_f(c->b, -i);
                add_j(c->a, c->a, g), add_j(c->a, c->b, -g), add_j(c->b, c->a, -g), add_j(c->b, c->b, g);
            } else if (const auto* va = std::get_if<Varactor>(&e)) {
                const auto& st = charges_[static_cast<std::size_t>(charge_of_[k])];
                const double vab = v(x, va->a) - v(x, va->b);
                const double cv = devices::varactor_capacitance(va->m, v(x, va->ctrl));
                const double dc = devices::varactor_slope(va->m, v(x, va->ctrl));
                const double q = cv * vab;
                const double i = companion_current(st, q);
                const double gk = companion_gain();
                add_f(va->a, i), add_f(va->b, -i);
                for (const auto& [row, sign] : {std::pair{va->a, 1.0}, std::pair{va->b, -1.0}}) {
                    add_j(row, va->a, sign * gk * cv);
                    add_j(row, va->b, -sign * gk * cv);
                    add_j(row, va->ctrl, sign * gk * dc * vab);
                }
            } else if (const auto* l = std::get_if<Inductor>(&e)) {
                const double i = x[br];
                add_f(l->a, i), add_f(l->b, -i);
                add_jc(l->a, br, 1.0), add_jc(l->b, br, -1.0);
                const double vl = v(x, l->a) - v(x, l->b);
                add_jr(br, l->a, 1.0), add_jr(br, l->b, -1.0);
                if (mode_ == Mode::dc) {
                    res_[br] = vl - l->r * i;
                    jac_(br, br) = -l->r;
                } else if (method_ == Integration::trapezoidal) {
                    const double ip = x_prev_[br];
                    const double vp = v(x_prev_, l->a) - v(x_prev_, l->b);
                    res_[br] = vl + vp - (2.0 / h_) * l->l * (i - ip) - l->r * (i + ip);
                    jac_(br, br) = -(2.0 / h_) * l->l - l->r;
                } else {
                    const double ip = x_prev_[br];
                    res_[br] = vl - (l->l / h_) * (i - ip) - l->r * i;
                    jac_(br, br) = -l->l / h_ - l->r;
                }
            } else if (const auto* m = std::get_if<CoupledInductors>(&e)) {
                const int n = static_cast<int>(m->pos.size());
                for (int a = 0; a < n; ++a) {
                    const int row = br + a;
                    const auto ua = static_cast<std::size_t>(a);
                    const double i = x[row];
                    add_f(m->pos[ua], i), add_f(m->neg[ua], -i);
                    add_jc(m->pos[ua], row, 1.0), add_jc(m->neg[ua], row, -1.0);
                    add_jr(row, m->pos[ua], 1.0), add_jr(row, m->neg[ua], -1.0);
                    const double vl = v(x, m->pos[ua]) - v(x, m->neg[ua]);
                    if (mode_ == Mode::dc) {
                        res_[row] = vl - m->r[ua] * i;
                        jac_(row, row) = -m->r[ua];
                        continue;
                    }
                    const bool trap = method_ == Integration::trapezoidal;
                    const double gain = trap ? 2.0 / h_ : 1.0 / h_;
                    double flux = 0.0;
                    for (int b = 0; b < n; ++b) {
                        flux += m->l(a, b) * (x[br + b] - x_prev_[br + b]);
                        jac_(row, br + b) -= gain * m->l(a, b);
                    }
                    const double ip = x_prev_[row];
                    if (trap) {
                        const double vp = v(x_prev_, m->pos[ua]) - v(x_prev_, m->neg[ua]);
                        res_[row] = vl + vp - gain * flux - m->r[ua] * (i + ip);
                    } else {
                        res_[row] = vl - gain * flux - m->r[ua] * i;
                    }
                    jac_(row, row) -= m->r[ua];
                }
            } else if (const auto* q = std::get_if<Mosfet>(&e)) {
                const double vg = v(x, q->g), vd = v(x, q->d), vs = v(x, q->s);
                const auto ev = devices::mos_evaluate(q->p, vg - vs, vd - vs);
                add_f(q->d, ev.id), add_f(q->s, -ev.id);
                for (const auto& [row, sign] : {std::pair{q->d, 1.0}, std::pair{q->s, -1.0}}) {
                    add_j(row, q->g, sign * ev.gm);
                    add_j(row, q->d, sign * ev.gds);
                    add_j(row, q->s, -sign * (ev.gm + ev.gds));
                }
            } else if (const auto* vs = std::get_if<VoltageSource>(&e)) {
                const double i = x[br];
                add_f(vs->p, i), add_f(vs->n, -i);
                add_jc(vs->p, br, 1.0), add_jc(vs->n, br, -1.0);
                res_[br] = v(x, vs->p) - v(x, vs->n) - alpha * vs->w.at(t);
                add_jr(br, vs->p, 1.0), add_jr(br, vs->n, -1.0);
            } else if (const auto* is = std::get_if<CurrentSource>(&e)) {
                const double i = alpha * is->w.at(t);
                add_f(is->from, i), add_f(is->to, -i);
            } else if (const auto* g = std::get_if<Vccs>(&e)) {
                const double i = g->gm * (v(x, g->cp) - v(x, g->cn));
                add_f(g->op, i), add_f(g->on, -i);
                for (const auto& [row, sign] : {std::pair{g->op, 1.0}, std::pair{g->on, -1.0}}) {
                    add_j(row, g->cp, sign * g->gm);
                    add_j(row, g->cn, -sign * g->gm);
                }
            }
        }
        if (cfg_.gmin > 0.0)
            for (int i = 0; i < n_nodes_; ++i) {
                res_[i] += cfg_.gmin * x[i];
                jac_(i, i) += cfg_.gmin;
            }
    }

    [[noreturn]] void diagnose_singular() {
        Eigen::FullPivLU<Eigen::MatrixXd> full(jac_);
        full.setThreshold(1e-14);
        int worst = 0;
        for (int r = 0; r < size_; ++r)
            if (jac_.row(r).cwiseAbs().maxCoeff() == 0.0 || jac_.col(r).cwiseAbs().maxCoeff() == 0.0) {
                worst = r;
                throw SingularMatrix(unknown_names_[static_cast<std::size_t>(worst)],
                                     "singular MNA matrix: " + unknown_names_[static_cast<std::size_t>(worst)] +
                                         " has no connection that determines it");
            }
        const Eigen::MatrixXd ker = full.kernel();
        if (ker.cols() > 0 && ker.norm() > 0.0) ker.col(0).cwiseAbs().maxCoeff(&worst);
        throw SingularMatrix(unknown_names_[static_cast<std::size_t>(worst)],
                             "singular MNA matrix: " + unknown_names_[static_cast<std::size_t>(worst)] +
                                 " is not uniquely determined (floating node or loop of voltage sources/inductors)");
    }

    bool residual_ok(double& worst) const {
        worst = 0.0;
        bool ok = true;
        for (int i = 0; i < size_; ++i) {
            const double r = std::abs(res_[i]);
            worst = std::max(worst, r);
            if (!(r <= cfg_.atol)) ok = false;
        }
        return ok;
    }

    // Newton iteration in place. Returns false on non-convergence.
    bool newton(Eigen::VectorXd& x, double t, double& worst, int& iters, int max_iter) {
        bool small_step = false;
        for (int it = 0; it <= max_iter; ++it) {
            assemble(x, t);
            const bool res_ok = residual_ok(worst);
            if (!std::isfinite(worst)) return false;
            if (res_ok && (small_step || it == 0)) {
                iters += it;
                return true;
            }
            if (it == max_iter) break;
            if (!structure_checked_) {
                structure_checked_ = true;
                Eigen::FullPivLU<Eigen::MatrixXd> full(jac_);
                full.setThreshold(1e-14);
                if (full.rank() < size_) diagnose_singular();
            }
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac_);
            const double rc = lu.rcond();
            if (!(rc > 1e-17)) diagnose_singular();
            Eigen::VectorXd dx = lu.solve(-res_);
            if (!dx.allFinite()) diagnose_singular();
            // Limit node-voltage updates to keep square-law devices in range.
            const double vmax = n_nodes_ > 0 ? dx.head(n_nodes_).cwiseAbs().maxCoeff() : 0.0;
            if (vmax > 0.5) dx *= 0.5 / vmax;
            x += dx;
            small_step = true;
            for (int i = 0; i < size_; ++i)
                if (std::abs(dx[i]) > cfg_.rtol * std::abs(x[i]) + cfg_.atol) {
                    small_step = false;
                    break;
                }
        }
        iters += max_iter;
        return false;
    }

    void apply_overrides(Eigen::VectorXd& x) const {
        for (const auto& [name, val] : cfg_.initial_voltages) {
            const NodeId n = net_.find(name);
            if (n != ground) x[idx(n)] = val;
        }
        for (const auto& [name, val] : cfg_.initial_currents) {
            const auto& els = net_.elements();
            bool found = false;
            for (std::size_t k = 0; k < els.size(); ++k)
                if (std::holds_alternative<Inductor>(els[k]) && element_name(els[k]) == name) {
                    x[branch_of_[k]] = val;
                    found = true;
                }
            if (!found) throw NetlistError("initial current for unknown inductor '" + name + "'");
        }
        if (cfg_.perturbation != 0.0 && !cfg_.perturb_node.empty() && net_.has_node(cfg_.perturb_node)) {
            const NodeId n = net_.find(cfg_.perturb_node);
            if (n != ground) x[idx(n)] += cfg_.perturbation;
        }
    }

    Eigen::VectorXd initial_state() {
        Eigen::VectorXd x = cfg_.operating_point ? operating_point() : Eigen::VectorXd::Zero(size_);
        apply_overrides(x);
        return x;
    }

    void set_charges_from(const Eigen::VectorXd& x, bool zero_current) {
        const auto& els = net_.elements();
        for (std::size_t k = 0; k < els.size(); ++k) {
            if (charge_of_[k] < 0) continue;
            auto& st = charges_[static_cast<std::size_t>(charge_of_[k])];
            st.q = charge(els[k], x);
            if (zero_current) st.i = 0.0;
        }
    }

    double charge(const Element& e, const Eigen::VectorXd& x) const {
        if (const auto* c = std::get_if<Capacitor>(&e)) return c->c * (v(x, c->a) - v(x, c->b));
        const auto& va = std::get<Varactor>(e);
        return devices::varactor_capacitance(va.m, v(x, va.ctrl)) * (v(x, va.a) - v(x, va.b));
    }

    // Two tiny backward-Euler steps without advancing time: the first settles
    // algebraic unknowns around the imposed state, the second measures the
    // capacitor currents that start the trapezoidal recursion.
    void consistent_start(Eigen::VectorXd& x, double t0) {
        mode_ = Mode::transient;
        method_ = Integration::backward_euler;
        h_ = cfg_.step * 1e-4;
        double worst = 0.0;
        int iters = 0;
        const double atol = cfg_.atol;
        // The pseudo-steps use conductances ~C/h; scale the absolute tolerance with them.
        cfg_.atol = std::max(atol, 1e-6);
        set_charges_from(x, true);
        x_prev_ = x;
        Eigen::VectorXd x1 = x;
        const bool ok1 = newton(x1, t0, worst, iters, cfg_.max_newton);
        set_charges_from(x1, true);
        x_prev_ = x1;
        Eigen::VectorXd x2 = x1;
        const bool ok2 = ok1 && newton(x2, t0, worst, iters, cfg_.max_newton);
        cfg_.atol = atol;
        if (!ok2) throw StepFailure(t0, worst, "could not establish a consistent initial state");
        const auto& els = net_.elements();
        for (std::size_t k = 0; k < els.size(); ++k) {
            if (charge_of_[k] < 0) continue;
            auto& st = charges_[static_cast<std::size_t>(charge_of_[k])];
            st.i = (charge(els[k], x2) - st.q) / h_;
        }
        x = x1;
    }

    void record(Waveforms& w, double t, const Eigen::VectorXd& x) const {
        w.time.push_back(t);
        for (int i = 0; i < n_nodes_; ++i) w.voltages[static_cast<std::size_t>(i)].push_back(x[i]);
        for (int i = n_nodes_; i < size_; ++i) w.currents[static_cast<std::size_t>(i - n_nodes_)].push_back(x[i]);
    }

    void run_from(Eigen::VectorXd x, double t0, Waveforms& w) {
        w.node_names.assign(net_.node_names().begin() + 1, net_.node_names().end());
        w.voltages.assign(static_cast<std::size_t>(n_nodes_), {});
        w.branch_names = net_.branch_names();
        w.currents.assign(w.branch_names.size(), {});
        const long steps = std::lround((cfg_.stop - t0) / cfg_.step);
        for (auto& tr : w.voltages) tr.reserve(static_cast<std::size_t>(steps + 1));
        for (auto& tr : w.currents) tr.reserve(static_cast<std::size_t>(steps + 1));

        consistent_start(x, t0);
        record(w, t0, x);
        method_ = cfg_.method;
        h_ = cfg_.step;
        Eigen::VectorXd older = x;
        for (long n = 1; n <= steps; ++n) {
            const double t = t0 + static_cast<double>(n) * cfg_.step;
            x_prev_ = x;
            // Linear predictor from the two previous points.
            Eigen::VectorXd guess = n > 1 ? Eigen::VectorXd(2.0 * x - older) : x;
            double worst = 0.0;
            int iters = 0;
            if (!newton(guess, t, worst, iters, cfg_.max_newton)) {
                guess = x;
                if (!newton(guess, t, worst, iters, cfg_.max_newton))
                    throw StepFailure(t, worst,
                                      "Newton did not converge at t = " + std::to_string(t) +
                                          " s (residual " + std::to_string(worst) + ")");
            }
            w.newton_iterations += iters;
            double kcl = 0.0, br = 0.0;
            for (int i = 0; i < n_nodes_; ++i) kcl = std::max(kcl, std::abs(res_[i]));
            for (int i = n_nodes_; i < size_; ++i) br = std::max(br, std::abs(res_[i]));
            w.max_kcl_residual = std::max(w.max_kcl_residual, kcl);
            w.max_branch_residual = std::max(w.max_branch_residual, br);
            // Update charge histories.
            const auto& els = net_.elements();
            for (std::size_t k = 0; k < els.size(); ++k) {
                if (charge_of_[k] < 0) continue;
                auto& st = charges_[static_cast<std::size_t>(charge_of_[k])];
                const double q = charge(els[k], guess);
                st.i = companion_current(st, q);
                st.q = q;
            }
            older = x;
            x = guess;
            record(w, t, x);
        }
    }

    const Netlist& net_;
    SimConfig cfg_;
    int n_nodes_ = 0;
    int size_ = 0;
    std::vector<int> branch_of_;
    std::vector<int> charge_of_;
    std::vector<ChargeState> charges_;
    std::vector<std::string> unknown_names_;
    Eigen::MatrixXd jac_;
    Eigen::VectorXd res_;
    Eigen::VectorXd x_prev_;
    Mode mode_ = Mode::dc;
    Integration method_ = Integration::trapezoidal;
    double h_ = 1.0;
    double scale_ = 1.0;
    bool ramp_ = false;
    bool structure_checked_ = false;
};

}  // namespace detail

/// Runs a transient analysis on the uniform grid 0, h, 2h, ..., stop.
inline Waveforms transient(const Netlist& n, const SimConfig& cfg) {
    validate(cfg);
    detail::Engine e(n, cfg);
    return e.run();
}

/// DC operating point: node voltages by node name, branch currents as "I(name)".
inline std::map<std::string, double> operating_point(const Netlist& n, const SimConfig& cfg = {}) {
    detail::Engine e(n, cfg);
    const Eigen::VectorXd x = e.operating_point();
    std::map<std::string, double> out;
    const auto& names = n.node_names();
    for (int i = 1; i < n.node_count(); ++i) out[names[static_cast<std::size_t>(i)]] = x[i - 1];
    const auto branches = n.branch_names();
    for (std::size_t i = 0; i < branches.size(); ++i)
        out["I(" + branches[i] + ")"] = x[static_cast<Eigen::Index>(n.node_count() - 1 + static_cast<int>(i))];
    return out;
}

}  // namespace tsvqvco::sim

#include <cmath>

#include <gtest/gtest.h>

#include "tsvqvco/sim/engine.hpp"

using namespace tsvqvco;
using namespace tsvqvco::sim;

namespace {

SimConfig quiet(double step, double stop) {
    SimConfig c;
    c.step = step;
    c.stop = stop;
    c.perturbation = 0.0;
    return c;
}

Netlist rc_circuit(double r, double c) {
    Netlist n;
    const auto in = n.node("in"), out = n.node("out");
    n.add(VoltageSource{"V1", in, ground, {1.0}});
    n.add(Resistor{"R1", in, out, r});
    n.add(Capacitor{"C1", out, ground, c});
    return n;
}

Netlist rlc_circuit() {
    Netlist n;
    const auto a = n.node("a"), b = n.node("b");
    n.add(Capacitor{"C1", a, ground, 4.6e-12});
    n.add(Inductor{"L1", a, b, 3e-9, 0.0});
    n.add(Resistor{"R1", b, ground, 2.0});
    return n;
}

double rlc_value(double step, Integration m) {
    SimConfig c = quiet(step, 0.4e-9);
    c.method = m;
    c.operating_point = false;
    c.initial_voltages["a"] = 0.1;
    const auto w = transient(rlc_circuit(), c);
    return w.voltage("a").back();
}

}  // namespace

TEST(Engine, RcChargingMatchesExponential) {
    const double r = 1e3, cap = 1e-12;
    SimConfig c = quiet(1e-12, 5e-9);
    c.operating_point = false;
    const auto w = transient(rc_circuit(r, cap), c);
    const auto& v = w.voltage("out");
    ASSERT_EQ(w.time.size(), 5001u);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.time.size(); ++i)
        worst = std::max(worst, std::abs(v[i] - (1.0 - std::exp(-w.time[i] / (r * cap)))));
    EXPECT_LT(worst, 1e-5);
}

TEST(Engine, OperatingPointOfDivider) {
    Netlist n;
    const auto a = n.node("a"), b = n.node("b");
    n.add(VoltageSource{"V1", a, ground, {0.7}});
    n.add(Resistor{"R1", a, b, 1e3});
    n.add(Resistor{"R2", b, ground, 3e3});
    const auto op = operating_point(n);
    EXPECT_NEAR(op.at("b"), 0.525, 1e-9);
    // Source current flows p -> n inside the source, so a delivering source reads negative.
    EXPECT_NEAR(op.at("I(V1)"), -0.7 / 4e3, 1e-11);  // gmin adds ~1 pA
}

TEST(Engine, LosslessTankConservesEnergy) {
    Netlist n;
    const auto a = n.node("a");
    const double cap = 4.6e-12, l = 3e-9;
    n.add(Capacitor{"C1", a, ground, cap});
    n.add(Inductor{"L1", a, ground, l, 0.0});
    SimConfig c = quiet(1e-12, 75e-9);
    c.operating_point = false;
    c.gmin = 0.0;
    c.initial_voltages["a"] = 0.1;
    const auto w = transient(n, c);
    const auto& v = w.voltage("a");
    const auto& i = w.current("L1");
    const double e0 = 0.5 * cap * 0.01;
    double drift = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        drift = std::max(drift, std::abs(0.5 * cap * v[k] * v[k] + 0.5 * l * i[k] * i[k] - e0) / e0);
    // About 100 cycles.
    EXPECT_LT(drift, 1e-6);
}

TEST(Engine, TrapezoidalIsSecondOrder) {
    const double h = 4e-12;
    const double a = rlc_value(h, Integration::trapezoidal);
    const double b = rlc_value(h / 2, Integration::trapezoidal);
    const double c = rlc_value(h / 4, Integration::trapezoidal);
    const double ratio = (a - b) / (b - c);
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Engine, BackwardEulerIsFirstOrder) {
    const double h = 4e-12;
    const double a = rlc_value(h, Integration::backward_euler);
    const double b = rlc_value(h / 2, Integration::backward_euler);
    const double c = rlc_value(h / 4, Integration::backward_euler);
    const double ratio = (a - b) / (b - c);
    EXPECT_GT(ratio, 1.7);
    EXPECT_LT(ratio, 2.3);
}

TEST(Engine, CoupledPairMatchesSeparateInductor) {
    // A coupled set with zero mutual terms behaves as independent inductors.
    Netlist a, b;
    for (Netlist* n : {&a, &b}) {
        const auto x = n->node("x");
        n->add(Capacitor{"C1", x, ground, 1e-12});
        n->add(Resistor{"R1", x, ground, 1e3});
    }
    a.add(Inductor{"L1", a.find("x"), ground, 2e-9, 0.5});
    Eigen::MatrixXd m(1, 1);
    m << 2e-9;
    b.add(CoupledInductors{"K1", {b.find("x")}, {ground}, m, {0.5}});
    SimConfig c = quiet(1e-12, 2e-9);
    c.operating_point = false;
    c.initial_voltages["x"] = 0.2;
    const auto wa = transient(a, c), wb = transient(b, c);
    for (std::size_t k = 0; k < wa.time.size(); ++k) ASSERT_NEAR(wa.voltage("x")[k], wb.voltage("x")[k], 1e-12);
}

TEST(Engine, KclResidualStaysWithinTolerance) {
    SimConfig c = quiet(1e-12, 1e-9);
    c.operating_point = false;
    const auto w = transient(rc_circuit(1e3, 1e-12), c);
    EXPECT_LE(w.max_kcl_residual, c.atol);
    EXPECT_GT(w.newton_iterations, 0);
}

TEST(Engine, DeterministicAcrossRuns) {
    SimConfig c = quiet(1e-12, 1e-9);
    c.operating_point = false;
    c.initial_voltages["a"] = 0.1;
    const auto w1 = transient(rlc_circuit(), c), w2 = transient(rlc_circuit(), c);
    EXPECT_EQ(w1.voltage("a"), w2.voltage("a"));
}

TEST(Engine, FloatingNodeIsNamed) {
    Netlist n = rc_circuit(1e3, 1e-12);
    n.add(Capacitor{"C2", n.node("island"), ground, 1e-12});
    SimConfig c = quiet(1e-12, 1e-9);
    c.gmin = 0.0;
    try {
        transient(n, c);
        FAIL() << "expected a singular matrix";
    } catch (const SingularMatrix& e) {
        EXPECT_EQ(e.unknown(), "node island");
    }
}

TEST(Engine, VoltageSourceLoopIsReported) {
    Netlist n;
    const auto a = n.node("a");
    n.add(VoltageSource{"V1", a, ground, {1.0}});
    n.add(VoltageSource{"V2", a, ground, {1.0}});
    n.add(Resistor{"R1", a, ground, 1e3});
    try {
        operating_point(n);
        FAIL() << "expected a singular matrix";
    } catch (const SingularMatrix& e) {
        EXPECT_NE(e.unknown().find("branch V"), std::string::npos);
    }
}

TEST(Engine, NewtonFailureCarriesTimeAndResidual) {
    Netlist n;
    const auto d = n.node("d"), vdd = n.node("vdd");
    n.add(VoltageSource{"VDD", vdd, ground, {0.7}});
    n.add(Resistor{"RL", vdd, d, 1e3});
    n.add(Capacitor{"CL", d, ground, 1e-13});
    n.add(Mosfet{"M1", d, vdd, ground, {devices::Polarity::n, 50e-3, 0.2, 0.0}});
    SimConfig c = quiet(1e-11, 1e-9);
    c.operating_point = false;
    c.max_newton = 1;
    try {
        transient(n, c);
        FAIL() << "expected a step failure";
    } catch (const StepFailure& e) {
        EXPECT_GT(e.time(), 0.0);
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(Engine, RejectsBadConfig) {
    SimConfig c;
    c.step = 0.0;
    EXPECT_THROW(transient(rc_circuit(1e3, 1e-12), c), DomainError);
}

TEST(Netlist, RejectsDuplicatesAndBadValues) {
    Netlist n;
    const auto a = n.node("a");
    n.add(Resistor{"R1", a, ground, 1.0});
    EXPECT_THROW(n.add(Resistor{"R1", a, ground, 1.0}), NetlistError);
    EXPECT_THROW(n.add(Resistor{"R2", a, ground, -1.0}), NetlistError);
    EXPECT_THROW(n.add(Resistor{"R3", a, 7, 1.0}), NetlistError);
    EXPECT_THROW(n.find("nope"), NetlistError);
    Eigen::MatrixXd m(2, 2);
    m << 1e-9, 2e-9, 2e-9, 1e-9;
    EXPECT_THROW(n.add(CoupledInductors{"K1", {a, a}, {ground, ground}, m, {0.0, 0.0}}), NetlistError);
}

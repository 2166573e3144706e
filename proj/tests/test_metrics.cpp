#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "tsvqvco/constants.hpp"
#include "tsvqvco/sim/io.hpp"
#include "tsvqvco/sim/metrics.hpp"

using namespace tsvqvco;
using namespace tsvqvco::sim;

namespace {

// Four sinusoids with given p-p swings and phase lags, plus a supply current trace.
Waveforms synthetic(double f, const std::array<double, 4>& pp, const std::array<double, 4>& lag_deg,
                    double stop = 20e-9, double h = 1e-12, double decay = 0.0) {
    Waveforms w;
    for (int i = 0; i < 4; ++i) w.node_names.push_back("V_o" + std::to_string(i + 1));
    w.voltages.resize(4);
    w.branch_names = {"VDD"};
    w.currents.resize(1);
    const auto n = static_cast<std::size_t>(std::lround(stop / h));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * h;
        w.time.push_back(t);
        const double env = std::exp(-decay * t);
        for (std::size_t i = 0; i < 4; ++i)
            w.voltages[i].push_back(0.35 + 0.5 * pp[i] * env *
                                               std::cos(2 * constants::pi * f * t - lag_deg[i] * constants::pi / 180));
        w.currents[0].push_back(-2e-3 + 1e-4 * std::sin(2 * constants::pi * 2 * f * t));
    }
    return w;
}

}  // namespace

TEST(Metrics, RecoversFourPhases) {
    const auto w = synthetic(2.5e9, {0.35, 0.35, 0.35, 0.35}, {0, 90, 180, 270});
    const auto m = measure_metrics(w, 0.7);
    ASSERT_TRUE(m.oscillating);
    EXPECT_NEAR(m.f_osc, 2.5e9, 2.5e9 * 1e-4);
    EXPECT_NEAR(m.phase("V_o1"), 0.0, 1e-9);
    EXPECT_NEAR(m.phase("V_o2"), 90.0, 0.1);
    EXPECT_NEAR(m.phase("V_o3"), 180.0, 0.1);
    EXPECT_NEAR(m.phase("V_o4"), 270.0, 0.1);
}

TEST(Metrics, AmplitudeImbalanceFromSwings) {
    const auto w = synthetic(2.5e9, {0.350, 0.340, 0.331, 0.345}, {0, 180, 90, 270});
    const auto m = measure_metrics(w, 0.7);
    EXPECT_NEAR(m.amplitude("V_o1"), 0.350, 1e-4);
    EXPECT_NEAR(m.delta_v_out, 0.019, 2e-4);
}

TEST(Metrics, PowerFromMeanSupplyCurrent) {
    const auto w = synthetic(2.5e9, {0.35, 0.35, 0.35, 0.35}, {0, 180, 90, 270});
    const auto m = measure_metrics(w, 0.7);
    // The ripple averages out over whole cycles.
    EXPECT_NEAR(m.power, 1.4, 1e-4);
    EXPECT_EQ(m.buffer_power, 0.0);
}

TEST(Metrics, DecayingWaveformIsNotOscillating) {
    const auto w = synthetic(2.5e9, {0.35, 0.35, 0.35, 0.35}, {0, 180, 90, 270}, 20e-9, 1e-12, 5e8);
    const auto m = measure_metrics(w, 0.7);
    EXPECT_FALSE(m.oscillating);
    EXPECT_LT(envelope_slope(w.time, w.voltage("V_o1")), 0.0);
}

TEST(Metrics, FlatTraceIsNotOscillating) {
    auto w = synthetic(2.5e9, {0, 0, 0, 0}, {0, 0, 0, 0});
    EXPECT_FALSE(measure_metrics(w, 0.7).oscillating);
}

TEST(Metrics, SteadyAndStartupOnGrowingTone) {
    // Envelope rises as 1 - exp(-t/tau) then holds.
    Waveforms w;
    w.node_names = {"V_o1"};
    w.voltages.resize(1);
    const double f = 2e9, tau = 3e-9, h = 1e-12;
    for (int k = 0; k <= 40000; ++k) {
        const double t = k * h;
        w.time.push_back(t);
        w.voltages[0].push_back(0.2 * (1 - std::exp(-t / tau)) * std::sin(2 * constants::pi * f * t));
    }
    const auto m = measure_metrics(w, 0.7);
    ASSERT_TRUE(m.oscillating);
    EXPECT_TRUE(m.steady);
    // 90% of the settled swing: t = tau·ln 10, quantized to cycle starts.
    EXPECT_NEAR(m.startup_time, tau * std::log(10.0), 1.0 / f);
}

TEST(Metrics, QuadratureVerdict) {
    SimMetrics m;
    m.oscillating = true;
    m.outputs = {"V_o1", "V_o2", "V_o3", "V_o4"};
    m.phases = {0, 179, 271.5, 90.5};
    EXPECT_TRUE(quadrature_locked(m));
    m.phases = {0, 180, 90, 270};
    EXPECT_TRUE(quadrature_locked(m));
    m.phases = {0, 180, 180, 0};
    EXPECT_FALSE(quadrature_locked(m));
    m.phases = {0, 177, 90, 270};
    EXPECT_FALSE(quadrature_locked(m));
    EXPECT_DOUBLE_EQ(phase_distance(359.0, 1.0), 2.0);
}

TEST(Io, CsvHeaderAndRoundTrip) {
    const auto w = synthetic(2.5e9, {0.35, 0.35, 0.35, 0.35}, {0, 180, 90, 270}, 1e-11);
    std::ostringstream os;
    write_csv(os, w, {"V_o1", "V_o2", "V_o3", "V_o4"});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "time_s,V_o1,V_o2,V_o3,V_o4");
    std::getline(is, line);
    std::getline(is, line);
    const auto comma = line.find(',');
    EXPECT_EQ(std::stod(line.substr(0, comma)), w.time[1]);
    EXPECT_EQ(std::stod(line.substr(comma + 1, line.find(',', comma + 1) - comma - 1)), w.voltages[0][1]);
}

TEST(Io, DumpListsEveryElement) {
    Netlist n;
    n.add(Resistor{"R1", n.node("a"), ground, 50.0});
    n.add(Capacitor{"C1", n.node("a"), n.node("b"), 1e-12});
    std::ostringstream os;
    dump_netlist(os, n);
    EXPECT_EQ(os.str(), "resistor R1 a 0 r=50\ncapacitor C1 a b c=1e-12\n");
}

#pragma once

// Waveform metrology: frequency, per-output swing and phase, startup time,
// supply power.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "tsvqvco/constants.hpp"
#include "tsvqvco/errors.hpp"
#include "tsvqvco/sim/engine.hpp"

namespace tsvqvco::sim {

struct MetricsOptions {
    std::string reference = "V_o1";
    std::vector<std::string> outputs{"V_o1", "V_o2", "V_o3", "V_o4"};  // missing ones are skipped
    std::string supply = "VDD";
    std::string buffer_supply = "VDD_BUF";
    double buffer_vdd = 0.7;         // V
    double min_swing = 1e-3;         // V p-p below which the output counts as quiet
    int window_cycles = 20;          // cycles used for frequency, phase, power
    int steady_cycles = 5;
    double steady_tolerance = 1e-3;  // relative p-p spread over `steady_cycles`
};

struct SimMetrics {
    bool oscillating = false;
    bool steady = false;
    double f_osc = 0.0;                  // Hz
    std::vector<std::string> outputs;
    std::vector<double> amplitudes;      // V p-p, same order as outputs
    std::vector<double> phases;          // deg, lag of each output behind the reference, [0, 360)
    double delta_v_out = 0.0;            // V
    double startup_time = 0.0;           // s
    double power = 0.0;                  // mW, core supply
    double buffer_power = 0.0;           // mW
    int cycles = 0;                      // complete cycles of the reference

    double amplitude(const std::string& out) const {
        for (std::size_t i = 0; i < outputs.size(); ++i)
            if (outputs[i] == out) return amplitudes[i];
        throw NetlistError("no metrics for output '" + out + "'");
    }
    double phase(const std::string& out) const {
        for (std::size_t i = 0; i < outputs.size(); ++i)
            if (outputs[i] == out) return phases[i];
        throw NetlistError("no metrics for output '" + out + "'");
    }
};

namespace detail {

/// Rising crossings of v through `level`, linearly interpolated in time.
inline std::vector<double> rising_crossings(const std::vector<double>& t, const std::vector<double>& v, double level,
                                            std::size_t from = 0) {
    std::vector<double> out;
    for (std::size_t i = std::max<std::size_t>(from, 1); i < v.size(); ++i)
        if (v[i - 1] < level && v[i] >= level) {
            const double f = (level - v[i - 1]) / (v[i] - v[i - 1]);
            out.push_back(t[i - 1] + f * (t[i] - t[i - 1]));
        }
    return out;
}

inline std::size_t index_at(const std::vector<double>& t, double x) {
    return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
}

inline double mean(const std::vector<double>& v, std::size_t i0, std::size_t i1);

/// Hann-windowed Fourier coefficient of v, less its mean, at f over samples [i0, i1).
/// The window keeps the negative-frequency image from pulling the peak.
inline std::complex<double> fourier(const std::vector<double>& t, const std::vector<double>& v, std::size_t i0,
                                    std::size_t i1, double f) {
    std::complex<double> acc{0.0, 0.0};
    if (i1 < i0 + 2) return acc;
    const double w = 2.0 * constants::pi * f;
    const double dc = mean(v, i0, i1);
    const double span = t[i1 - 1] - t[i0];
    for (std::size_t i = i0; i < i1; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * constants::pi * (t[i] - t[i0]) / span);
        acc += hann * (v[i] - dc) * std::polar(1.0, -w * t[i]);
    }
    return acc;
}

inline double mean(const std::vector<double>& v, std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += v[i];
    return i1 > i0 ? s / static_cast<double>(i1 - i0) : 0.0;
}

inline double peak_to_peak(const std::vector<double>& v, std::size_t i0, std::size_t i1) {
    if (i1 <= i0) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin() + static_cast<std::ptrdiff_t>(i0),
                                              v.begin() + static_cast<std::ptrdiff_t>(i1));
    return *hi - *lo;
}

}  // namespace detail

/// Per-cycle peak-to-peak swing of `v` between rising crossings of its late-time mean.
struct CycleEnvelope {
    std::vector<double> start;  // s
    std::vector<double> swing;  // V p-p
};

inline CycleEnvelope cycle_envelope(const std::vector<double>& t, const std::vector<double>& v) {
    CycleEnvelope e;
    if (v.size() < 4) return e;
    const double level = detail::mean(v, v.size() / 2, v.size());
    const auto x = detail::rising_crossings(t, v, level);
    for (std::size_t c = 0; c + 1 < x.size(); ++c) {
        e.start.push_back(x[c]);
        e.swing.push_back(detail::peak_to_peak(v, detail::index_at(t, x[c]), detail::index_at(t, x[c + 1])));
    }
    return e;
}

/// Natural-log slope of the per-cycle swing over the last `cycles` cycles, 1/s.
/// Positive means growth, negative decay.
inline double envelope_slope(const std::vector<double>& t, const std::vector<double>& v, int cycles = 10) {
    const auto e = cycle_envelope(t, v);
    const int n = static_cast<int>(e.swing.size());
    if (n < 3) return 0.0;
    const int m = std::min(cycles, n - 1);
    // Least-squares line through (start, log swing).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = n - m; i < n; ++i) {
        const double x = e.start[static_cast<std::size_t>(i)], y = std::log(e.swing[static_cast<std::size_t>(i)]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double k = static_cast<double>(m);
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

inline SimMetrics measure_metrics(const Waveforms& w, double vdd, const MetricsOptions& opt = {}) {
    SimMetrics m;
    const auto& t = w.time;
    const auto& ref = w.voltage(opt.reference);
    for (const auto& o : opt.outputs)
        if (w.has_node(o)) m.outputs.push_back(o);

    // Source branch current flows p -> n inside the source; delivery reads negative.
    auto supply_power = [&](std::size_t i0, std::size_t i1) {
        if (std::find(w.branch_names.begin(), w.branch_names.end(), opt.supply) != w.branch_names.end())
            m.power = -vdd * detail::mean(w.current(opt.supply), i0, i1) * 1e3;
        if (std::find(w.branch_names.begin(), w.branch_names.end(), opt.buffer_supply) != w.branch_names.end())
            m.buffer_power = -opt.buffer_vdd * detail::mean(w.current(opt.buffer_supply), i0, i1) * 1e3;
    };

    const auto env = cycle_envelope(t, ref);
    const int n = static_cast<int>(env.swing.size());
    m.cycles = n;
    const double final_swing = n > 0 ? env.swing.back() : 0.0;
    const double peak_swing = n > 0 ? *std::max_element(env.swing.begin(), env.swing.end()) : 0.0;
    m.oscillating = n >= 2 && final_swing >= opt.min_swing && final_swing >= 0.5 * peak_swing;
    if (!m.oscillating) {
        // quiescent draw over the last fifth of the run
        supply_power(t.size() - t.size() / 5, t.size());
        return m;
    }

    const int s = std::min(opt.steady_cycles, n);
    const auto tail = env.swing.end() - s;
    const auto [lo, hi] = std::minmax_element(tail, env.swing.end());
    m.steady = s == opt.steady_cycles && (*hi - *lo) <= opt.steady_tolerance * *hi;
    const double settled = detail::mean(env.swing, static_cast<std::size_t>(n - s), static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c)
        if (env.swing[static_cast<std::size_t>(c)] >= 0.9 * settled) {
            m.startup_time = env.start[static_cast<std::size_t>(c)];
            break;
        }

    // Integer-cycle window at the end of the run.
    const double level = detail::mean(ref, ref.size() / 2, ref.size());
    const auto x = detail::rising_crossings(t, ref, level);
    const int wc = std::min(opt.window_cycles, static_cast<int>(x.size()) - 1);
    const double t0 = x[x.size() - 1 - static_cast<std::size_t>(wc)], t1 = x.back();
    const std::size_t i0 = detail::index_at(t, t0), i1 = detail::index_at(t, t1);
    const double f_cross = wc / (t1 - t0);
    // Refine on the Fourier magnitude: parabola through log|X| at three nearby frequencies.
    const double df = 0.5 * f_cross / wc;
    const double a = std::log(std::abs(detail::fourier(t, ref, i0, i1, f_cross - df)));
    const double b = std::log(std::abs(detail::fourier(t, ref, i0, i1, f_cross)));
    const double c = std::log(std::abs(detail::fourier(t, ref, i0, i1, f_cross + df)));
    const double denom = a - 2.0 * b + c;
    const double shift = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
    m.f_osc = f_cross + std::clamp(shift, -1.0, 1.0) * df;

    const auto xr = detail::fourier(t, ref, i0, i1, m.f_osc);
    const std::size_t j0 = detail::index_at(t, x[x.size() - 1 - static_cast<std::size_t>(s)]);
    for (const auto& o : m.outputs) {
        const auto& v = w.voltage(o);
        m.amplitudes.push_back(detail::peak_to_peak(v, j0, i1));
        double ph = (std::arg(xr) - std::arg(detail::fourier(t, v, i0, i1, m.f_osc))) * 180.0 / constants::pi;
        ph = std::fmod(ph, 360.0);
        if (ph < 0.0) ph += 360.0;
        if (ph >= 360.0 - 1e-9) ph = 0.0;
        m.phases.push_back(ph);
    }
    const auto [amin, amax] = std::minmax_element(m.amplitudes.begin(), m.amplitudes.end());
    m.delta_v_out = *amax - *amin;

    supply_power(i0, i1);
    return m;
}

/// Angular distance between two phases in degrees, in [0, 180].
inline double phase_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

/// V_o2 opposite V_o1 and V_o3, V_o4 at 90 and 270 degrees in either order.
inline bool quadrature_locked(const SimMetrics& m, double tol_deg = 2.0) {
    if (!m.oscillating || m.outputs.size() < 4) return false;
    const double p2 = m.phase("V_o2"), p3 = m.phase("V_o3"), p4 = m.phase("V_o4");
    if (phase_distance(p2, 180.0) > tol_deg) return false;
    const bool fwd = phase_distance(p3, 90.0) <= tol_deg && phase_distance(p4, 270.0) <= tol_deg;
    const bool rev = phase_distance(p3, 270.0) <= tol_deg && phase_distance(p4, 90.0) <= tol_deg;
    return fwd || rev;
}

}  // namespace tsvqvco::sim

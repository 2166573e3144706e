#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "tsvqvco/constants.hpp"
#include "tsvqvco/devices/passive.hpp"
#include "tsvqvco/em/transformer.hpp"
#include "tsvqvco/errors.hpp"

namespace tsvqvco::analysis {

/// Parallel tank seen by one core: R ‖ C ‖ k²L_p, with transformer turns ratio N.
struct TankParams {
    double r = 500.0;     // Ω, parallel loss
    double c = 4.6e-12;   // F
    double l_p = 3e-9;    // H
    double k = 0.52;
    double n = 2.0;

    double kn() const { return k * n; }
    double l_eff() const { return k * k * l_p; }
};

inline void validate(const TankParams& t) {
    if (!(t.r > 0.0 && t.c > 0.0 && t.l_p > 0.0 && t.n > 0.0))
        throw DomainError("tank R, C, L_p and N must be positive");
    if (!(t.k > 0.0 && t.k <= 1.0)) throw DomainError("tank coupling k must lie in (0, 1]");
}

/// LC resonance 1/sqrt(L·C), in rad/s.
inline double resonant_frequency(double l_eq, double c_eq) {
    if (!(l_eq > 0.0 && c_eq > 0.0)) throw DomainError("L and C must be positive");
    return 1.0 / std::sqrt(l_eq * c_eq);
}

/// Tank impedance R ‖ 1/(jωC) ‖ jωk²L_p, in Ω.
inline std::complex<double> tank_impedance(const TankParams& t, double omega) {
    validate(t);
    if (!(omega > 0.0)) throw DomainError("angular frequency must be positive");
    const std::complex<double> y{1.0 / t.r, omega * t.c - 1.0 / (omega * t.l_eff())};
    return 1.0 / y;
}

struct Resonance {
    double omega0;  // rad/s
    double q;
};

inline double resonant_omega(const TankParams& t) {
    validate(t);
    return 1.0 / std::sqrt(t.l_eff() * t.c);
}

inline Resonance tank_resonance_and_q(const TankParams& t) {
    const double w0 = resonant_omega(t);
    return {w0, w0 * t.r * t.c};
}

/// Q written as R/(ω0·k²L_p).
inline double quality_factor_inductive(const TankParams& t) { return t.r / (resonant_omega(t) * t.l_eff()); }

inline void require_oscillation_margin(const TankParams& t) {
    validate(t);
    const double a2 = t.kn() * t.kn();
    if (!(a2 > 2.0))
        throw InfeasibleDesign("kN > sqrt(2)", "kN = " + std::to_string(t.kn()) +
                                                   " does not exceed sqrt(2); no finite g_m sustains oscillation");
}

/// Minimum pair transconductance (2/R)(kN)²/((kN)² − 2), in S.
inline double min_transconductance(const TankParams& t) {
    require_oscillation_margin(t);
    const double a2 = t.kn() * t.kn();
    return (2.0 / t.r) * a2 / (a2 - 2.0);
}

/// Closed-form oscillation frequency ω0(b + sqrt(b² + 1)), b = 3kN/(2Q((kN)² − 2)).
inline double oscillation_frequency_closed(const TankParams& t) {
    require_oscillation_margin(t);
    const auto [w0, q] = tank_resonance_and_q(t);
    const double a = t.kn();
    const double b = 3.0 * a / (2.0 * q * (a * a - 2.0));
    return w0 * (b + std::sqrt(b * b + 1.0));
}

/// Left side of 3g/(kN) + 2/(ω k²L_p) − 2ωC = 0.
inline double characteristic(const TankParams& t, double gm, double omega) {
    return 3.0 * gm / t.kn() + 2.0 / (omega * t.l_eff()) - 2.0 * omega * t.c;
}

/// Positive root of the characteristic equation by bisection, in rad/s.
inline double solve_characteristic(const TankParams& t, double gm) {
    validate(t);
    if (!(gm >= 0.0)) throw DomainError("g_m must be non-negative");
    // The left side decreases strictly in ω and is >= 0 at ω0.
    double lo = resonant_omega(t) * (1.0 - 1e-6);
    double hi = resonant_omega(t);
    while (characteristic(t, gm, hi) > 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericError("characteristic equation has no positive root");
    }
    if (!(characteristic(t, gm, lo) > 0.0)) throw NumericError("failed to bracket the characteristic root");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (characteristic(t, gm, mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

/// Startup condition as R_L >= 2/g_m.
inline bool startup_check(double r_series, double gm) {
    if (!(gm > 0.0)) return false;
    return r_series >= 2.0 / gm;
}

/// Oscillator figure of merit in dB.
inline double figure_of_merit(double f0, double offset, double power_mw, double phase_noise) {
    if (!(f0 > 0.0 && offset > 0.0 && power_mw > 0.0))
        throw DomainError("f0, offset and power must be positive");
    return -20.0 * std::log10(f0 / offset) + 10.0 * std::log10(power_mw) + phase_noise;
}

struct NoiseFomReport {
    double phase_noise;  // dBc/Hz
    double offset;       // Hz
    double carrier;      // Hz
    double power_mw;     // mW
    double fom;          // dB
};

inline NoiseFomReport noise_fom_report(double carrier, double offset, double power_mw, double phase_noise) {
    return {phase_noise, offset, carrier, power_mw, figure_of_merit(carrier, offset, power_mw, phase_noise)};
}

/// Leeson estimate 10·log10(F·kT/(2P)·(f0/(2Q·Δf))²) in dBc/Hz.
inline double phase_noise_leeson(const TankParams& t, double p_sig_mw, double offset, double f_excess_db) {
    validate(t);
    if (!(p_sig_mw > 0.0 && offset > 0.0)) throw DomainError("signal power and offset must be positive");
    if (!(f_excess_db >= 0.0)) throw DomainError("excess noise factor must be at least 0 dB");
    const auto [w0, q] = tank_resonance_and_q(t);
    const double f0 = w0 / (2.0 * constants::pi);
    const double factor = std::pow(10.0, f_excess_db / 10.0);
    const double p = p_sig_mw * 1e-3;
    const double ratio = f0 / (2.0 * q * offset);
    return 10.0 * std::log10(factor * constants::boltzmann * constants::room_temperature / (2.0 * p) * ratio * ratio);
}

/// Oscillator requirements, named after the datasheet-style targets.
struct DesignSpec {
    double supply_voltage = 0.7;      // V
    double center_frequency = 2.5e9;  // Hz
    double output_swing = 0.35;       // V peak-to-peak
    double c_var_min = 2.1e-12;       // F
    double c_var_max = 6.3e-12;       // F
    double v_c_min = 0.1;             // V
    double v_c_max = 0.7;             // V
    double c_parasitic = 0.0;         // F, added to the varactor midpoint
    double gm_margin = 1.5;           // device g_m over the minimum
    double max_gm_amplification = 10.0;  // largest accepted (kN)²/((kN)² − 2)
};

inline void validate(const DesignSpec& s) {
    if (!(s.supply_voltage > 0.0 && s.center_frequency > 0.0 && s.output_swing > 0.0))
        throw DomainError("supply, center frequency and swing must be positive");
    if (!(s.c_var_min > 0.0 && s.c_var_min < s.c_var_max)) throw DomainError("need 0 < C_var_min < C_var_max");
    if (!(s.v_c_min < s.v_c_max)) throw DomainError("need V_c_min < V_c_max");
    if (!(s.c_parasitic >= 0.0)) throw DomainError("C_parasitic must be non-negative");
    if (!(s.gm_margin >= 1.0)) throw DomainError("g_m margin must be at least 1");
    if (!(s.max_gm_amplification > 1.0)) throw DomainError("g_m amplification limit must exceed 1");
}

struct Violation {
    std::string constraint;
    std::string detail;
};

struct TankDesign {
    TankParams tank;
    double q_inductor = 0.0;  // ω0·L_p/R_pac
    double omega0 = 0.0;
    double gm_min = 0.0;      // S, 0 when undefined
    double omega_osc = 0.0;   // rad/s, 0 when undefined
    std::vector<Violation> violations;

    bool feasible() const { return violations.empty(); }

    /// Throws InfeasibleDesign naming the first violated constraint.
    void require_feasible() const {
        if (!feasible()) throw InfeasibleDesign(violations.front().constraint, violations.front().detail);
    }
};

/// Tank from a spec and a transformer model: C at the varactor midpoint plus
/// parasitics, N = sqrt(L_p/L_s), R = Q_L·ω0·k²L_p with Q_L = ω0·L_p/R_pac.
inline TankDesign design_tank(const DesignSpec& spec, const em::TransformerModel& x) {
    validate(spec);
    em::validate(x);
    if (!(x.R_pac > 0.0)) throw InvalidModel("primary AC resistance must be positive for the loss conversion");
    TankDesign d;
    TankParams& t = d.tank;
    t.c = 0.5 * (spec.c_var_min + spec.c_var_max) + spec.c_parasitic;
    t.l_p = x.L_p;
    t.k = x.k_ps();
    t.n = std::sqrt(x.L_p / x.L_s());
    d.omega0 = 1.0 / std::sqrt(t.l_eff() * t.c);
    d.q_inductor = d.omega0 * x.L_p / x.R_pac;
    t.r = d.q_inductor * d.omega0 * t.l_eff();

    const double a2 = t.kn() * t.kn();
    if (!(a2 > 2.0)) {
        d.violations.push_back({"kN > sqrt(2)", "kN = " + std::to_string(t.kn()) +
                                                    " <= sqrt(2): the minimum g_m is unbounded"});
        return d;
    }
    const double amplification = a2 / (a2 - 2.0);
    d.gm_min = min_transconductance(t);
    d.omega_osc = oscillation_frequency_closed(t);
    if (amplification > spec.max_gm_amplification)
        d.violations.push_back({"kN well above sqrt(2)",
                                "kN = " + std::to_string(t.kn()) + " sits near sqrt(2): required g_m is " +
                                    std::to_string(amplification) + "x the 2/R asymptote (limit " +
                                    std::to_string(spec.max_gm_amplification) + "x)"});
    return d;
}

struct TuningPoint {
    unsigned code;
    double f_low_vc;   // Hz at V_c = V_lo (smallest C)
    double f_high_vc;  // Hz at V_c = V_hi
    double k_vco;      // Hz/V at the control midpoint
};

struct TuningRange {
    std::vector<TuningPoint> codes;
    double f_min = 0.0;  // Hz
    double f_max = 0.0;  // Hz
};

/// Tank frequency for the varactor at v_c and the array code, using the
/// inductance of `t` and C = C_var(v_c) + C_array + c_parasitic.
inline double tuned_frequency(const TankParams& t, const devices::VaractorModel& v, const devices::TuningArray& a,
                              double c_parasitic, double v_c) {
    const double c = devices::varactor_capacitance(v, v_c) + devices::tuning_array_capacitance(a) + c_parasitic;
    return 1.0 / (2.0 * constants::pi * std::sqrt(t.l_eff() * c));
}

/// Frequency span over codes 00, 01, 11 and the varactor range.
inline TuningRange predict_tuning_range(const TankParams& t, const devices::VaractorModel& v, double array_unit_c,
                                        double c_parasitic) {
    validate(t);
    devices::validate(v);
    if (!(c_parasitic >= 0.0)) throw DomainError("C_parasitic must be non-negative");
    TuningRange r;
    r.f_min = std::numeric_limits<double>::infinity();
    r.f_max = 0.0;
    for (unsigned code : {0u, 1u, 3u}) {
        const devices::TuningArray a{array_unit_c, code};
        TuningPoint p{code, tuned_frequency(t, v, a, c_parasitic, v.v_lo), tuned_frequency(t, v, a, c_parasitic, v.v_hi),
                      0.0};
        // df/dV = -(f/2C)·dC/dV at the midpoint.
        const double vm = 0.5 * (v.v_lo + v.v_hi);
        const double c = devices::varactor_capacitance(v, vm) + devices::tuning_array_capacitance(a) + c_parasitic;
        p.k_vco = -0.5 * tuned_frequency(t, v, a, c_parasitic, vm) / c * devices::varactor_slope(v, vm);
        r.f_min = std::min(r.f_min, p.f_high_vc);
        r.f_max = std::max(r.f_max, p.f_low_vc);
        r.codes.push_back(p);
    }
    return r;
}

}  // namespace tsvqvco::analysis

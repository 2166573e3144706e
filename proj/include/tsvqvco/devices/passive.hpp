#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "tsvqvco/em/transformer.hpp"
#include "tsvqvco/errors.hpp"

namespace tsvqvco::devices {

/// Voltage-controlled capacitor. The curve is a tanh with its end slope
/// removed, rescaled so that C(V_lo) = C_min and C(V_hi) = C_max exactly and
/// the derivative vanishes at both ends (clamped outside the range).
struct VaractorModel {
    double c_min = 2.1e-12;  // F
    double c_max = 6.3e-12;  // F
    double v_lo = 0.1;       // V
    double v_hi = 0.7;       // V
    double shape = 2.0;      // steepness of the tanh, > 0
};

inline void validate(const VaractorModel& m) {
    if (!(m.c_min > 0.0 && m.c_min < m.c_max)) throw InvalidModel("varactor needs 0 < C_min < C_max");
    if (!(m.v_lo < m.v_hi)) throw InvalidModel("varactor needs V_lo < V_hi");
    if (!(m.shape > 0.0)) throw InvalidModel("varactor shape must be positive");
}

namespace detail {

struct VaractorCurve {
    double value;  // normalized, in [-1, 1]
    double slope;  // d(value)/du
};

inline VaractorCurve varactor_curve(double a, double u) {
    const double sech_a = 1.0 / std::cosh(a);
    const double beta = a * sech_a * sech_a;
    const double norm = std::tanh(a) - beta;
    const double sech_u = 1.0 / std::cosh(a * u);
    return {(std::tanh(a * u) - beta * u) / norm, (a * sech_u * sech_u - beta) / norm};
}

}  // namespace detail

/// Capacitance at control voltage v, in F.
inline double varactor_capacitance(const VaractorModel& m, double v) {
    if (v <= m.v_lo) return m.c_min;
    if (v >= m.v_hi) return m.c_max;
    const double mid = 0.5 * (m.v_lo + m.v_hi);
    const double half = 0.5 * (m.v_hi - m.v_lo);
    const double g = detail::varactor_curve(m.shape, (v - mid) / half).value;
    return 0.5 * (m.c_min + m.c_max) + 0.5 * (m.c_max - m.c_min) * g;
}

/// dC/dV in F/V; zero outside the control range.
inline double varactor_slope(const VaractorModel& m, double v) {
    if (v <= m.v_lo || v >= m.v_hi) return 0.0;
    const double mid = 0.5 * (m.v_lo + m.v_hi);
    const double half = 0.5 * (m.v_hi - m.v_lo);
    const double s = detail::varactor_curve(m.shape, (v - mid) / half).slope;
    return 0.5 * (m.c_max - m.c_min) * s / half;
}

/// 2-bit binary-weighted switched-capacitor array. Each bit adds C/2.
struct TuningArray {
    double unit_c = 1.0e-12;  // F, value with both bits set
    unsigned code = 0;        // 0b00 .. 0b11
};

inline void validate(const TuningArray& a) {
    if (!(a.unit_c > 0.0)) throw InvalidModel("tuning array capacitance must be positive");
    if (a.code > 3u) throw DomainError("tuning array code must be 2 bits");
}

inline int bits_set(unsigned code) { return static_cast<int>(code & 1u) + static_cast<int>((code >> 1) & 1u); }

inline double tuning_array_capacitance(const TuningArray& a) {
    validate(a);
    return 0.5 * a.unit_c * bits_set(a.code);
}

/// Parses "00", "01", "10", "11".
inline unsigned parse_array_code(const std::string& s) {
    if (s.size() != 2 || (s[0] != '0' && s[0] != '1') || (s[1] != '0' && s[1] != '1'))
        throw DomainError("array code must be one of 00, 01, 10, 11, got '" + s + "'");
    return static_cast<unsigned>((s[0] - '0') * 2 + (s[1] - '0'));
}

inline std::string format_array_code(unsigned code) {
    return std::string{static_cast<char>('0' + ((code >> 1) & 1u)), static_cast<char>('0' + (code & 1u))};
}

struct SwitchParams {
    double r_on = 50.0;    // Ω
    double r_off = 10e6;   // Ω
};

/// Three magnetically coupled coils: primary, secondary 1, secondary 2.
/// `dots[i]` is the winding orientation of coil i; the signed mutual is
/// dots[i]·dots[j]·k_ij·sqrt(L_i·L_j).
struct CoupledInductorSet {
    Eigen::Matrix3d inductance = Eigen::Matrix3d::Zero();  // H
    std::array<double, 3> resistance{};                    // Ω
    std::array<int, 3> dots{1, 1, 1};

    Eigen::Matrix3d sign_matrix() const {
        Eigen::Matrix3d s;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s(i, j) = dots[static_cast<std::size_t>(i)] * dots[static_cast<std::size_t>(j)];
        return s;
    }
};

/// Throws InvalidModel unless `l` is symmetric positive definite.
inline void require_positive_definite(const Eigen::MatrixXd& l, const std::string& what) {
    if (!l.isApprox(l.transpose(), 1e-12)) throw InvalidModel(what + " is not symmetric");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError(what + ": eigenvalue computation failed");
    if (!(es.eigenvalues().minCoeff() > 0.0))
        throw InvalidModel(what + " is not positive definite (smallest eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff()) + ")");
}

inline CoupledInductorSet coupled_inductor_matrix(const em::TransformerModel& x, std::array<int, 3> dots = {1, 1, 1}) {
    em::validate(x);
    for (int d : dots)
        if (d != 1 && d != -1) throw InvalidModel("dot orientation must be +1 or -1");
    CoupledInductorSet s;
    s.dots = dots;
    const double l[3] = {x.L_p, x.L_s1, x.L_s2};
    const double k[3][3] = {{1.0, x.k_ps1, x.k_ps2}, {x.k_ps1, 1.0, x.k_ss}, {x.k_ps2, x.k_ss, 1.0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            s.inductance(i, j) = dots[static_cast<std::size_t>(i)] * dots[static_cast<std::size_t>(j)] * k[i][j] *
                                 std::sqrt(l[i] * l[j]);
    s.resistance = {x.R_pac, x.R_sac, x.R_sac};
    require_positive_definite(s.inductance, "coupled inductance matrix");
    return s;
}

/// AC-coupled self-biased inverter buffer.
struct BufferParams {
    double c_couple = 1e-12;     // F
    double r_feedback = 100e3;   // Ω
    double k_n = 2e-3;           // A/V², NMOS
    double pn_ratio = 2.0;       // PMOS/NMOS strength
    double v_th = 0.25;          // V, magnitude for both devices
    double c_load = 50e-15;      // F
};

inline void validate(const BufferParams& b) {
    if (!(b.c_couple > 0.0 && b.r_feedback > 0.0 && b.k_n > 0.0 && b.c_load > 0.0))
        throw InvalidModel("buffer parameters must be positive");
    if (!(b.pn_ratio > 1.0)) throw InvalidModel("buffer PMOS/NMOS ratio must exceed 1");
    if (!(b.v_th > 0.0)) throw InvalidModel("buffer threshold magnitude must be positive");
}

}  // namespace tsvqvco::devices

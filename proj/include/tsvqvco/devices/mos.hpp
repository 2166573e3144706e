#pragma once

#include <cmath>

#include "tsvqvco/errors.hpp"

namespace tsvqvco::devices {

enum class Polarity { n, p };

/// Square-law MOS parameters. `v_th` is signed: positive for n, negative for p.
struct MosParams {
    Polarity polarity = Polarity::n;
    double k = 4e-3;       // A/V²
    double v_th = 0.3;     // V
    double lambda = 0.0;   // 1/V
};

inline void validate(const MosParams& p) {
    if (!(p.k > 0.0)) throw DomainError("MOS transconductance factor must be positive");
    if (!(p.lambda >= 0.0)) throw DomainError("MOS lambda must be non-negative");
    if (p.polarity == Polarity::n ? !(p.v_th > 0.0) : !(p.v_th < 0.0))
        throw DomainError("MOS threshold sign does not match polarity");
}

enum class MosRegion { cutoff, triode, saturation };

struct MosEval {
    double id;   // current into the drain, A
    double gm;   // ∂id/∂vgs
    double gds;  // ∂id/∂vds
    MosRegion region;
};

namespace detail {

// n-type evaluation for vds >= 0 with a positive threshold.
inline MosEval forward(double k, double vth, double lambda, double vgs, double vds) {
    const double vov = vgs - vth;
    if (vov <= 0.0) return {0.0, 0.0, 0.0, MosRegion::cutoff};
    const double clm = 1.0 + lambda * vds;
    if (vds < vov) {
        const double core = vov * vds - 0.5 * vds * vds;
        return {k * core * clm, k * vds * clm, k * ((vov - vds) * clm + core * lambda), MosRegion::triode};
    }
    const double core = 0.5 * vov * vov;
    return {k * core * clm, k * vov * clm, k * core * lambda, MosRegion::saturation};
}

// n-type with source/drain interchange for vds < 0.
inline MosEval n_type(double k, double vth, double lambda, double vgs, double vds) {
    if (vds >= 0.0) return forward(k, vth, lambda, vgs, vds);
    // Terminals swap roles: vgs' = vgd, vds' = -vds; id = -id'.
    const MosEval r = forward(k, vth, lambda, vgs - vds, -vds);
    // id(vgs, vds) = -f(vgs - vds, -vds)
    return {-r.id, -r.gm, r.gm + r.gds, r.region};
}

}  // namespace detail

/// Drain current and its derivatives. Triode current carries the same
/// (1 + λ·vds) factor as saturation so the model is continuous at the boundary.
inline MosEval mos_evaluate(const MosParams& p, double vgs, double vds) {
    if (p.polarity == Polarity::n) return detail::n_type(p.k, p.v_th, p.lambda, vgs, vds);
    // p-type: id(vgs, vds) = -f_n(-vgs, -vds) with |v_th|
    const MosEval r = detail::n_type(p.k, -p.v_th, p.lambda, -vgs, -vds);
    return {-r.id, r.gm, r.gds, r.region};
}

/// Current into the drain, in A.
inline double mos_current(const MosParams& p, double vgs, double vds) { return mos_evaluate(p, vgs, vds).id; }

struct SmallSignal {
    double gm;
    double gds;
    bool cutoff;  // flagged: no transconductance at this bias
};

/// Analytic small-signal conductances at a bias point.
inline SmallSignal mos_small_signal(const MosParams& p, double vgs, double vds) {
    const MosEval e = mos_evaluate(p, vgs, vds);
    if (e.region == MosRegion::cutoff) return {0.0, 0.0, true};
    return {e.gm, e.gds, false};
}

}  // namespace tsvqvco::devices

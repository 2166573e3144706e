#pragma once

// Closed-form partial inductances of straight conductors (Rosa round wire,
// Grover rectangular bar, Grover parallel filaments) and the skin-effect
// resistance model. Geometry in µm, results in SI units.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsvqvco/constants.hpp"
#include "tsvqvco/em/segment.hpp"

namespace tsvqvco::em {

namespace detail {

// µ0/(4π) in H/m.
inline constexpr double mu0_over_4pi = 1.0e-7;

// Antiderivative of the Neumann double integral for two parallel filaments
// at transverse distance d, as a function of the axial offset z.
inline double parallel_kernel(double z, double d) {
    return z * std::asinh(z / d) - std::sqrt(z * z + d * d);
}

// d -> 0 limit of parallel_kernel with the log(d) terms removed; they cancel
// for collinear segments that do not overlap.
inline double collinear_kernel(double z) {
    const double a = std::abs(z);
    return a == 0.0 ? 0.0 : a * std::log(a) - a;
}

inline constexpr double collinear_tolerance = 1e-9;  // µm

// Axial offset used for coaxial pieces so that splitting a conductor leaves
// its self term unchanged. The bar formula carries a 0.2235(w+t) end term,
// i.e. a self-distance; the round-wire formula carries none.
inline double coaxial_distance(const Segment& a, const Segment& b) {
    auto g = [](const CrossSection& cs) {
        const auto* bar = std::get_if<RectSection>(&cs);
        return bar ? 0.2235 * (bar->width + bar->thickness) : 0.0;
    };
    return std::sqrt(g(a.section) * g(b.section));
}

// Mutual of `b` as seen along the axis of `a`. `b` is projected onto the
// axis of `a`; its transverse distance is taken at its midpoint. Exact for
// parallel and perpendicular pairs.
inline double projected_mutual(const Segment& a, const Segment& b) {
    const Vec3 ua = a.direction();
    double a1 = 0.0;
    double a2 = a.length();
    double b1 = dot(b.start - a.start, ua);
    double b2 = dot(b.end - a.start, ua);
    if (b1 == b2) return 0.0;

    const Vec3 rel = b.midpoint() - a.start;
    const Vec3 perp = rel - dot(rel, ua) * ua;
    const double d = norm(perp);

    double sign = 1.0;
    if (b1 > b2) {
        // Mirror the axis so that b runs forward; a now runs backward.
        b1 = -b1;
        b2 = -b2;
        std::swap(a1, a2);
        a1 = -a1;
        a2 = -a2;
        sign = -1.0;
    }

    double sum = 0.0;
    if (d < collinear_tolerance && coaxial_distance(a, b) > 0.0) {
        const double g = coaxial_distance(a, b);
        sum = parallel_kernel(a2 - b1, g) + parallel_kernel(a1 - b2, g) - parallel_kernel(a2 - b2, g) -
              parallel_kernel(a1 - b1, g);
    } else if (d < collinear_tolerance) {
        sum = collinear_kernel(a2 - b1) + collinear_kernel(a1 - b2) - collinear_kernel(a2 - b2) -
              collinear_kernel(a1 - b1);
    } else {
        sum = parallel_kernel(a2 - b1, d) + parallel_kernel(a1 - b2, d) - parallel_kernel(a2 - b2, d) -
              parallel_kernel(a1 - b1, d);
    }
    return sign * mu0_over_4pi * sum * constants::micron;
}

inline bool nearly_parallel(const Segment& a, const Segment& b) {
    return std::abs(std::abs(dot(a.direction(), b.direction())) - 1.0) < 1e-12;
}

}  // namespace detail

/// Partial self-inductance of a straight segment, in H.
///
/// Round wire: (µ0 l / 2π)(ln(2l/r) − 3/4). Rectangular bar:
/// (µ0 l / 2π)(ln(2l/(w+t)) + 1/2 + 0.2235 (w+t)/l).
/// Requires the length to be at least twice the largest transverse
/// half-extent (radius, or half the wider side of a bar).
inline double partial_self_inductance(const Segment& seg) {
    validate(seg);
    const double l_um = seg.length();
    if (l_um < 2.0 * section_half_extent(seg.section))
        throw InvalidGeometry("segment too short for the closed-form self inductance (length " +
                              std::to_string(l_um) + " µm)");
    const double l = l_um * constants::micron;
    const double k = constants::mu0 * l / (2.0 * constants::pi);
    if (const auto* r = std::get_if<RoundSection>(&seg.section)) {
        const double radius = r->radius * constants::micron;
        return k * (std::log(2.0 * l / radius) - 0.75);
    }
    const auto& bar = std::get<RectSection>(seg.section);
    const double wt = (bar.width + bar.thickness) * constants::micron;
    return k * (std::log(2.0 * l / wt) + 0.5 + 0.2235 * wt / l);
}

/// Signed partial mutual inductance between two segments, in H.
///
/// Positive when the currents flow in the same direction. Perpendicular
/// segments give exactly zero. Skewed pairs use the projection of each onto
/// the other's axis, averaged so that the result is symmetric.
inline double mutual_partial_inductance(const Segment& a, const Segment& b) {
    validate(a);
    validate(b);
    if (detail::nearly_parallel(a, b)) {
        const Vec3 ua = a.direction();
        const Vec3 rel = b.start - a.start;
        const double d = norm(rel - dot(rel, ua) * ua);
        const double lo_b = std::min(dot(b.start - a.start, ua), dot(b.end - a.start, ua));
        const double hi_b = std::max(dot(b.start - a.start, ua), dot(b.end - a.start, ua));
        const double overlap = std::min(a.length(), hi_b) - std::max(0.0, lo_b);
        const double clearance = section_min_half_extent(a.section) + section_min_half_extent(b.section);
        if (overlap > detail::collinear_tolerance && d < clearance)
            throw InvalidGeometry("overlapping parallel conductors");
    }
    return 0.5 * (detail::projected_mutual(a, b) + detail::projected_mutual(b, a));
}

/// Skin depth sqrt(ρ / (π f µ0)) in m; infinite at DC.
inline double skin_depth(double resistivity, double frequency) {
    if (frequency < 0.0) throw DomainError("frequency must be non-negative");
    if (frequency == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(resistivity / (constants::pi * frequency * constants::mu0));
}

/// Area carrying current at frequency f, in µm²: an annulus (round) or
/// perimeter shell (bar) one skin depth thick, never more than the full section.
inline double conducting_area(const CrossSection& cs, double resistivity, double frequency) {
    const double delta = skin_depth(resistivity, frequency) / constants::micron;
    if (const auto* r = std::get_if<RoundSection>(&cs)) {
        if (!(r->radius > delta)) return section_area(cs);
        const double inner = r->radius - delta;
        return constants::pi * (r->radius * r->radius - inner * inner);
    }
    const auto& b = std::get<RectSection>(cs);
    if (!(b.width > 2.0 * delta && b.thickness > 2.0 * delta)) return section_area(cs);
    return b.width * b.thickness - (b.width - 2.0 * delta) * (b.thickness - 2.0 * delta);
}

/// Series resistance of a segment at frequency f (f = 0 gives the DC value).
inline double segment_resistance(const Segment& seg, double frequency) {
    validate(seg);
    const double area = conducting_area(seg.section, seg.resistivity, frequency);
    return seg.resistivity * seg.length() * constants::micron / (area * constants::micron * constants::micron);
}

enum class CoilRole { primary, secondary1, secondary2 };

inline const char* to_string(CoilRole r) {
    switch (r) {
        case CoilRole::primary: return "primary";
        case CoilRole::secondary1: return "secondary1";
        case CoilRole::secondary2: return "secondary2";
    }
    return "?";
}

/// One coil as an ordered conductor path.
struct CoilGeometry {
    std::vector<Segment> segments;
    CoilRole role = CoilRole::primary;

    CoilGeometry reversed() const {
        CoilGeometry r{{}, role};
        for (auto it = segments.rbegin(); it != segments.rend(); ++it) r.segments.push_back(it->reversed());
        return r;
    }
};

inline constexpr double connection_tolerance = 1e-9;  // µm

inline void validate(const CoilGeometry& coil) {
    if (coil.segments.empty()) throw InvalidGeometry("coil has no segments");
    for (std::size_t i = 0; i < coil.segments.size(); ++i) {
        validate(coil.segments[i]);
        if (i > 0 && norm(coil.segments[i].start - coil.segments[i - 1].end) > connection_tolerance)
            throw InvalidGeometry("coil path is disconnected at segment " + std::to_string(i));
    }
}

/// Sum of mutual partial inductances between two segment sets, in H.
inline double mutual_between(std::span<const Segment> a, std::span<const Segment> b) {
    double m = 0.0;
    for (const auto& sa : a)
        for (const auto& sb : b) m += mutual_partial_inductance(sa, sb);
    return m;
}

/// Loop inductance of an open coil: all partial self terms plus signed mutual terms.
inline double loop_inductance(const CoilGeometry& coil) {
    validate(coil);
    const auto& s = coil.segments;
    double l = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        l += partial_self_inductance(s[i]);
        for (std::size_t j = i + 1; j < s.size(); ++j) l += 2.0 * mutual_partial_inductance(s[i], s[j]);
    }
    return l;
}

struct CoilResistance {
    double dc;  // Ω
    double ac;  // Ω
};

inline CoilResistance coil_resistance(const CoilGeometry& coil, double frequency) {
    if (frequency < 0.0) throw DomainError("frequency must be non-negative");
    validate(coil);
    CoilResistance r{0.0, 0.0};
    for (const auto& seg : coil.segments) {
        r.dc += segment_resistance(seg, 0.0);
        r.ac += segment_resistance(seg, frequency);
    }
    return r;
}

}  // namespace tsvqvco::em

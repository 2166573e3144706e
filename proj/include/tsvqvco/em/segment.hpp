#pragma once

#include <algorithm>
#include <cmath>
#include <variant>

#include "tsvqvco/constants.hpp"
#include "tsvqvco/errors.hpp"

namespace tsvqvco::em {

/// Point or direction in µm.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

struct RoundSection {
    double radius;  // µm
};

struct RectSection {
    double width;      // µm
    double thickness;  // µm
};

using CrossSection = std::variant<RoundSection, RectSection>;

inline constexpr double copper_resistivity = 1.68e-8;  // Ω·m

/// Straight conductor piece. Current flows from `start` to `end`.
struct Segment {
    Vec3 start;
    Vec3 end;
    CrossSection section = RoundSection{1.0};
    double resistivity = copper_resistivity;

    double length() const { return norm(end - start); }
    Vec3 direction() const { return (1.0 / length()) * (end - start); }
    Vec3 midpoint() const { return 0.5 * (start + end); }

    /// Segment traversed in the opposite direction.
    Segment reversed() const { return {end, start, section, resistivity}; }
};

/// Cross-sectional area in µm².
inline double section_area(const CrossSection& cs) {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RoundSection>)
                return constants::pi * s.radius * s.radius;
            else
                return s.width * s.thickness;
        },
        cs);
}

/// Largest transverse half-extent: radius, or half the wider side of a bar.
inline double section_half_extent(const CrossSection& cs) {
    if (const auto* r = std::get_if<RoundSection>(&cs)) return r->radius;
    const auto& b = std::get<RectSection>(cs);
    return 0.5 * std::max(b.width, b.thickness);
}

/// Smallest transverse half-extent, used for the conductor overlap test.
inline double section_min_half_extent(const CrossSection& cs) {
    if (const auto* r = std::get_if<RoundSection>(&cs)) return r->radius;
    const auto& b = std::get<RectSection>(cs);
    return 0.5 * std::min(b.width, b.thickness);
}

/// Footprint width seen from above (x-y plane) for area accounting.
inline double section_plan_width(const CrossSection& cs) {
    if (const auto* r = std::get_if<RoundSection>(&cs)) return 2.0 * r->radius;
    return std::get<RectSection>(cs).width;
}

inline void validate(const Segment& s) {
    if (!(s.length() > 0.0)) throw InvalidGeometry("segment has zero length");
    const bool ok = std::visit(
        [](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, RoundSection>)
                return c.radius > 0.0;
            else
                return c.width > 0.0 && c.thickness > 0.0;
        },
        s.section);
    if (!ok) throw InvalidGeometry("segment cross-section dimensions must be positive");
    if (!(s.resistivity > 0.0)) throw InvalidGeometry("segment resistivity must be positive");
}

}  // namespace tsvqvco::em

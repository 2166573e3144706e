#pragma once

// Parametrized TSV transformer layouts and their lumped 3-coil models.
//
// Toroidal: turns sit on a square ring. Each turn is an inner TSV, a radial
// M9 trace on top, an outer TSV, and a return trace on the lower tier to the
// next turn of the same coil. Secondary 1 occupies the first half of the
// ring, secondary 2 the second half, each turn flanked by primary turns.
//
// Vertical spiral: every coil is a nested spiral in a vertical plane with all
// of its TSVs on one line. Turn i of a coil uses the TSVs at i·pitch and
// (2n−1−i)·pitch and a top trace on M9, M8 or M7 (outermost highest), with
// the return trace mirrored below the tier. The secondaries reuse the x
// positions of the primary's outer turns, offset by ±row_spacing in y.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tsvqvco/em/partial_inductance.hpp"

namespace tsvqvco::em {

/// Process stack; lengths in µm.
struct ProcessParams {
    double substrate_tier_height = 60.0;
    double tsv_diameter = 20.0;
    double liner_thickness = 0.5;
    double min_tsv_pitch = 5.0;
    double m7_thickness = 2.0;
    double m8_thickness = 7.0;
    double m9_thickness = 7.0;
    double m7_width = 24.0;
    double m8_width = 24.0;
    double m9_width = 24.0;
    double via_m9m8 = 5.0;
    double via_m8m7 = 3.0;
    double conductor_resistivity = copper_resistivity;  // Ω·m
    double substrate_conductivity = 10.0;               // S/m, carried but unused

    double tsv_conductor_radius() const { return 0.5 * tsv_diameter - liner_thickness; }
    double min_center_pitch() const { return tsv_diameter + min_tsv_pitch; }
};

inline void validate(const ProcessParams& p) {
    const double lengths[] = {p.substrate_tier_height, p.tsv_diameter, p.liner_thickness, p.min_tsv_pitch,
                              p.m7_thickness, p.m8_thickness, p.m9_thickness, p.m7_width, p.m8_width,
                              p.m9_width, p.via_m9m8, p.via_m8m7};
    for (double v : lengths)
        if (!(v > 0.0)) throw InvalidGeometry("process lengths must be positive");
    if (!(p.tsv_diameter > 2.0 * p.liner_thickness))
        throw InvalidGeometry("tsv_diameter must exceed twice the liner thickness");
    if (!(p.conductor_resistivity > 0.0)) throw InvalidGeometry("conductor_resistivity must be positive");
    if (!(p.substrate_conductivity >= 0.0)) throw InvalidGeometry("substrate_conductivity must be non-negative");
}

enum class TransformerStyle { toroidal, vertical_spiral };

inline const char* to_string(TransformerStyle s) {
    return s == TransformerStyle::toroidal ? "toroidal" : "vertical_spiral";
}

struct TransformerGeometry {
    TransformerStyle style = TransformerStyle::toroidal;
    int turns_primary = 1;
    int turns_secondary = 1;
    double tsv_pitch = 25.0;    // µm, center-to-center along a TSV row
    double row_spacing = 60.0;  // µm; toroidal: ring width; vertical spiral: primary-to-secondary offset
    ProcessParams process{};
};

inline constexpr int max_vertical_spiral_turns = 3;  // one per routing layer M9/M8/M7

inline void validate(const TransformerGeometry& g) {
    validate(g.process);
    if (g.turns_primary < 1 || g.turns_secondary < 1)
        throw InvalidGeometry("turns_primary and turns_secondary must be >= 1");
    if (g.tsv_pitch < g.process.min_center_pitch())
        throw InvalidGeometry("tsv_pitch is below tsv_diameter + min_tsv_pitch");
    if (!(g.row_spacing >= g.process.min_center_pitch()))
        throw InvalidGeometry("row_spacing is below tsv_diameter + min_tsv_pitch");
    if (g.style == TransformerStyle::toroidal && 2 * g.turns_secondary > g.turns_primary)
        throw InvalidGeometry("toroidal layout needs turns_primary >= 2 * turns_secondary so that "
                              "secondary turns are flanked by primary turns");
    if (g.style == TransformerStyle::vertical_spiral) {
        if (g.turns_primary > max_vertical_spiral_turns || g.turns_secondary > g.turns_primary)
            throw InvalidGeometry("vertical spiral supports at most 3 primary turns and "
                                  "turns_secondary <= turns_primary");
    }
}

/// Lumped electrical model of a 3-coil transformer, SI units; area in mm².
struct TransformerModel {
    double L_p = 0.0;
    double L_s1 = 0.0;
    double L_s2 = 0.0;
    double R_pdc = 0.0;
    double R_sdc = 0.0;
    double R_pac = 0.0;
    double R_sac = 0.0;
    double k_ps1 = 0.0;
    double k_ps2 = 0.0;
    double k_ss = 0.0;
    double area = 0.0;
    double eval_frequency = 2.5e9;

    double L_s() const { return 0.5 * (L_s1 + L_s2); }
    double k_ps() const { return 0.5 * (k_ps1 + k_ps2); }
};

inline void validate(const TransformerModel& m) {
    if (!(m.L_p > 0.0 && m.L_s1 > 0.0 && m.L_s2 > 0.0)) throw InvalidModel("inductances must be positive");
    for (double k : {m.k_ps1, m.k_ps2, m.k_ss})
        if (!(k >= 0.0 && k < 1.0)) throw InvalidModel("coupling coefficients must lie in [0, 1)");
    if (!(m.R_pdc >= 0.0 && m.R_sdc >= 0.0 && m.R_pac >= m.R_pdc && m.R_sac >= m.R_sdc))
        throw InvalidModel("resistances must satisfy 0 <= R_dc <= R_ac");
    if (!(m.area > 0.0)) throw InvalidModel("area must be positive");
}

inline constexpr double default_eval_frequency = 2.5e9;

namespace detail {

inline Segment tsv(double x, double y, double z0, double z1, const ProcessParams& p) {
    return {{x, y, z0}, {x, y, z1}, RoundSection{p.tsv_conductor_radius()}, p.conductor_resistivity};
}

inline Segment trace(Vec3 a, Vec3 b, double width, double thickness, const ProcessParams& p) {
    return {a, b, RectSection{width, thickness}, p.conductor_resistivity};
}

// Ring order of coil roles: secondary 1 turns spread over the first half of
// the primaries, secondary 2 over the second half, never two secondaries
// adjacent.
inline std::vector<CoilRole> toroidal_order(int n_primary, int n_secondary) {
    const int half[2] = {n_primary / 2, n_primary - n_primary / 2};
    std::vector<CoilRole> order;
    for (int h = 0; h < 2; ++h) {
        const CoilRole sec = h == 0 ? CoilRole::secondary1 : CoilRole::secondary2;
        const int p = half[h];
        // secondary k goes after primary index floor((k + 1/2) p / n_s), clamped to a real gap
        std::vector<int> after(static_cast<std::size_t>(p), 0);
        for (int k = 0; k < n_secondary; ++k) {
            int slot = static_cast<int>(std::floor((k + 0.5) * p / n_secondary));
            slot = std::clamp(slot, 0, std::max(p - 1, 0));
            if (p > 0) ++after[static_cast<std::size_t>(slot)];
        }
        if (p == 0) {
            for (int k = 0; k < n_secondary; ++k) order.push_back(sec);
            continue;
        }
        for (int i = 0; i < p; ++i) {
            order.push_back(CoilRole::primary);
            for (int k = 0; k < after[static_cast<std::size_t>(i)]; ++k) order.push_back(sec);
        }
    }
    return order;
}

struct RingSlot {
    Vec3 inner;  // x, y only
    Vec3 outer;
};

struct ToroidalLayout {
    std::vector<CoilRole> order;
    std::vector<RingSlot> slots;
    double inner_half_size = 0.0;
};

inline ToroidalLayout toroidal_layout(const TransformerGeometry& g) {
    ToroidalLayout lay;
    lay.order = toroidal_order(g.turns_primary, g.turns_secondary);
    const int n = static_cast<int>(lay.order.size());
    const int per_side = (n + 3) / 4;
    const double side = per_side * g.tsv_pitch;
    const double a = 0.5 * side + 0.5 * g.tsv_pitch;
    lay.inner_half_size = a;
    for (int i = 0; i < n; ++i) {
        const int s = i / per_side;
        const int j = i % per_side;
        const double x = -0.5 * side + (j + 0.5) * g.tsv_pitch;
        const double c[4] = {1.0, 0.0, -1.0, 0.0};
        const double sn[4] = {0.0, 1.0, 0.0, -1.0};
        auto rot = [&](double px, double py) {
            return Vec3{c[s] * px - sn[s] * py, sn[s] * px + c[s] * py, 0.0};
        };
        lay.slots.push_back({rot(x, -a), rot(x, -a - g.row_spacing)});
    }
    return lay;
}

inline std::size_t role_index(CoilRole r) { return static_cast<std::size_t>(r); }

inline std::array<CoilGeometry, 3> toroidal_coils(const TransformerGeometry& g) {
    const auto& p = g.process;
    const double h = p.substrate_tier_height;
    // Return traces: primary on the lower tier's M9 (z = 0), secondaries one
    // via lower on M8 so that crossing return traces never share a plane.
    const double z_return[3] = {0.0, -(p.via_m9m8 + 0.5 * (p.m9_thickness + p.m8_thickness)),
                                -(p.via_m9m8 + 0.5 * (p.m9_thickness + p.m8_thickness))};
    const double w_return[3] = {p.m9_width, p.m8_width, p.m8_width};
    const double t_return[3] = {p.m9_thickness, p.m8_thickness, p.m8_thickness};

    const auto lay = toroidal_layout(g);
    std::array<CoilGeometry, 3> coils{CoilGeometry{{}, CoilRole::primary}, CoilGeometry{{}, CoilRole::secondary1},
                                      CoilGeometry{{}, CoilRole::secondary2}};
    std::array<bool, 3> started{false, false, false};
    std::array<Vec3, 3> last{};
    for (std::size_t i = 0; i < lay.order.size(); ++i) {
        const std::size_t c = role_index(lay.order[i]);
        const double z0 = z_return[c];
        const Vec3 in = lay.slots[i].inner;
        const Vec3 out = lay.slots[i].outer;
        auto& segs = coils[c].segments;
        if (started[c])
            segs.push_back(trace({last[c].x, last[c].y, z0}, {in.x, in.y, z0}, w_return[c], t_return[c], p));
        segs.push_back(tsv(in.x, in.y, z0, h, p));
        segs.push_back(trace({in.x, in.y, h}, {out.x, out.y, h}, p.m9_width, p.m9_thickness, p));
        segs.push_back(tsv(out.x, out.y, h, z0, p));
        started[c] = true;
        last[c] = out;
    }
    return coils;
}

// Vertical levels of the three routing layers above the tier top (z = H),
// outermost turn first, with their cross-sections.
struct RoutingLayer {
    double offset;  // µm above the TSV top / below the TSV bottom
    double width;
    double thickness;
};

inline std::array<RoutingLayer, 3> spiral_layers(const ProcessParams& p) {
    const double m7 = 0.5 * p.m7_thickness;
    const double m8 = p.m7_thickness + p.via_m8m7 + 0.5 * p.m8_thickness;
    const double m9 = p.m7_thickness + p.via_m8m7 + p.m8_thickness + p.via_m9m8 + 0.5 * p.m9_thickness;
    return {RoutingLayer{m9, p.m9_width, p.m9_thickness}, RoutingLayer{m8, p.m8_width, p.m8_thickness},
            RoutingLayer{m7, p.m7_width, p.m7_thickness}};
}

inline CoilGeometry spiral_coil(const TransformerGeometry& g, int first_turn, int n_turns, int span_turns,
                                double y, CoilRole role) {
    const auto& p = g.process;
    const double h = p.substrate_tier_height;
    const auto layers = spiral_layers(p);
    CoilGeometry coil{{}, role};
    double z_start = -layers[static_cast<std::size_t>(first_turn)].offset;
    for (int i = first_turn; i < first_turn + n_turns; ++i) {
        const auto& lay = layers[static_cast<std::size_t>(i)];
        const double x_left = -(0.5 + (span_turns - 1 - i)) * g.tsv_pitch;
        const double x_right = -x_left;
        const double z_top = h + lay.offset;
        const double z_bot = -lay.offset;
        coil.segments.push_back(tsv(x_left, y, z_start, z_top, p));
        coil.segments.push_back(trace({x_left, y, z_top}, {x_right, y, z_top}, lay.width, lay.thickness, p));
        coil.segments.push_back(tsv(x_right, y, z_top, z_bot, p));
        if (i + 1 < first_turn + n_turns) {
            const double x_next = x_left + g.tsv_pitch;
            coil.segments.push_back(trace({x_right, y, z_bot}, {x_next, y, z_bot}, lay.width, lay.thickness, p));
        }
        z_start = z_bot;
    }
    return coil;
}

inline std::array<CoilGeometry, 3> vertical_spiral_coils(const TransformerGeometry& g) {
    const int n = g.turns_primary;
    const int first = n - g.turns_secondary;
    return {spiral_coil(g, 0, n, n, 0.0, CoilRole::primary),
            spiral_coil(g, first, g.turns_secondary, n, -g.row_spacing, CoilRole::secondary1),
            spiral_coil(g, first, g.turns_secondary, n, g.row_spacing, CoilRole::secondary2)};
}

}  // namespace detail

/// Conductor paths of the primary and both secondaries, in that order.
inline std::array<CoilGeometry, 3> transformer_coils(const TransformerGeometry& g) {
    validate(g);
    return g.style == TransformerStyle::toroidal ? detail::toroidal_coils(g) : detail::vertical_spiral_coils(g);
}

/// Bounding footprint (x-y plane) of all conductors, in mm².
inline double metal_area(std::span<const CoilGeometry> coils) {
    double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
    double hi_x = -lo_x, hi_y = -lo_x;
    bool any = false;
    for (const auto& c : coils)
        for (const auto& s : c.segments) {
            const double half = 0.5 * section_plan_width(s.section);
            for (const Vec3& v : {s.start, s.end}) {
                lo_x = std::min(lo_x, v.x - half);
                hi_x = std::max(hi_x, v.x + half);
                lo_y = std::min(lo_y, v.y - half);
                hi_y = std::max(hi_y, v.y + half);
                any = true;
            }
        }
    if (!any) throw InvalidGeometry("geometry has no conductors");
    return (hi_x - lo_x) * (hi_y - lo_y) * 1e-6;
}

inline double metal_area(const TransformerGeometry& g) {
    const auto coils = transformer_coils(g);
    return metal_area(std::span<const CoilGeometry>(coils));
}

/// Symmetric 3×3 inductance matrix (H), order primary, secondary 1, secondary 2.
inline std::array<std::array<double, 3>, 3> inductance_matrix(std::span<const CoilGeometry> coils) {
    std::array<std::array<double, 3>, 3> l{};
    for (std::size_t i = 0; i < 3; ++i) {
        l[i][i] = loop_inductance(coils[i]);
        for (std::size_t j = i + 1; j < 3; ++j) {
            l[i][j] = mutual_between(coils[i].segments, coils[j].segments);
            l[j][i] = l[i][j];
        }
    }
    return l;
}

/// Extracts the lumped model of a transformer geometry at `f_eval`.
///
/// Coupling coefficients are magnitudes |M|/sqrt(L_i L_j); winding polarity is
/// assigned later by the circuit's dot convention. Secondary resistances are
/// the mean of the two secondaries.
inline TransformerModel build_transformer(const TransformerGeometry& g, double f_eval = default_eval_frequency) {
    if (!(f_eval >= 0.0)) throw DomainError("evaluation frequency must be non-negative");
    const auto coils = transformer_coils(g);
    const std::span<const CoilGeometry> view(coils);
    const auto l = inductance_matrix(view);
    const auto rp = coil_resistance(coils[0], f_eval);
    const auto rs1 = coil_resistance(coils[1], f_eval);
    const auto rs2 = coil_resistance(coils[2], f_eval);
    auto k = [&](std::size_t i, std::size_t j) { return std::abs(l[i][j]) / std::sqrt(l[i][i] * l[j][j]); };

    TransformerModel m;
    m.L_p = l[0][0];
    m.L_s1 = l[1][1];
    m.L_s2 = l[2][2];
    m.R_pdc = rp.dc;
    m.R_pac = rp.ac;
    m.R_sdc = 0.5 * (rs1.dc + rs2.dc);
    m.R_sac = 0.5 * (rs1.ac + rs2.ac);
    m.k_ps1 = k(0, 1);
    m.k_ps2 = k(0, 2);
    m.k_ss = k(1, 2);
    m.area = metal_area(view);
    m.eval_frequency = f_eval;
    validate(m);
    return m;
}

struct SpiralEstimate {
    double inductance;  // H
    double area;        // mm²
};

/// Square planar spiral by the modified Wheeler expression
/// L = 2.34 µ0 n² d_avg / (1 + 2.75 ρ), ρ = (d_out − d_in)/(d_out + d_in).
/// Dimensions in µm; the turns must fit between the outer and inner edges.
inline SpiralEstimate wheeler_spiral_inductance(double n_turns, double outer_dim, double inner_dim, double width,
                                                double spacing) {
    if (!(n_turns > 0.0)) throw InvalidGeometry("spiral needs at least one turn");
    if (!(outer_dim > inner_dim && inner_dim > 0.0)) throw InvalidGeometry("spiral needs outer_dim > inner_dim > 0");
    if (!(width > 0.0 && spacing >= 0.0)) throw InvalidGeometry("spiral width must be positive");
    const double needed = 2.0 * n_turns * width + 2.0 * std::max(n_turns - 1.0, 0.0) * spacing;
    if (needed > outer_dim - inner_dim + 1e-9)
        throw InvalidGeometry("spiral turns do not fit between outer and inner dimensions");
    const double d_avg = 0.5 * (outer_dim + inner_dim) * constants::micron;
    const double fill = (outer_dim - inner_dim) / (outer_dim + inner_dim);
    const double l = 2.34 * constants::mu0 * n_turns * n_turns * d_avg / (1.0 + 2.75 * fill);
    return {l, outer_dim * outer_dim * 1e-6};
}

}  // namespace tsvqvco::em

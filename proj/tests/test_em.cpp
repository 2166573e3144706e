#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "tsvqvco/em/transformer.hpp"

using namespace tsvqvco;
using namespace tsvqvco::em;

namespace {

Segment wire(Vec3 a, Vec3 b, double r = 10.0) { return {a, b, RoundSection{r}}; }

// Parallel-filament mutual inductance written out independently, H.
double grover_parallel(double l_um, double d_um) {
    const double x = l_um / d_um;
    return 2e-7 * l_um * 1e-6 * (std::log(x + std::sqrt(1 + x * x)) - std::sqrt(1 + 1 / (x * x)) + 1 / x);
}

TransformerGeometry toroid() {
    TransformerGeometry g;
    g.turns_primary = 22;
    g.turns_secondary = 4;
    g.tsv_pitch = 25;
    g.row_spacing = 65;
    return g;
}

TransformerGeometry spiral() {
    TransformerGeometry g;
    g.style = TransformerStyle::vertical_spiral;
    g.turns_primary = 2;
    g.turns_secondary = 1;
    g.tsv_pitch = 430;
    g.row_spacing = 39;
    return g;
}

CoilGeometry split(const CoilGeometry& c) {
    CoilGeometry out{{}, c.role};
    for (const auto& s : c.segments) {
        const Vec3 m = s.midpoint();
        out.segments.push_back({s.start, m, s.section, s.resistivity});
        out.segments.push_back({m, s.end, s.section, s.resistivity});
    }
    return out;
}

}  // namespace

TEST(PartialInductance, SelfOfRoundTsv) {
    const auto s = wire({0, 0, 0}, {0, 0, 60});
    EXPECT_NEAR(partial_self_inductance(s) * 1e12, 20.8, 0.1);
    EXPECT_NEAR(partial_self_inductance(s), 2e-7 * 60e-6 * (std::log(12.0) - 0.75), 1e-18);
}

TEST(PartialInductance, SelfGrowsFasterThanLength) {
    for (double l : {30.0, 60.0, 200.0}) {
        const double l1 = partial_self_inductance(wire({0, 0, 0}, {0, 0, l}));
        const double l2 = partial_self_inductance(wire({0, 0, 0}, {0, 0, 2 * l}));
        EXPECT_GT(l2, 2 * l1);
    }
}

TEST(PartialInductance, RejectsShortOrDegenerateSegments) {
    EXPECT_THROW(partial_self_inductance(wire({0, 0, 0}, {0, 0, 15})), InvalidGeometry);
    EXPECT_THROW(partial_self_inductance(wire({0, 0, 0}, {0, 0, 0})), InvalidGeometry);
    EXPECT_THROW(partial_self_inductance(wire({0, 0, 0}, {0, 0, 60}, -1)), InvalidGeometry);
}

TEST(PartialInductance, MutualOfParallelTsvs) {
    const auto a = wire({0, 0, 0}, {0, 0, 60}), b = wire({25, 0, 0}, {25, 0, 60});
    EXPECT_NEAR(mutual_partial_inductance(a, b) * 1e12, 11.3, 0.2);
    EXPECT_NEAR(mutual_partial_inductance(a, b), grover_parallel(60, 25), 1e-16);
}

TEST(PartialInductance, PerpendicularIsZeroAntiparallelIsNegated) {
    const auto a = wire({0, 0, 0}, {0, 0, 60});
    EXPECT_EQ(mutual_partial_inductance(a, wire({5, 0, 70}, {80, 0, 70}, 3)), 0.0);
    const auto b = wire({25, 0, 0}, {25, 0, 60});
    EXPECT_DOUBLE_EQ(mutual_partial_inductance(a, b.reversed()), -mutual_partial_inductance(a, b));
}

TEST(PartialInductance, OverlappingConductorsRejected) {
    EXPECT_THROW(mutual_partial_inductance(wire({0, 0, 0}, {0, 0, 60}), wire({5, 0, 10}, {5, 0, 50})),
                 InvalidGeometry);
}

TEST(PartialInductance, RandomPairsSymmetricAndBounded) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-200, 200);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        const auto a = wire({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 2);
        const auto b = wire({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 2);
        if (a.length() < 10 || b.length() < 10) continue;
        double mab = 0, mba = 0;
        try {
            mab = mutual_partial_inductance(a, b);
            mba = mutual_partial_inductance(b, a);
        } catch (const InvalidGeometry&) {
            continue;
        }
        ++checked;
        EXPECT_NEAR(mab, mba, 1e-12 * std::max(std::abs(mab), 1e-15));
        EXPECT_LE(std::abs(mab), std::sqrt(partial_self_inductance(a) * partial_self_inductance(b)));
    }
    EXPECT_GT(checked, 250);
}

TEST(Resistance, TsvDcAndSkinDepth) {
    const auto t = wire({0, 0, 0}, {0, 0, 60});
    EXPECT_NEAR(segment_resistance(t, 0.0) * 1e3, 3.2, 0.1);
    EXPECT_NEAR(skin_depth(copper_resistivity, 2.5e9) * 1e6, 1.30, 0.02);
    EXPECT_NEAR(skin_depth(copper_resistivity, 2.5e9), std::sqrt(1.68e-8 / (constants::pi * 2.5e9 * 4e-7 * constants::pi)),
                1e-15);
    EXPECT_THROW(skin_depth(copper_resistivity, -1.0), DomainError);
}

TEST(Resistance, AcEqualsDcAtZeroAndRisesWithFrequency) {
    for (const CrossSection cs : {CrossSection{RoundSection{9.5}}, CrossSection{RectSection{24, 7}}}) {
        const Segment s{{0, 0, 0}, {100, 0, 0}, cs};
        EXPECT_DOUBLE_EQ(segment_resistance(s, 0.0), copper_resistivity * 100e-6 / (section_area(cs) * 1e-12));
        const CoilGeometry c{{s}};
        EXPECT_EQ(coil_resistance(c, 0.0).ac, coil_resistance(c, 0.0).dc);
        double prev = segment_resistance(s, 0.0);
        for (double f : {1e6, 1e8, 1e9, 2.5e9, 1e10}) {
            const double r = segment_resistance(s, f);
            EXPECT_GE(r, prev);
            prev = r;
        }
    }
    // Below the point where δ exceeds the radius the whole section conducts.
    const auto t = wire({0, 0, 0}, {0, 0, 60});
    EXPECT_EQ(segment_resistance(t, 1e3), segment_resistance(t, 0.0));
}

TEST(Loop, TsvPairContribution) {
    // Go and return TSVs closed by M9 and lower-tier traces.
    const Segment up = wire({0, 0, 0}, {0, 0, 60}), down = wire({25, 0, 60}, {25, 0, 0});
    const CoilGeometry loop{{up, wire({0, 0, 60}, {25, 0, 60}, 3), down, wire({25, 0, 0}, {0, 0, 0}, 3)}};
    const double tsv_only = partial_self_inductance(up) + partial_self_inductance(down) +
                            2 * mutual_partial_inductance(up, down);
    EXPECT_NEAR(tsv_only * 1e12, 19.0, 0.5);
    EXPECT_NEAR(tsv_only, 2 * (2e-7 * 60e-6 * (std::log(12.0) - 0.75)) - 2 * grover_parallel(60, 25), 1e-16);
    EXPECT_GT(loop_inductance(loop), 0.0);
}

TEST(Loop, ReversalInvariantAndDisconnectedRejected) {
    const auto coils = transformer_coils(toroid());
    for (const auto& c : coils) EXPECT_NEAR(loop_inductance(c.reversed()), loop_inductance(c), 1e-9 * loop_inductance(c));
    CoilGeometry broken = coils[0];
    broken.segments.erase(broken.segments.begin() + 1);
    EXPECT_THROW(loop_inductance(broken), InvalidGeometry);
}

TEST(Loop, ResegmentationIsAdditive) {
    for (const auto& g : {toroid(), spiral()}) {
        const auto c = transformer_coils(g)[0];
        EXPECT_NEAR(loop_inductance(split(c)) / loop_inductance(c), 1.0, 5e-3) << to_string(g.style);
    }
}

TEST(Transformer, MatricesArePositiveDefinite) {
    std::mt19937 rng(11);
    for (int i = 0; i < 24; ++i) {
        TransformerGeometry g;
        const bool sp = i % 2;
        g.style = sp ? TransformerStyle::vertical_spiral : TransformerStyle::toroidal;
        g.turns_primary = sp ? 1 + static_cast<int>(rng() % 3) : 4 + 2 * static_cast<int>(rng() % 8);
        g.turns_secondary = 1 + static_cast<int>(rng() % static_cast<unsigned>(sp ? g.turns_primary : g.turns_primary / 2));
        g.tsv_pitch = 25 + static_cast<double>(rng() % (sp ? 400 : 30));
        g.row_spacing = 25 + static_cast<double>(rng() % 100);
        const auto coils = transformer_coils(g);
        const auto l = inductance_matrix(coils);
        Eigen::Matrix3d m;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m(r, c) = l[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        EXPECT_EQ(m, m.transpose());
        EXPECT_GT(m.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff(), 0.0);
        const auto t = build_transformer(g);
        for (double k : {t.k_ps1, t.k_ps2, t.k_ss}) {
            EXPECT_GE(k, 0.0);
            EXPECT_LT(k, 1.0);
        }
    }
}

TEST(Transformer, ToroidPrimaryCouplesMoreThanSecondaries) {
    for (int np : {8, 14, 22}) {
        auto g = toroid();
        g.turns_primary = np;
        g.turns_secondary = np / 4;
        const auto t = build_transformer(g);
        EXPECT_GT(t.k_ps(), t.k_ss) << np;
    }
}

TEST(Transformer, SpiralCouplingFallsWithRowSpacing) {
    auto g = spiral();
    double prev = 1.0;
    for (double row : {30.0, 40.0, 60.0, 90.0, 140.0, 200.0}) {
        g.row_spacing = row;
        const double k = build_transformer(g).k_ps();
        EXPECT_LT(k, prev) << row;
        prev = k;
    }
}

TEST(Transformer, MoreTurnsMoreInductance) {
    auto g = toroid();
    g.turns_primary = 8, g.turns_secondary = 1;
    const double l8 = build_transformer(g).L_p;
    g.turns_primary = 16;
    EXPECT_GT(build_transformer(g).L_p, l8);
}

TEST(Transformer, SwappingSecondariesPermutesMatrix) {
    for (const auto& g : {toroid(), spiral()}) {
        auto coils = transformer_coils(g);
        const auto l = inductance_matrix(coils);
        std::swap(coils[1], coils[2]);
        const auto s = inductance_matrix(coils);
        EXPECT_DOUBLE_EQ(s[0][1], l[0][2]);
        EXPECT_DOUBLE_EQ(s[0][2], l[0][1]);
        EXPECT_DOUBLE_EQ(s[1][2], l[1][2]);
        EXPECT_DOUBLE_EQ(s[1][1], l[2][2]);
    }
}

TEST(Transformer, DoublingLateralDimensionsQuadruplesArea) {
    auto g = toroid();
    g.tsv_pitch = 40;
    g.row_spacing = 80;
    auto big = g;
    big.tsv_pitch *= 2;
    big.row_spacing *= 2;
    const double ratio = metal_area(big) / metal_area(g);
    EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(Transformer, InvalidGeometriesRejected) {
    auto g = toroid();
    g.turns_primary = 0;
    EXPECT_THROW(build_transformer(g), InvalidGeometry);
    g = toroid();
    g.tsv_pitch = 20;
    EXPECT_THROW(build_transformer(g), InvalidGeometry);
    g = toroid();
    g.turns_secondary = 12;
    EXPECT_THROW(build_transformer(g), InvalidGeometry);
    g = spiral();
    g.turns_primary = 4;
    EXPECT_THROW(build_transformer(g), InvalidGeometry);
    EXPECT_THROW(build_transformer(toroid(), -1.0), DomainError);
}

TEST(Transformer, CommittedGeometriesAreValid) {
    const auto t = build_transformer(toroid()), s = build_transformer(spiral());
    EXPECT_LT(s.area, t.area);
    EXPECT_GE(t.R_pac, t.R_pdc);
    EXPECT_GE(s.R_sac, s.R_sdc);
}

TEST(Spiral, WheelerEstimate) {
    // 1.5 turns, 700 µm outer, 50 µm lines at 3 µm spacing.
    const double inner = 700 - 2 * (1.5 * 50 + 0.5 * 3);
    const auto e = wheeler_spiral_inductance(1.5, 700, inner, 50, 3);
    const double davg = 0.5 * (700 + inner) * 1e-6, rho = (700 - inner) / (700 + inner);
    EXPECT_NEAR(e.inductance, 2.34 * 4e-7 * constants::pi * 2.25 * davg / (1 + 2.75 * rho), 1e-18);
    EXPECT_NEAR(e.area, 0.49, 1e-12);
    const double ratio = e.area / build_transformer(toroid()).area;
    EXPECT_GT(ratio, 2.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Spiral, WheelerMonotonicInTurnsAndValidated) {
    double prev = 0;
    for (double n : {1.0, 1.5, 2.0, 3.0}) {
        const double l = wheeler_spiral_inductance(n, 700, 300, 20, 3).inductance;
        EXPECT_GT(l, prev);
        prev = l;
    }
    EXPECT_THROW(wheeler_spiral_inductance(0, 700, 300, 20, 3), InvalidGeometry);
    EXPECT_THROW(wheeler_spiral_inductance(10, 700, 300, 50, 3), InvalidGeometry);
    EXPECT_THROW(wheeler_spiral_inductance(1, 300, 700, 20, 3), InvalidGeometry);
}

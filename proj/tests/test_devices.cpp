#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tsvqvco/devices/mos.hpp"
#include "tsvqvco/devices/passive.hpp"

using namespace tsvqvco;
using namespace tsvqvco::devices;

TEST(Mos, CutoffBoundaryIsZero) {
    const MosParams n{Polarity::n, 4e-3, 0.3, 0.1};
    EXPECT_EQ(mos_current(n, 0.3, 0.5), 0.0);
    EXPECT_EQ(mos_current(n, 0.0, 0.5), 0.0);
    const MosParams p{Polarity::p, 4e-3, -0.3, 0.1};
    EXPECT_EQ(mos_current(p, -0.3, -0.5), 0.0);
}

TEST(Mos, SaturationHandValue) {
    const MosParams n{Polarity::n, 4e-3, 0.3, 0.0};
    EXPECT_NEAR(mos_current(n, 0.5, 0.7), 80e-6, 1e-18);
    // Triode: K[(vov)vds − vds²/2] = 4e-3·(0.2·0.1 − 0.005)
    EXPECT_NEAR(mos_current(n, 0.5, 0.1), 4e-3 * 0.015, 1e-18);
}

TEST(Mos, PTypeMirrorsNType) {
    const MosParams n{Polarity::n, 3e-3, 0.25, 0.2};
    const MosParams p{Polarity::p, 3e-3, -0.25, 0.2};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double vgs = v(rng), vds = v(rng);
        EXPECT_DOUBLE_EQ(mos_current(p, -vgs, -vds), -mos_current(n, vgs, vds));
    }
}

TEST(Mos, SourceDrainSymmetry) {
    // Swapping drain and source reverses the current.
    const MosParams n{Polarity::n, 3e-3, 0.25, 0.0};
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double vg = v(rng), vd = v(rng), vs = v(rng);
        EXPECT_NEAR(mos_current(n, vg - vs, vd - vs), -mos_current(n, vg - vd, vs - vd), 1e-15);
    }
}

TEST(Mos, ContinuousAcrossRegionBoundaries) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double eps = 1e-13;
    for (int i = 0; i < 1000; ++i) {
        const MosParams n{Polarity::n, 1e-3 + 1e-2 * u(rng), 0.1 + 0.4 * u(rng), 0.5 * u(rng)};
        const double vgs = n.v_th + 0.8 * u(rng);
        const double b = vgs - n.v_th;
        // triode/saturation
        EXPECT_LT(std::abs(mos_current(n, vgs, b - eps) - mos_current(n, vgs, b + eps)), 1e-12);
        // cutoff
        const double vds = u(rng);
        EXPECT_LT(std::abs(mos_current(n, n.v_th + eps, vds) - mos_current(n, n.v_th - eps, vds)), 1e-12);
        // vds = 0
        EXPECT_LT(std::abs(mos_current(n, vgs, eps) - mos_current(n, vgs, -eps)), 1e-12);
    }
}

TEST(Mos, SmallSignalMatchesFiniteDifference) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const bool is_n = u(rng) < 0.5;
        const double vth = 0.2 + 0.3 * u(rng);
        const MosParams m{is_n ? Polarity::n : Polarity::p, 1e-3 + 1e-2 * u(rng), is_n ? vth : -vth, 0.3 * u(rng)};
        const double s = is_n ? 1.0 : -1.0;
        const double vov = 0.05 + 0.5 * u(rng);
        const double vgs = s * (vth + vov);
        const double vds = s * (vov + 0.02 + 0.5 * u(rng));  // saturation
        const auto ss = mos_small_signal(m, vgs, vds);
        ASSERT_FALSE(ss.cutoff);
        const double gm_fd = (mos_current(m, vgs + h, vds) - mos_current(m, vgs - h, vds)) / (2 * h);
        const double gds_fd = (mos_current(m, vgs, vds + h) - mos_current(m, vgs, vds - h)) / (2 * h);
        EXPECT_NEAR(ss.gm / gm_fd, 1.0, 1e-6);
        if (m.lambda > 1e-3) {
            EXPECT_NEAR(ss.gds / gds_fd, 1.0, 1e-6);
        }
        ++checked;
    }
    EXPECT_EQ(checked, 1000);
}

TEST(Mos, TriodeDerivativesMatchFiniteDifference) {
    const MosParams n{Polarity::n, 5e-3, 0.3, 0.15};
    const double h = 1e-6;
    for (double vds : {-0.3, -0.05, 0.02, 0.1, 0.25}) {
        const double vgs = 0.7;
        const auto e = mos_evaluate(n, vgs, vds);
        const double gm_fd = (mos_current(n, vgs + h, vds) - mos_current(n, vgs - h, vds)) / (2 * h);
        const double gds_fd = (mos_current(n, vgs, vds + h) - mos_current(n, vgs, vds - h)) / (2 * h);
        EXPECT_NEAR(e.gm, gm_fd, 1e-6 * std::abs(gds_fd) + 1e-12);
        EXPECT_NEAR(e.gds / gds_fd, 1.0, 1e-6);
    }
}

TEST(Mos, SaturationNoLambdaAnalytic) {
    const MosParams n{Polarity::n, 4e-3, 0.3, 0.0};
    const auto ss = mos_small_signal(n, 0.5, 0.7);
    EXPECT_NEAR(ss.gm, 4e-3 * 0.2, 1e-18);
    EXPECT_EQ(ss.gds, 0.0);
    const auto off = mos_small_signal(n, 0.1, 0.7);
    EXPECT_TRUE(off.cutoff);
    EXPECT_EQ(off.gm, 0.0);
    EXPECT_EQ(off.gds, 0.0);
}

TEST(Mos, ValidateRejectsBadSigns) {
    EXPECT_THROW(validate(MosParams{Polarity::p, 1e-3, 0.3, 0.0}), DomainError);
    EXPECT_THROW(validate(MosParams{Polarity::n, -1e-3, 0.3, 0.0}), DomainError);
    EXPECT_THROW(validate(MosParams{Polarity::n, 1e-3, 0.3, -0.1}), DomainError);
    EXPECT_NO_THROW(validate(MosParams{Polarity::p, 1e-3, -0.3, 0.0}));
}

TEST(Varactor, EndpointsExactAndMidpoint) {
    const VaractorModel m;
    EXPECT_EQ(varactor_capacitance(m, 0.1), 2.1e-12);
    EXPECT_EQ(varactor_capacitance(m, 0.7), 6.3e-12);
    EXPECT_NEAR(varactor_capacitance(m, 0.4), 4.2e-12, 1e-24);
    EXPECT_EQ(varactor_capacitance(m, -1.0), 2.1e-12);
    EXPECT_EQ(varactor_capacitance(m, 2.0), 6.3e-12);
}

TEST(Varactor, OddSymmetricAboutMidpoint) {
    const VaractorModel m;
    for (double d = 0.0; d <= 0.3; d += 0.01) {
        const double up = varactor_capacitance(m, 0.4 + d) - 4.2e-12;
        const double dn = 4.2e-12 - varactor_capacitance(m, 0.4 - d);
        EXPECT_NEAR(up, dn, 1e-24);
    }
}

TEST(Varactor, MonotoneOnAllSampledPairs) {
    const VaractorModel m;
    std::vector<double> c;
    for (int i = 0; i <= 400; ++i) c.push_back(varactor_capacitance(m, -0.1 + i * 0.0025));
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) EXPECT_LE(c[i], c[j]);
}

TEST(Varactor, SlopeMatchesFiniteDifferenceAndIsContinuous) {
    const VaractorModel m;
    const double h = 1e-7;
    for (double v = 0.12; v < 0.69; v += 0.037) {
        const double fd = (varactor_capacitance(m, v + h) - varactor_capacitance(m, v - h)) / (2 * h);
        EXPECT_NEAR(varactor_slope(m, v) / fd, 1.0, 1e-5);
    }
    // C¹ at the clamp points.
    EXPECT_NEAR(varactor_slope(m, 0.1 + 1e-9), 0.0, 1e-18);
    EXPECT_NEAR(varactor_slope(m, 0.7 - 1e-9), 0.0, 1e-18);
}

TEST(TuningArrayCap, Codes) {
    EXPECT_EQ(tuning_array_capacitance({2e-12, 0b00}), 0.0);
    EXPECT_EQ(tuning_array_capacitance({2e-12, 0b01}), 1e-12);
    EXPECT_EQ(tuning_array_capacitance({2e-12, 0b10}), tuning_array_capacitance({2e-12, 0b01}));
    EXPECT_EQ(tuning_array_capacitance({2e-12, 0b11}), 2e-12);
    EXPECT_THROW((void)tuning_array_capacitance({2e-12, 4}), DomainError);
    EXPECT_EQ(parse_array_code("10"), 2u);
    EXPECT_EQ(format_array_code(1), "01");
    EXPECT_THROW((void)parse_array_code("2"), DomainError);
}

namespace {

em::TransformerModel model(double lp, double ls, double kps, double kss) {
    em::TransformerModel x;
    x.L_p = lp;
    x.L_s1 = x.L_s2 = ls;
    x.R_pac = x.R_pdc = 1.0;
    x.R_sac = x.R_sdc = 0.5;
    x.k_ps1 = x.k_ps2 = kps;
    x.k_ss = kss;
    x.area = 0.1;
    return x;
}

// Sylvester's criterion on the normalized coupling matrix.
bool sylvester_pd(double kps, double kss) {
    const double m2 = 1.0 - kps * kps;
    const double det = 1.0 * (1.0 - kss * kss) - kps * (kps - kss * kps) + kps * (kps * kss - kps);
    return m2 > 0.0 && det > 0.0;
}

}  // namespace

TEST(CoupledInductors, MutualHandValue) {
    const auto s = coupled_inductor_matrix(model(3e-9, 0.4e-9, 0.52, 0.15));
    EXPECT_NEAR(s.inductance(0, 1), 0.570e-9, 1e-12);
    EXPECT_NEAR(s.inductance(0, 1), 0.52 * std::sqrt(3e-9 * 0.4e-9), 1e-24);
    EXPECT_DOUBLE_EQ(s.inductance(0, 0), 3e-9);
    EXPECT_DOUBLE_EQ(s.inductance(1, 1), 0.4e-9);
    EXPECT_TRUE(s.inductance.isApprox(s.inductance.transpose(), 0.0));
}

TEST(CoupledInductors, ZeroCouplingIsDiagonal) {
    const auto s = coupled_inductor_matrix(model(3e-9, 0.4e-9, 0.0, 0.0));
    EXPECT_TRUE(s.inductance.isDiagonal(0.0));
}

TEST(CoupledInductors, DefinitenessAgreesWithSylvester) {
    for (double kps = 0.0; kps < 0.99; kps += 0.05)
        for (double kss = 0.0; kss < 0.99; kss += 0.05) {
            const auto x = model(3e-9, 0.4e-9, kps, kss);
            if (sylvester_pd(kps, kss))
                EXPECT_NO_THROW((void)coupled_inductor_matrix(x)) << kps << " " << kss;
            else
                EXPECT_THROW((void)coupled_inductor_matrix(x), InvalidModel) << kps << " " << kss;
        }
    // Strong primary coupling with weakly coupled secondaries is non-physical.
    EXPECT_THROW((void)coupled_inductor_matrix(model(3e-9, 0.4e-9, 0.9, 0.5)), InvalidModel);
}

TEST(CoupledInductors, DotSignsAndEnergy) {
    const auto x = model(3e-9, 0.4e-9, 0.52, 0.15);
    const auto plain = coupled_inductor_matrix(x);
    const auto flipped = coupled_inductor_matrix(x, {1, -1, 1});
    EXPECT_DOUBLE_EQ(flipped.inductance(0, 1), -plain.inductance(0, 1));
    EXPECT_DOUBLE_EQ(flipped.inductance(1, 2), -plain.inductance(1, 2));
    EXPECT_DOUBLE_EQ(flipped.inductance(0, 2), plain.inductance(0, 2));
    EXPECT_TRUE(flipped.sign_matrix().cwiseProduct(flipped.inductance).isApprox(plain.inductance));
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector3d cur(g(rng), g(rng), g(rng));
        EXPECT_GE(0.5 * cur.dot(flipped.inductance * cur), 0.0);
    }
    EXPECT_THROW((void)coupled_inductor_matrix(x, {1, 0, 1}), InvalidModel);
}

#include <gtest/gtest.h>

#include <cmath>

#include <pdmp_seasons/kernel.hpp>
#include <pdmp_seasons/rng.hpp>

#include "fixtures.hpp"

using namespace pdmp_seasons;

TEST(Philox, KnownAnswers)
{
    const auto zero = philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(zero, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    const auto pi = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                  {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(pi, (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdcceb, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, ReproducibleAndSeparated)
{
    RandomStream a(1, 0, StreamPurpose::thinning), b(1, 0, StreamPurpose::thinning);
    RandomStream c(1, 1, StreamPurpose::thinning), d(1, 0, StreamPurpose::loss), e(2, 0, StreamPurpose::thinning);
    int same_c = 0, same_d = 0, same_e = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto x = a();
        ASSERT_EQ(x, b());
        same_c += x == c();
        same_d += x == d();
        same_e += x == e();
    }
    EXPECT_EQ(same_c + same_d + same_e, 0);
}

TEST(RandomStream, UniformMoments)
{
    RandomStream rng(99, 3, StreamPurpose::rchain);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    EXPECT_NEAR(s / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(s2 / n, 1.0 / 3, 0.003);
}

TEST(Kernel, DiracIsConstant)
{
    RandomStream rng(1, 0, StreamPurpose::loss);
    const Theta t = sample_theta(DiracLoss{0.35, 0.2}, rng);
    EXPECT_EQ(t.w, 0.35);
    EXPECT_EQ(t.g, 0.2);
}

TEST(Kernel, DegenerateRectangleIsPointMass)
{
    RandomStream rng(1, 0, StreamPurpose::loss);
    for (int k = 0; k < 10; ++k) {
        const Theta t = sample_theta(UniformRectLoss{0.2, 0.2, 0.5, 0.5}, rng);
        EXPECT_EQ(t.w, 0.2);
        EXPECT_EQ(t.g, 0.5);
    }
}

TEST(Kernel, BetaMean)
{
    RandomStream rng(5, 0, StreamPurpose::loss);
    const int n = 100000;
    double sw = 0, sg = 0;
    for (int k = 0; k < n; ++k) {
        const Theta t = sample_theta(BetaProductLoss{2, 2, 2, 2}, rng);
        sw += t.w;
        sg += t.g;
    }
    const double sigma = std::sqrt(0.05 / n); // Var Beta(2,2) = 1/20
    EXPECT_NEAR(sw / n, 0.5, 3 * sigma);
    EXPECT_NEAR(sg / n, 0.5, 3 * sigma);
}

TEST(Kernel, UniformRectMean)
{
    RandomStream rng(6, 0, StreamPurpose::loss);
    const int n = 100000;
    double sw = 0;
    for (int k = 0; k < n; ++k) {
        const Theta t = sample_theta(UniformRectLoss{0.1, 0.3, 0.6, 0.9}, rng);
        ASSERT_GE(t.w, 0.1);
        ASSERT_LE(t.w, 0.3);
        ASSERT_GE(t.g, 0.6);
        ASSERT_LE(t.g, 0.9);
        sw += t.w;
    }
    EXPECT_NEAR(sw / n, 0.2, 3 * 0.2 / std::sqrt(12.0 * n));
}

TEST(Kernel, FireMap)
{
    const auto a = apply_fire(ModelKind::basic2d, {0.5, 0.9, 0, 0}, {0.35, 0.2});
    EXPECT_NEAR(a[kW], 0.325, 1e-15);
    EXPECT_NEAR(a[kG], 0.72, 1e-15);

    const auto b = apply_fire(ModelKind::herbivore4d, {0.5, 0.9, 0.4, 0.3}, {0.2, 0.05});
    EXPECT_NEAR(b[kW], 0.4, 1e-15);
    EXPECT_NEAR(b[kG], 0.855, 1e-15);
    EXPECT_EQ(b[kHG], 0.4);
    EXPECT_EQ(b[kHB], 0.3);

    const StateVector xi{0.3, 0.6, 0, 0};
    const auto id = apply_fire(ModelKind::basic2d, xi, {1e-15, 1e-15});
    EXPECT_NEAR(id[kW], xi[kW], 1e-15);
    EXPECT_NEAR(id[kG], xi[kG], 1e-15);
}

TEST(Kernel, FireNeverIncreasesAndStaysPositive)
{
    RandomStream rng(8, 0, StreamPurpose::loss);
    const LossModel loss = BetaProductLoss{0.3, 0.3, 0.3, 0.3};
    StateVector xi{0.7, 0.4, 1.5, 0.2};
    for (int k = 0; k < 2000; ++k) {
        const Theta t = sample_theta(loss, rng);
        const auto next = apply_fire(ModelKind::herbivore4d, xi, t);
        ASSERT_LE(next[kW], xi[kW]);
        ASSERT_LE(next[kG], xi[kG]);
        ASSERT_GT(next[kW], 0.0);
        ASSERT_GT(next[kG], 0.0);
        ASSERT_EQ(next[kHG], xi[kHG]);
        ASSERT_EQ(next[kHB], xi[kHB]);
        xi = next;
        if (xi[kW] < 1e-200)
            xi = {0.7, 0.4, 1.5, 0.2};
    }
}

TEST(Kernel, SeasonSwitch)
{
    const auto spec = fixtures::fig1();
    const StateVector xi{0.123456789, 0.987654321, 0, 0};
    const auto a = apply_season_switch(spec, {xi, 7.0, 0});
    EXPECT_EQ(a.xi, xi);
    EXPECT_EQ(a.zeta, 0.0);
    EXPECT_EQ(a.season, 1);
    const auto b = apply_season_switch(spec, {xi, 5.0, 1});
    EXPECT_EQ(b.season, 0);
    EXPECT_EQ(b.zeta, 0.0);
    const auto twice = apply_season_switch(spec, {a.xi, 5.0, a.season});
    EXPECT_EQ(twice.season, 0);
    EXPECT_EQ(twice.xi, xi);

    EXPECT_NO_THROW(apply_season_switch(spec, {xi, 7.0 - 5e-10, 0}));
    EXPECT_THROW(apply_season_switch(spec, {xi, 6.9, 0}), NotAtBoundary);
}

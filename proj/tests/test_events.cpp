#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <pdmp_seasons/events.hpp>

#include "fixtures.hpp"

using namespace pdmp_seasons;

namespace {

ModelSpec constant_rate(double c0, double zeta_m = 1e6)
{
    ModelSpec s = fixtures::fig1();
    for (auto& season : s.seasons) {
        season.rate = RateFunction{c0, 0.0, 0.0, 0.0};
        season.zeta_m = zeta_m;
    }
    return s;
}

/// Two-sided KS distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> x, Cdf cdf)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double f = cdf(x[k]);
        d = std::max({d, f - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - f});
    }
    return d;
}

} // namespace

TEST(HittingTime, Examples)
{
    const auto spec = fixtures::fig1();
    EXPECT_EQ(hitting_time(spec, fixtures::state2(0.5, 0.5, 0.0, 0)), 7.0);
    EXPECT_EQ(hitting_time(spec, fixtures::state2(0.5, 0.5, 3.5, 0)), 3.5);
    EXPECT_NEAR(hitting_time(spec, fixtures::state2(0.5, 0.5, 5.0 - 1e-9, 1)), 1e-9, 1e-15);
}

TEST(Thinning, ConstantRateIsExponential)
{
    const auto spec = constant_rate(0.7);
    RandomStream rng(11, 0, StreamPurpose::thinning);
    const int n = 100000;
    double sum = 0;
    std::vector<double> times;
    for (int k = 0; k < n; ++k) {
        const auto js = sample_next_jump(spec, fixtures::state2(0.5, 0.5), rng);
        ASSERT_EQ(js.jump.kind, JumpKind::fire);
        sum += js.jump.time;
        times.push_back(js.jump.time);
    }
    EXPECT_NEAR(sum / n, 1 / 0.7, 3 * (1 / 0.7) / std::sqrt(n));
    EXPECT_LT(ks_distance(times, [](double t) { return 1 - std::exp(-0.7 * t); }),
              1.36 / std::sqrt(n));
}

TEST(Thinning, FullRateAcceptsEveryCandidate)
{
    // A constant rate is its own bound.
    const auto spec = constant_rate(2.0);
    RandomStream a(3, 0, StreamPurpose::thinning);
    RandomStream b(3, 0, StreamPurpose::thinning);
    for (int k = 0; k < 1000; ++k) {
        const auto js = sample_next_jump(spec, fixtures::state2(0.5, 0.5), a);
        EXPECT_EQ(js.candidates, 1u);
        const double expected = b.exponential() / 2.0;
        (void)b.uniform();
        EXPECT_EQ(js.jump.time, expected);
    }
}

TEST(Thinning, FrozenFlowMatchesInhomogeneousLaw)
{
    // r_w = r_g -> 0 freezes xi; the rate grows linearly in the clock.
    ModelSpec spec = fixtures::fig1();
    auto& s = spec.seasons[0];
    s.r_w = 1e-300;
    s.r_g = 1e-300;
    s.zeta_m = 1e6;
    s.rate = RateFunction{0.05, 0.2, 0.3, 0.04};
    const double w = 0.4, g = 0.6;
    const double base = 0.05 + 0.2 * w + 0.3 * g;
    RandomStream rng(17, 0, StreamPurpose::thinning);
    ThinningOptions topts;
    topts.rate_bound = 3.0; // the clock term is unbounded over this long season
    const int n = 100000;
    std::vector<double> times;
    for (int k = 0; k < n; ++k)
        times.push_back(sample_next_jump(spec, fixtures::state2(w, g), rng, {}, topts, 60.0).jump.time);
    const double d = ks_distance(times, [&](double t) {
        return 1 - std::exp(-(base * t + 0.5 * 0.04 * t * t));
    });
    EXPECT_LT(d, 1.36 / std::sqrt(n));
}

TEST(Thinning, TruncatedAtBoundary)
{
    const auto spec = fixtures::fig1();
    RandomStream rng(5, 0, StreamPurpose::thinning);
    int boundary = 0;
    for (int k = 0; k < 20000; ++k) {
        const auto x = fixtures::state2(0.5, 0.9, 4.0, 1);
        const auto js = sample_next_jump(spec, x, rng);
        EXPECT_EQ(js.jump.t_star, 1.0);
        if (js.jump.kind == JumpKind::fire) {
            ASSERT_GT(js.jump.time, 0.0);
            ASSERT_LT(js.jump.time, js.jump.t_star);
            ASSERT_NEAR(js.path.duration(), js.jump.time, 1e-15);
        } else {
            ASSERT_EQ(js.jump.time, 1.0);
            ++boundary;
        }
    }
    EXPECT_GT(boundary, 0);
}

TEST(Thinning, MonotoneCoupling)
{
    ModelSpec low = fixtures::fig1();
    ModelSpec high = low;
    high.seasons[0].rate.c0 = 0.05;
    ThinningOptions shared;
    shared.rate_bound = high.seasons[0].rate.upper_bound(7.0);
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        RandomStream a(seed, 0, StreamPurpose::thinning);
        RandomStream b(seed, 0, StreamPurpose::thinning);
        const auto x = fixtures::state2(0.3, 0.6);
        const auto jl = sample_next_jump(low, x, a, {}, shared);
        const auto jh = sample_next_jump(high, x, b, {}, shared);
        ASSERT_LE(jh.jump.time, jl.jump.time) << seed;
    }
}

TEST(Thinning, InconsistentBoundIsReported)
{
    const auto spec = fixtures::fig1();
    ThinningOptions bad;
    bad.rate_bound = 0.001;
    RandomStream rng(1, 0, StreamPurpose::thinning);
    EXPECT_THROW(
        {
            for (int k = 0; k < 100; ++k)
                sample_next_jump(spec, fixtures::state2(0.5, 0.9), rng, {}, bad);
        },
        RateBoundViolation);
}

TEST(Thinning, LimitStopsTheSearch)
{
    const auto spec = constant_rate(1e-6);
    RandomStream rng(1, 0, StreamPurpose::thinning);
    const auto js = sample_next_jump(spec, fixtures::state2(0.5, 0.5), rng, {}, {}, 2.5);
    EXPECT_EQ(js.jump.kind, JumpKind::limit);
    EXPECT_EQ(js.jump.time, 2.5);
    EXPECT_NEAR(js.path.duration(), 2.5, 1e-15);
}

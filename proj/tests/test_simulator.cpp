#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <pdmp_seasons/estimators.hpp>
#include <pdmp_seasons/simulator.hpp>

#include "fixtures.hpp"

using namespace pdmp_seasons;

TEST(Simulator, DeterministicSeasonalPatternOfFig2)
{
    const auto spec = fixtures::fig2();
    const auto traj = run(spec, fixtures::state4(0.1, 0.1, 0.5, 0.2), 24.0, 1);
    ASSERT_EQ(traj.events.size(), 3u);
    const double times[] = {7.0, 12.0, 19.0};
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(traj.events[k].kind, EventKind::season_switch);
        EXPECT_EQ(traj.events[k].time, times[k]);
        EXPECT_EQ(traj.events[k].after.season, static_cast<int>((k + 1) % 2));
    }
    EXPECT_EQ(traj.samples.back().t, 24.0);
    EXPECT_NEAR(traj.samples.back().zeta, 5.0, 1e-12);

    // Same thing composed from the pure flow, season by season.
    StateVector xi{0.1, 0.1, 0.5, 0.2};
    const double lengths[] = {7, 5, 7, 5};
    for (int k = 0; k < 4; ++k)
        xi = advance(spec, k % 2, xi, lengths[k]).xi_end;
    for (std::size_t j = 0; j < 4; ++j)
        EXPECT_NEAR(traj.samples.back().xi[j], xi[j], 1e-7);
}

TEST(Simulator, NoJumpRunIsOneSegment)
{
    const auto spec = fixtures::fig2();
    const auto traj = run(spec, fixtures::state4(0.1, 0.1, 0.5, 0.2, 1.0, 0), 5.0, 1);
    EXPECT_TRUE(traj.events.empty());
    EXPECT_EQ(traj.samples.size(), 501u);
    const auto direct = advance(spec, 0, {0.1, 0.1, 0.5, 0.2}, 5.0);
    EXPECT_EQ(traj.samples.back().xi, direct.xi_end);
}

TEST(Simulator, BitIdenticalReruns)
{
    const auto spec = fixtures::fig1();
    const auto a = run(spec, fixtures::state2(0.5, 0.5), 500.0, 42);
    const auto b = run(spec, fixtures::state2(0.5, 0.5), 500.0, 42);
    EXPECT_EQ(a, b);
    const auto c = run(spec, fixtures::state2(0.5, 0.5), 500.0, 43);
    EXPECT_NE(a.events, c.events);
    EXPECT_NE(a.spec_digest, c.spec_digest);
}

TEST(Simulator, TrajectoryInvariants)
{
    ModelSpec spec = fixtures::fig1();
    spec.seasons[1].loss = BetaProductLoss{2, 5, 2, 3};
    const auto traj = run(spec, fixtures::state2(0.3, 0.6, 2.5, 1), 2000.0, 9);

    // Events strictly increasing, fires follow S_theta, switches flip the season.
    for (std::size_t k = 0; k < traj.events.size(); ++k) {
        const auto& e = traj.events[k];
        if (k) {
            ASSERT_GT(e.time, traj.events[k - 1].time);
        }
        ASSERT_LT(e.time, 2000.0);
        if (e.kind == EventKind::fire) {
            ASSERT_EQ(e.after.xi, apply_fire(spec.kind, e.before.xi, e.theta));
            ASSERT_EQ(e.after.zeta, e.before.zeta);
            ASSERT_EQ(e.after.season, e.before.season);
        } else {
            ASSERT_NEAR(e.before.zeta, spec.season(e.before.season).zeta_m, 1e-9);
            ASSERT_EQ(e.after.zeta, 0.0);
            ASSERT_EQ(e.after.season, 1 - e.before.season);
            ASSERT_EQ(e.after.xi, e.before.xi);
        }
    }

    // Switch gaps alternate 5, 7 after the partial first season; times are
    // exact sums of season lengths.
    std::vector<double> switches;
    for (const auto& e : traj.events)
        if (e.kind == EventKind::season_switch)
            switches.push_back(e.time);
    ASSERT_GT(switches.size(), 10u);
    EXPECT_EQ(switches[0], 2.5);
    for (std::size_t k = 1; k < switches.size(); ++k)
        ASSERT_EQ(switches[k] - switches[k - 1], k % 2 ? 7.0 : 5.0);

    // Clock consistency: zeta is the time since the last switch. A sample at
    // a switch time appears twice, once on each side.
    std::size_t next = 0;
    double last_switch = -2.5;
    for (const auto& s : traj.samples) {
        while (next < switches.size() && switches[next] < s.t)
            last_switch = switches[next++];
        const bool at_switch = next < switches.size() && switches[next] == s.t;
        ASSERT_GE(s.zeta, 0.0);
        if (at_switch && s.zeta == 0.0)
            continue;
        ASSERT_NEAR(s.zeta, s.t - last_switch, 1e-9) << s.t;
        ASSERT_LE(s.zeta, spec.season(s.season).zeta_m + 1e-9);
    }
}

TEST(Simulator, ScheduleIndependentOfRandomStream)
{
    const auto spec = fixtures::fig1();
    auto switches = [&](std::uint64_t seed) {
        std::vector<double> out;
        for (const auto& e : run(spec, fixtures::state2(0.5, 0.5, 3.0, 0), 1000.0, seed).events)
            if (e.kind == EventKind::season_switch)
                out.push_back(e.time);
        return out;
    };
    const auto a = switches(1);
    EXPECT_EQ(a, switches(2));
    EXPECT_EQ(a, switches(77));
    EXPECT_EQ(a.front(), 4.0);
}

TEST(Simulator, FireCountMatchesIntegratedRate)
{
    const auto spec = fixtures::fig1();
    ErgodicOptions opts;
    opts.observables = {rate_observable(spec, 0), rate_observable(spec, 1)};
    opts.running_curve = false;
    ErgodicAccumulator acc(opts);
    const auto events = simulate(spec, fixtures::state2(0.5, 0.5), 1e4, 4, 0, {}, acc);

    double fires[2] = {0, 0};
    for (const auto& e : events)
        if (e.kind == EventKind::fire)
            fires[e.before.season] += 1;
    const double total_rate = acc.integral(0) + acc.integral(1);
    const double ratio = (fires[0] + fires[1]) / total_rate;
    EXPECT_GT(ratio, 0.9);
    EXPECT_LT(ratio, 1.1);

    // Each season's count within 4 sigma of its compensator.
    for (int i : {0, 1})
        EXPECT_NEAR(fires[i], acc.integral(i), 4 * std::sqrt(acc.integral(i))) << "season " << i;
}

TEST(Simulator, ErrorsCarryTimeAndIndex)
{
    auto spec = fixtures::fig1();
    SimulationOptions opts;
    opts.thinning.rate_bound = 1e-3;
    NullSink sink;
    try {
        simulate(spec, fixtures::state2(0.5, 0.9), 1000.0, 1, 0, opts, sink);
        FAIL();
    } catch (const SimulationError& e) {
        EXPECT_GE(e.time(), 0.0);
        EXPECT_NE(std::string(e.what()).find("exceeds thinning bound"), std::string::npos);
    }
    EXPECT_THROW(run(spec, fixtures::state2(1.5, 0.5), 10.0, 1), Error);
}

TEST(Ensemble, SingletonEqualsRun)
{
    const auto spec = fixtures::fig1();
    const auto x = fixtures::state2(0.5, 0.5);
    const auto ens = run_ensemble(spec, x, 300.0, 1, 8);
    ASSERT_EQ(ens.size(), 1u);
    EXPECT_EQ(ens[0], run(spec, x, 300.0, 8));
}

TEST(Ensemble, ThreadCountInvariant)
{
    const auto spec = fixtures::fig1();
    const auto x = fixtures::state2(0.5, 0.5);
    const auto one = run_ensemble(spec, x, 200.0, 6, 3, {}, 1);
    const auto four = run_ensemble(spec, x, 200.0, 6, 3, {}, 4);
    EXPECT_EQ(one, four);
    EXPECT_NE(one[0].events, one[1].events);
    EXPECT_THROW(run_ensemble(spec, x, 10.0, 0, 1), Error);
}

TEST(Ensemble, NoHiddenCoupling)
{
    // Split-half check: two disjoint halves of the ensemble give means of g
    // at the horizon that differ by an amount consistent with the
    // across-trajectory variance.
    const auto spec = fixtures::fig1();
    SimulationOptions coarse;
    coarse.flow.dt_out = 100.0;
    const auto ens = run_ensemble(spec, fixtures::state2(0.5, 0.5), 1e4, 100, 21, coarse);
    std::vector<double> g;
    for (const auto& t : ens)
        g.push_back(t.samples.back().xi[kG]);
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / 100.0;
    double var = 0;
    for (double v : g)
        var += (v - mean) * (v - mean);
    var /= 99.0;
    const double a = std::accumulate(g.begin(), g.begin() + 50, 0.0) / 50.0;
    const double b = std::accumulate(g.begin() + 50, g.end(), 0.0) / 50.0;
    EXPECT_LT(std::abs(a - b), 4 * std::sqrt(2 * var / 50.0));
    EXPECT_GT(var, 0.0);
}

TEST(Parallel, LowestIndexErrorWins)
{
    try {
        parallel_map(20, 4, [](std::size_t k) -> int {
            if (k == 3 || k == 11)
                throw Error("boom " + std::to_string(k));
            return static_cast<int>(k);
        });
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "boom 3");
    }
}

#pragma once

// The event loop: flow, thinned fires and season switches up to a horizon,
// plus seeded ensembles over independent substreams.

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "events.hpp"
#include "flow.hpp"
#include "kernel.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace pdmp_seasons {

struct SimulationOptions {
    FlowOptions flow;
    ThinningOptions thinning;
};

/// Receives each jump-free piece of a trajectory, in time order.
template <class S>
concept SegmentSink = requires(S& sink, const DenseSegment& seg) { sink.on_segment(seg); };

struct SampleRecord {
    double t = 0.0;
    StateVector xi{};
    double zeta = 0.0;
    int season = 0;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// One realization. Samples from consecutive segments share the event time:
/// the last sample before a jump and the first one after it carry the same t.
struct Trajectory {
    ModelKind kind = ModelKind::basic2d;
    std::string spec_digest;
    std::vector<SampleRecord> samples;
    std::vector<Event> events;
    double horizon = 0.0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Keeps every dense sample.
struct RetainingSink {
    std::vector<SampleRecord>* out;

    void on_segment(const DenseSegment& seg)
    {
        for (const auto& s : seg.samples)
            out->push_back({s.t, s.xi, seg.zeta_at(s.t), seg.season});
    }
};

/// Drops dense samples; useful when only events matter.
struct NullSink {
    void on_segment(const DenseSegment&) {}
};

/// Fans one segment out to several sinks.
template <SegmentSink... Sinks>
struct TeeSink {
    std::tuple<Sinks&...> sinks;

    explicit TeeSink(Sinks&... s) : sinks(s...) {}

    void on_segment(const DenseSegment& seg)
    {
        std::apply([&](auto&... s) { (s.on_segment(seg), ...); }, sinks);
    }
};

/// Runs one realization from `initial` until `horizon`, streaming dense
/// segments into `sink` and returning the jump events. Randomness comes
/// from the substreams (seed, trajectory, purpose).
///
/// Switch times are computed as season_start + zeta_m with season_start
/// advanced by exact sums of season lengths, so the switching schedule never
/// depends on the random stream or on accumulated fire times.
template <SegmentSink Sink>
std::vector<Event> simulate(const ModelSpec& spec, const HybridState& initial, double horizon,
                            std::uint64_t seed, std::uint32_t trajectory,
                            const SimulationOptions& opts, Sink& sink)
{
    RandomStream thinning_rng(seed, trajectory, StreamPurpose::thinning);
    RandomStream loss_rng(seed, trajectory, StreamPurpose::loss);

    if (const auto bad = validate_state(spec, initial); !bad.empty())
        throw Error("invalid initial state: " + bad.front().to_string());

    std::vector<Event> events;
    HybridState state = initial;
    double season_start = -initial.zeta;
    double t = 0.0;

    while (t < horizon) {
        const double limit = horizon - t;
        JumpSample js = [&] {
            try {
                return sample_next_jump(spec, state, thinning_rng, opts.flow, opts.thinning, limit);
            } catch (const Error& e) {
                throw SimulationError(e.what(), t, events.size());
            }
        }();

        const SeasonSpec& season = spec.season(state.season);
        const StateVector xi_pre = js.path.end_state();

        switch (js.jump.kind) {
        case JumpKind::limit: {
            sink.on_segment(js.path.dense_segment(t, horizon, state.zeta, state.season,
                                                  opts.flow.dt_out));
            return events;
        }
        case JumpKind::boundary: {
            const double t_switch = season_start + season.zeta_m;
            sink.on_segment(js.path.dense_segment(t, t_switch, state.zeta, state.season,
                                                  opts.flow.dt_out));
            if (!(t_switch < horizon))
                return events;
            const HybridState boundary{xi_pre, season.zeta_m, state.season};
            const HybridState next = apply_season_switch(spec, boundary);
            events.push_back({t_switch, EventKind::season_switch, {}, boundary, next});
            season_start = t_switch;
            state = next;
            t = t_switch;
            break;
        }
        case JumpKind::fire: {
            const double zeta = state.zeta + js.jump.time;
            const double t_fire = season_start + zeta;
            sink.on_segment(js.path.dense_segment(t, t_fire, state.zeta, state.season,
                                                  opts.flow.dt_out));
            if (!(t_fire < horizon))
                return events;
            const Theta theta = sample_theta(season.loss, loss_rng);
            const HybridState before{xi_pre, zeta, state.season};
            const HybridState after{apply_fire(spec.kind, xi_pre, theta), zeta, state.season};
            events.push_back({t_fire, EventKind::fire, theta, before, after});
            state = after;
            t = t_fire;
            break;
        }
        }
    }
    return events;
}

/// Full realization with every dense sample retained.
inline Trajectory run(const ModelSpec& spec, const HybridState& initial, double horizon,
                      std::uint64_t seed, const SimulationOptions& opts = {},
                      std::uint32_t trajectory = 0)
{
    Trajectory traj;
    traj.kind = spec.kind;
    traj.horizon = horizon;
    traj.spec_digest = spec_digest(spec, initial, seed, trajectory);
    RetainingSink sink{&traj.samples};
    traj.events = simulate(spec, initial, horizon, seed, trajectory, opts, sink);
    return traj;
}

/// Worker count: PDMP_SEASONS_THREADS when set, else the hardware count.
inline unsigned default_thread_count()
{
    if (const char* env = std::getenv("PDMP_SEASONS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(k) for k in [0, n) on up to `threads` workers. Results are
/// stored by index, so the output does not depend on scheduling. If any
/// call throws, remaining work is abandoned and the error of the lowest
/// failing index is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn fn)
    -> std::vector<decltype(fn(std::size_t{}))>
{
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex error_mutex;
    std::size_t error_index = n;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            if (abort.load())
                return;
            const std::size_t k = next.fetch_add(1);
            if (k >= n)
                return;
            try {
                slots[k].emplace(fn(k));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (k < error_index) {
                    error_index = k;
                    error = std::current_exception();
                }
                abort.store(true);
            }
        }
    };

    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
    if (count <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(count);
        for (unsigned i = 0; i < count; ++i)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);

    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

/// Trajectory k runs on substream (base_seed, k).
inline std::vector<Trajectory> run_ensemble(const ModelSpec& spec, const HybridState& initial,
                                            double horizon, std::size_t n_traj,
                                            std::uint64_t base_seed,
                                            const SimulationOptions& opts = {},
                                            unsigned threads = default_thread_count())
{
    if (n_traj < 1)
        throw Error("run_ensemble: n_traj must be >= 1");
    return parallel_map(n_traj, threads, [&](std::size_t k) {
        return run(spec, initial, horizon, base_seed, opts, static_cast<std::uint32_t>(k));
    });
}

} // namespace pdmp_seasons

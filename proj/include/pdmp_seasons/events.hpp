#pragma once

// Next-jump sampling: fire times by thinning a dominating homogeneous
// Poisson clock along the deterministic flow, truncated at the end of the
// season.

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace pdmp_seasons {

/// Remaining time until the current season ends.
inline double hitting_time(const ModelSpec& spec, const HybridState& state)
{
    return spec.season(state.season).zeta_m - state.zeta;
}

enum class JumpKind {
    fire,
    boundary,
    /// Neither a fire nor the boundary before the caller-supplied limit.
    limit,
};

struct NextJump {
    JumpKind kind = JumpKind::boundary;
    /// Local time of the jump: the fire time, t_star, or the limit.
    double time = 0.0;
    double t_star = 0.0;
};

/// Length of flow integrated ahead of the current thinning candidate.
inline constexpr double integration_chunk = 8.0;

struct ThinningOptions {
    /// Overrides the dominating rate; must still bound lambda along the path.
    std::optional<double> rate_bound;
    /// Fires closer than this to the boundary become the boundary jump.
    double boundary_snap = 1e-12;
    std::size_t max_candidates = 100'000'000;
};

struct JumpSample {
    NextJump jump;
    /// Flow from the current state up to the jump time.
    FlowPath path;
    std::size_t candidates = 0;
};

/// Samples the next jump from `state`. Candidates come from a homogeneous
/// Poisson clock with the season's rate bound; a candidate at local time s
/// is accepted with probability lambda(xi(s), zeta + s) / bound, with xi(s)
/// read from the dense output. The search stops at min(t_star, limit).
inline JumpSample sample_next_jump(const ModelSpec& spec, const HybridState& state,
                                   RandomStream& rng, const FlowOptions& flow_opts = {},
                                   const ThinningOptions& opts = {},
                                   double limit = std::numeric_limits<double>::infinity())
{
    const SeasonSpec& season = spec.season(state.season);
    const double t_star = hitting_time(spec, state);
    const bool limited = limit < t_star;
    const double window = limited ? limit : t_star;

    // The flow is integrated lazily, a chunk at a time, so that an early
    // fire in a long season does not pay for the whole season.
    FlowPath path(SeasonDynamics::of(spec, state.season), state.xi);
    auto cover = [&](double t) {
        if (t > path.duration())
            path.extend_to(std::min(window, std::max(t, path.duration() + integration_chunk)), flow_opts);
    };

    const double bound = opts.rate_bound.value_or(season.rate.upper_bound(season.zeta_m));
    std::size_t candidates = 0;
    if (bound > 0.0) {
        double s = 0.0;
        for (;;) {
            s += rng.exponential() / bound;
            if (!(s < window))
                break;
            if (++candidates > opts.max_candidates)
                throw RateBoundViolation("thinning candidate budget exhausted");
            const double u = rng.uniform();
            cover(s);
            const StateVector xi = path.state_at(s);
            const double lambda = season.rate(xi[kW], xi[kG], state.zeta + s);
            if (lambda > bound * (1.0 + 1e-12))
                throw RateBoundViolation("rate " + std::to_string(lambda) +
                                         " exceeds thinning bound " + std::to_string(bound));
            if (u * bound < lambda) {
                if (!limited && t_star - s < opts.boundary_snap)
                    break;
                return {{JumpKind::fire, s, t_star}, path.truncated(s, flow_opts), candidates};
            }
        }
    }
    cover(window);
    if (limited)
        return {{JumpKind::limit, window, t_star}, std::move(path), candidates};
    return {{JumpKind::boundary, t_star, t_star}, std::move(path), candidates};
}

} // namespace pdmp_seasons

#pragma once

// Jumps of the process: fire losses and the season switch.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace pdmp_seasons {

namespace detail {

inline double sample_beta(double alpha, double beta, RandomStream& rng)
{
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    for (;;) {
        const double x = ga(rng);
        const double y = gb(rng);
        const double s = x + y;
        if (!(s > 0.0))
            continue;
        const double v = x / s;
        // Rounding can land on the closed endpoints for extreme shapes.
        if (v > 0.0 && v < 1.0)
            return v;
    }
}

} // namespace detail

/// Draws the burnt fractions for one fire.
inline Theta sample_theta(const LossModel& loss, RandomStream& rng)
{
    return std::visit(
        [&](const auto& m) -> Theta {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, DiracLoss>) {
                return {m.M_w, m.M_g};
            } else if constexpr (std::is_same_v<M, BetaProductLoss>) {
                const double tw = detail::sample_beta(m.alpha_w, m.beta_w, rng);
                const double tg = detail::sample_beta(m.alpha_g, m.beta_g, rng);
                return {tw, tg};
            } else {
                const double tw = m.lo_w + (m.hi_w - m.lo_w) * rng.uniform();
                const double tg = m.lo_g + (m.hi_g - m.lo_g) * rng.uniform();
                return {tw, tg};
            }
        },
        loss);
}

/// S_theta: removes the fractions theta from wood and grass, herbivores untouched.
inline StateVector apply_fire([[maybe_unused]] ModelKind kind, const StateVector& xi,
                              Theta theta) noexcept
{
    StateVector out = xi;
    out[kW] = std::max((1.0 - theta.w) * xi[kW], positivity_floor);
    out[kG] = std::max((1.0 - theta.g) * xi[kG], positivity_floor);
    return out;
}

inline constexpr double boundary_tolerance = 1e-9;

/// Maps the boundary point (xi, zeta_m^i, i) to (xi, 0, 1 - i).
inline HybridState apply_season_switch(const ModelSpec& spec, const HybridState& at_boundary)
{
    const double zeta_m = spec.season(at_boundary.season).zeta_m;
    if (std::abs(at_boundary.zeta - zeta_m) > boundary_tolerance)
        throw NotAtBoundary("season switch requested at zeta=" + std::to_string(at_boundary.zeta) +
                            " but zeta_m=" + std::to_string(zeta_m));
    return {at_boundary.xi, 0.0, 1 - at_boundary.season};
}

} // namespace pdmp_seasons

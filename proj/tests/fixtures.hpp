#pragma once

#include <cmath>

#include <pdmp_seasons/model.hpp>

namespace fixtures {

using namespace pdmp_seasons;

inline SeasonSpec fig1_dry()
{
    return {0.05, 2.5, 7.0, RateFunction{0.01, 0.0, 0.09, 0.0}, DiracLoss{0.35, 0.2}};
}

inline SeasonSpec fig1_wet()
{
    return {0.1, 10.75, 5.0, RateFunction{0.02, 0.0, 0.001, 0.0}, DiracLoss{0.2, 0.05}};
}

inline ModelSpec fig1()
{
    return {ModelKind::basic2d, {fig1_dry(), fig1_wet()}, std::nullopt};
}

/// Intercepts dropped: lambda = lambda_0 g.
inline ModelSpec fig1_proportional()
{
    ModelSpec s = fig1();
    for (auto& season : s.seasons)
        season.rate.c0 = 0.0;
    return s;
}

inline HerbivoreParams fig2_herbivores() { return {0.1, 0.2, 0.1, 0.2}; }

inline ModelSpec fig2(double intercept = 1e-30)
{
    ModelSpec s{ModelKind::herbivore4d, {fig1_dry(), fig1_wet()}, fig2_herbivores()};
    for (auto& season : s.seasons)
        season.rate = RateFunction{intercept, 0.0, 0.0, 0.0};
    return s;
}

inline ModelSpec extinction()
{
    ModelSpec s = fig1();
    for (auto& season : s.seasons) {
        season.r_w = 0.01;
        season.rate = RateFunction{0.0, 0.0, 1.0, 0.0};
        std::get<DiracLoss>(season.loss).M_w = 0.9;
    }
    return s;
}

inline HybridState state2(double w, double g, double zeta = 0.0, int season = 0)
{
    return {{w, g, 0.0, 0.0}, zeta, season};
}

inline HybridState state4(double w, double g, double hG, double hB, double zeta = 0.0, int season = 0)
{
    return {{w, g, hG, hB}, zeta, season};
}

/// w(t) = w0 e^{rt} / (1 + w0 (e^{rt} - 1))
inline double logistic(double w0, double r, double t)
{
    const double e = std::exp(r * t);
    return w0 * e / (1.0 + w0 * (e - 1.0));
}

/// Stationary point of the four-dimensional flow.
inline std::array<double, 4> stationary4(double r_w, double r_g, const HerbivoreParams& h)
{
    const double w = r_w / (r_w + h.c_w);
    const double g = r_g / (r_g + h.c_g) * h.c_w / (r_w + h.c_w);
    return {w, g, g, w};
}

} // namespace fixtures

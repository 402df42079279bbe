#pragma once

// Checks of the survival conditions on the fire regime: the closed-form
// criterion for constant losses and grass-proportional rates, a grid scan of
// the drift inequalities near w = 0 and g = 0, finiteness of the loss
// moments, and evaluation of the Lyapunov functions with their extended
// generator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"

namespace pdmp_seasons {

/// Exponents (a_w, a_g) of the Lyapunov function.
struct Exponents {
    double w = 1.0;
    double g = 1.0;
};

inline constexpr double quadrature_rel_tol = 1e-6;

namespace detail {

/// Integrand of one burnt fraction, called as h(theta, 1 - theta) so that
/// both ends of (0,1) keep full precision.
using FractionIntegrand = std::function<double(double theta, double one_minus_theta)>;

inline double checked(double value, double error, const char* what)
{
    if (!std::isfinite(value) || !std::isfinite(error) ||
        error > quadrature_rel_tol * std::max(std::abs(value), 1e-300))
        throw QuadratureFailure(std::string(what) + ": quadrature did not converge (value " +
                                std::to_string(value) + ", error " + std::to_string(error) + ")");
    return value;
}

/// E[h(theta)] for theta ~ Beta(alpha, beta). The interval is split at 1/2
/// and the upper half integrated in 1 - theta, so endpoint singularities of
/// either kind sit at the origin of a tanh-sinh rule.
inline double expect_beta(double alpha, double beta, const FractionIntegrand& h)
{
    const double log_norm = std::log(boost::math::beta(alpha, beta));
    auto density = [&](double t, double tc) {
        return std::exp((alpha - 1.0) * std::log(t) + (beta - 1.0) * std::log(tc) - log_norm);
    };
    boost::math::quadrature::tanh_sinh<double> rule;
    double total = 0.0;
    double error_total = 0.0;
    try {
        double err = 0.0;
        total += rule.integrate([&](double t) { return h(t, 1.0 - t) * density(t, 1.0 - t); }, 0.0,
                                0.5, std::sqrt(std::numeric_limits<double>::epsilon()), &err);
        error_total += err;
        total += rule.integrate([&](double u) { return h(1.0 - u, u) * density(1.0 - u, u); }, 0.0,
                                0.5, std::sqrt(std::numeric_limits<double>::epsilon()), &err);
        error_total += err;
    } catch (const std::exception& e) {
        throw QuadratureFailure(std::string("beta expectation: ") + e.what());
    }
    return checked(total, error_total, "beta expectation");
}

inline double expect_uniform(double lo, double hi, const FractionIntegrand& h)
{
    if (hi <= lo)
        return h(lo, 1.0 - lo);
    double err = 0.0;
    double value = 0.0;
    try {
        const double width = hi - lo;
        value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double u) {
                const double t = lo + width * u;
                return h(t, (1.0 - lo) - width * u);
            },
            0.0, 1.0, 15, 1e-12, &err);
    } catch (const std::exception& e) {
        throw QuadratureFailure(std::string("uniform expectation: ") + e.what());
    }
    return checked(value, err, "uniform expectation");
}

} // namespace detail

/// E[h(theta_w)] under the season's loss model. Closed form for Dirac.
inline double expect_theta_w(const LossModel& loss, const detail::FractionIntegrand& h)
{
    if (const auto* d = std::get_if<DiracLoss>(&loss))
        return h(d->M_w, 1.0 - d->M_w);
    if (const auto* b = std::get_if<BetaProductLoss>(&loss))
        return detail::expect_beta(b->alpha_w, b->beta_w, h);
    const auto& u = std::get<UniformRectLoss>(loss);
    return detail::expect_uniform(u.lo_w, u.hi_w, h);
}

inline double expect_theta_g(const LossModel& loss, const detail::FractionIntegrand& h)
{
    if (const auto* d = std::get_if<DiracLoss>(&loss))
        return h(d->M_g, 1.0 - d->M_g);
    if (const auto* b = std::get_if<BetaProductLoss>(&loss))
        return detail::expect_beta(b->alpha_g, b->beta_g, h);
    const auto& u = std::get<UniformRectLoss>(loss);
    return detail::expect_uniform(u.lo_g, u.hi_g, h);
}

/// The loss moments entering the drift inequalities.
struct LossMoments {
    /// E[(1 - theta_w)^(-a)]
    static double wood_power(const LossModel& loss, double a)
    {
        return expect_theta_w(loss, [a](double, double tc) { return std::pow(tc, -a); });
    }

    /// E[(1 - theta_g)^(-a)]
    static double grass_power(const LossModel& loss, double a)
    {
        return expect_theta_g(loss, [a](double, double tc) { return std::pow(tc, -a); });
    }

    /// E[ln((1 - w) / (1 - (1 - theta_w) w))], the change of ln(1 - w) in a fire.
    static double wood_log_ratio(const LossModel& loss, double w)
    {
        const double l1w = std::log1p(-w);
        return expect_theta_w(loss, [w, l1w](double t, double) { return l1w - std::log1p(-w + t * w); });
    }

    /// E[-ln(1 - (1 - theta_w) w)]
    static double wood_log(const LossModel& loss, double w)
    {
        return expect_theta_w(loss, [w](double t, double) { return -std::log1p(-w + t * w); });
    }
};

// ---------------------------------------------------------------------------
// Closed-form criterion

struct CorollaryResult {
    bool applicable = false;
    /// r_w + lambda_0 ln(1 - M_w) per season; meaningful only when applicable.
    std::array<double, 2> margins{};

    bool holds() const noexcept { return applicable && margins[0] > 0.0 && margins[1] > 0.0; }
};

/// Applies only to constant losses with lambda = lambda_0 * g in both seasons.
inline CorollaryResult corollary_check(const ModelSpec& spec)
{
    CorollaryResult r;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& s = spec.seasons[i];
        const auto* d = std::get_if<DiracLoss>(&s.loss);
        if (!d || !s.rate.is_proportional_to_grass())
            return {};
        r.margins[i] = s.r_w + s.rate.c_g * std::log1p(-d->M_w);
    }
    r.applicable = true;
    return r;
}

// ---------------------------------------------------------------------------
// Grid scan

struct ScanGrid {
    std::size_t n_exponents = 100;
    double exponent_min = 1e-6;
    /// Log-spaced "neighbourhood of zero" for w (first inequality) and g
    /// (second inequality).
    std::size_t n_small = 25;
    double small_lo = 1e-6;
    double small_hi = 1e-2;
    /// Grid on the free biomass coordinate.
    std::size_t n_free = 25;
    /// Extra log-spaced points 1 - delta, delta in [near_one_lo, near_one_hi],
    /// for w in the second inequality.
    std::size_t n_near_one = 10;
    double near_one_lo = 1e-6;
    double near_one_hi = 1e-2;
    std::size_t n_zeta = 10;
};

inline std::vector<double> logspace(double lo, double hi, std::size_t n)
{
    std::vector<double> v;
    if (n == 1)
        return {hi};
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t k = 0; k < n; ++k)
        v.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1)));
    return v;
}

enum class Verdict { holds_with_witness, fails_on_grid, inapplicable };

inline const char* to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::holds_with_witness:
        return "HoldsWithWitness";
    case Verdict::fails_on_grid:
        return "FailsOnGrid";
    default:
        return "Inapplicable";
    }
}

struct ConditionReport {
    CorollaryResult corollary;
    /// Best exponents found; unset when no scanned exponent had convergent moments.
    std::optional<double> a_w;
    std::optional<double> a_g;
    /// Achieved worst-case margins; positive means the inequality holds on the grid.
    double eps_w = -std::numeric_limits<double>::infinity();
    double eps_g = -std::numeric_limits<double>::infinity();
    std::array<bool, 2> a4_finite{false, false};
    /// Exponents skipped because a loss moment diverged.
    std::size_t skipped_exponents = 0;
    Verdict verdict = Verdict::inapplicable;
    ScanGrid grid;
};

namespace detail {

struct ScanAxes {
    std::vector<double> exponents;
    std::vector<double> small;
    std::vector<double> free_g;  // (0, 1]
    std::vector<double> free_w;  // (0, 1), dense near both ends
    std::array<std::vector<double>, 2> zeta;
};

inline ScanAxes make_axes(const ModelSpec& spec, const ScanGrid& grid)
{
    ScanAxes ax;
    ax.exponents = logspace(grid.exponent_min, 1.0, grid.n_exponents);
    ax.small = logspace(grid.small_lo, grid.small_hi, grid.n_small);
    for (std::size_t k = 1; k <= grid.n_free; ++k)
        ax.free_g.push_back(static_cast<double>(k) / static_cast<double>(grid.n_free));
    for (std::size_t k = 1; k <= grid.n_free; ++k)
        ax.free_w.push_back(static_cast<double>(k) / static_cast<double>(grid.n_free + 1));
    for (double d : logspace(grid.near_one_lo, grid.near_one_hi, grid.n_near_one))
        ax.free_w.push_back(1.0 - d);
    for (double d : ax.small)
        ax.free_w.push_back(d);
    std::sort(ax.free_w.begin(), ax.free_w.end());
    for (std::size_t i = 0; i < 2; ++i) {
        const double zm = spec.seasons[i].zeta_m;
        for (std::size_t k = 0; k < grid.n_zeta; ++k)
            ax.zeta[i].push_back(zm * static_cast<double>(k) / static_cast<double>(grid.n_zeta));
    }
    return ax;
}

} // namespace detail

/// Left side of the wood inequality at one point:
/// lambda * (E[(1-theta_w)^-a] - 1) - a r_w.
inline double wood_drift_margin(const SeasonSpec& s, double wood_moment, double a, double w, double g,
                                double zeta)
{
    return s.rate(w, g, zeta) * (wood_moment - 1.0) - a * s.r_w;
}

/// Left side of the grass inequality at one point:
/// lambda * (E[(1-theta_g)^-a] - 1 + g^a E[ln((1-w)/(1-(1-theta_w)w))]) - a r_g (1 - w).
inline double grass_drift_margin(const SeasonSpec& s, double grass_moment, double log_ratio, double a,
                                 double w, double g, double zeta)
{
    return s.rate(w, g, zeta) * (grass_moment - 1.0 + std::pow(g, a) * log_ratio) -
           a * s.r_g * (1.0 - w);
}

/// Scans exponents and reports the pair with the largest worst-case margins.
/// Exponents at which a loss moment diverges are skipped; QuadratureFailure
/// is raised only if every exponent of one coordinate had to be skipped.
inline ConditionReport scan_a3(const ModelSpec& spec, const ScanGrid& grid = {})
{
    ConditionReport rep;
    rep.grid = grid;
    rep.corollary = corollary_check(spec);
    const auto ax = detail::make_axes(spec, grid);

    // The cross-term moment depends on w only; compute it once per season.
    std::array<std::vector<double>, 2> log_ratio;
    for (std::size_t i = 0; i < 2; ++i)
        for (double w : ax.free_w)
            log_ratio[i].push_back(LossMoments::wood_log_ratio(spec.seasons[i].loss, w));

    bool any_w = false;
    bool any_g = false;
    std::string last_failure;
    for (double a : ax.exponents) {
        // Wood inequality: w near 0, g over (0,1], zeta over the season.
        try {
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < 2; ++i) {
                const auto& s = spec.seasons[i];
                const double m = LossMoments::wood_power(s.loss, a);
                for (double w : ax.small)
                    for (double g : ax.free_g)
                        for (double z : ax.zeta[i])
                            worst = std::max(worst, wood_drift_margin(s, m, a, w, g, z));
            }
            any_w = true;
            if (-worst > rep.eps_w) {
                rep.eps_w = -worst;
                rep.a_w = a;
            }
        } catch (const QuadratureFailure& e) {
            ++rep.skipped_exponents;
            last_failure = e.what();
        }

        // Grass inequality: g near 0, w over (0,1), zeta over the season.
        try {
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < 2; ++i) {
                const auto& s = spec.seasons[i];
                const double m = LossMoments::grass_power(s.loss, a);
                for (std::size_t wi = 0; wi < ax.free_w.size(); ++wi)
                    for (double g : ax.small)
                        for (double z : ax.zeta[i])
                            worst = std::max(worst, grass_drift_margin(s, m, log_ratio[i][wi], a,
                                                                       ax.free_w[wi], g, z));
            }
            any_g = true;
            if (-worst > rep.eps_g) {
                rep.eps_g = -worst;
                rep.a_g = a;
            }
        } catch (const QuadratureFailure& e) {
            ++rep.skipped_exponents;
            last_failure = e.what();
        }
    }
    if (!any_w || !any_g)
        throw QuadratureFailure("no scanned exponent has convergent loss moments: " + last_failure);

    bool a4 = true;
    if (rep.a_w && rep.a_g) {
        rep.a4_finite = [&] {
            std::array<bool, 2> out{};
            for (std::size_t i = 0; i < 2; ++i) {
                out[i] = true;
                try {
                    (void)LossMoments::wood_power(spec.seasons[i].loss, *rep.a_w);
                    (void)LossMoments::grass_power(spec.seasons[i].loss, *rep.a_g);
                    for (double w : ax.free_w)
                        (void)LossMoments::wood_log(spec.seasons[i].loss, w);
                } catch (const QuadratureFailure&) {
                    out[i] = false;
                }
            }
            return out;
        }();
        a4 = rep.a4_finite[0] && rep.a4_finite[1];
    }
    rep.verdict = (rep.eps_w > 0.0 && rep.eps_g > 0.0 && a4) ? Verdict::holds_with_witness
                                                              : Verdict::fails_on_grid;
    return rep;
}

/// Finiteness of the loss moments at exponents a, per season, at a set of
/// representative w values.
inline std::array<bool, 2> a4_check(const ModelSpec& spec, Exponents a,
                                    const std::vector<double>& w_points = {1e-6, 0.01, 0.25, 0.5,
                                                                           0.75, 0.99, 1 - 1e-6})
{
    std::array<bool, 2> out{};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& loss = spec.seasons[i].loss;
        if (std::holds_alternative<DiracLoss>(loss)) {
            out[i] = true;
            continue;
        }
        try {
            bool finite = std::isfinite(LossMoments::wood_power(loss, a.w)) &&
                          std::isfinite(LossMoments::grass_power(loss, a.g));
            for (double w : w_points)
                finite = finite && std::isfinite(LossMoments::wood_log(loss, w));
            out[i] = finite;
        } catch (const QuadratureFailure&) {
            out[i] = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lyapunov function and extended generator

struct LyapunovValue {
    double V = 0.0;
    /// Extended generator: drift + jump.
    double LV = 0.0;
    /// b . grad_xi V + dV/dzeta
    double drift = 0.0;
    /// lambda * E[V(S_theta xi) - V(xi)]
    double jump = 0.0;
};

/// V = w^-a_w + g^-a_g - ln(1-w) + zeta sqrt(zeta_m - zeta), plus
/// 1/h + ln(1+h) for each herbivore in the four-dimensional model.
inline double lyapunov_value(const ModelSpec& spec, const HybridState& x, Exponents a)
{
    const double w = x.xi[kW];
    const double g = x.xi[kG];
    const double zm = spec.season(x.season).zeta_m;
    double v = std::pow(w, -a.w) + std::pow(g, -a.g) - std::log1p(-w) +
               x.zeta * std::sqrt(zm - x.zeta);
    if (spec.kind == ModelKind::herbivore4d) {
        for (std::size_t j : {std::size_t{kHG}, std::size_t{kHB}}) {
            const double h = x.xi[j];
            v += 1.0 / h + std::log1p(h);
        }
    }
    return v;
}

inline LyapunovValue lyapunov_eval(const ModelSpec& spec, const HybridState& x, Exponents a)
{
    const double w = x.xi[kW];
    const double g = x.xi[kG];
    const auto& season = spec.season(x.season);
    const double zm = season.zeta_m;

    LyapunovValue out;
    out.V = lyapunov_value(spec, x, a);

    StateVector grad{};
    grad[kW] = -a.w * std::pow(w, -a.w - 1.0) + 1.0 / (1.0 - w);
    grad[kG] = -a.g * std::pow(g, -a.g - 1.0);
    if (spec.kind == ModelKind::herbivore4d) {
        for (std::size_t j : {std::size_t{kHG}, std::size_t{kHB}}) {
            const double h = x.xi[j];
            grad[j] = -1.0 / (h * h) + 1.0 / (1.0 + h);
        }
    }
    const StateVector b = vector_field(spec, x.season, x.xi);
    double drift = 0.0;
    for (std::size_t j = 0; j < dimension(spec.kind); ++j)
        drift += b[j] * grad[j];
    const double root = std::sqrt(zm - x.zeta);
    drift += root - x.zeta / (2.0 * root);
    out.drift = drift;

    const double jump_mean = std::pow(w, -a.w) * (LossMoments::wood_power(season.loss, a.w) - 1.0) +
                             std::pow(g, -a.g) * (LossMoments::grass_power(season.loss, a.g) - 1.0) +
                             LossMoments::wood_log_ratio(season.loss, w);
    out.jump = season.rate(w, g, x.zeta) * jump_mean;
    out.LV = out.drift + out.jump;
    return out;
}

// ---------------------------------------------------------------------------
// Export

inline Json condition_report_to_json(const ConditionReport& r)
{
    Json j;
    if (r.corollary.applicable) {
        j["corollary"] = {{"applicable", true},
                          {"margins", {r.corollary.margins[0], r.corollary.margins[1]}},
                          {"holds", r.corollary.holds()}};
    } else {
        j["corollary"] = {{"applicable", false}, {"verdict", "Inapplicable"}};
    }
    j["a_w"] = r.a_w ? Json(*r.a_w) : Json(nullptr);
    j["a_g"] = r.a_g ? Json(*r.a_g) : Json(nullptr);
    j["eps_w"] = std::isfinite(r.eps_w) ? Json(r.eps_w) : Json(nullptr);
    j["eps_g"] = std::isfinite(r.eps_g) ? Json(r.eps_g) : Json(nullptr);
    j["a4_finite"] = {r.a4_finite[0], r.a4_finite[1]};
    j["skipped_exponents"] = r.skipped_exponents;
    j["verdict"] = to_string(r.verdict);
    j["grid"] = {{"n_exponents", r.grid.n_exponents},
                 {"exponent_range", {r.grid.exponent_min, 1.0}},
                 {"n_small", r.grid.n_small},
                 {"small_range", {r.grid.small_lo, r.grid.small_hi}},
                 {"n_free", r.grid.n_free},
                 {"n_near_one", r.grid.n_near_one},
                 {"near_one_range", {r.grid.near_one_lo, r.grid.near_one_hi}},
                 {"n_zeta", r.grid.n_zeta}};
    return j;
}

} // namespace pdmp_seasons

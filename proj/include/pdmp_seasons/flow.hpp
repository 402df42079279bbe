#pragma once

// Deterministic evolution between jumps: the seasonal vector field, an
// adaptive Dormand-Prince 5(4) integrator and cubic Hermite dense output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace pdmp_seasons {

struct FlowOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    double dt_out = 0.01;
    double min_step = 1e-12;
    double max_step = 1.0;
    double bounds_slack = 1e-12;
    std::size_t max_steps = 50'000'000;
};

/// Right-hand side parameters for one season.
struct SeasonDynamics {
    ModelKind kind = ModelKind::basic2d;
    double r_w = 0.0;
    double r_g = 0.0;
    HerbivoreParams herbivores;

    static SeasonDynamics of(const ModelSpec& spec, int season)
    {
        const auto& s = spec.season(season);
        return {spec.kind, s.r_w, s.r_g, spec.herbivores.value_or(HerbivoreParams{})};
    }
};

inline StateVector vector_field(const SeasonDynamics& dyn, const StateVector& xi) noexcept
{
    const double w = xi[kW];
    const double g = xi[kG];
    StateVector d{};
    d[kW] = dyn.r_w * w * (1.0 - w);
    d[kG] = dyn.r_g * g * (1.0 - g - w);
    if (dyn.kind == ModelKind::herbivore4d) {
        const double hg = xi[kHG];
        const double hb = xi[kHB];
        const auto& h = dyn.herbivores;
        d[kW] -= h.c_w * hb * w;
        d[kG] -= h.c_g * hg * g;
        d[kHG] = h.e_g * hg * (g - hg);
        d[kHB] = h.e_w * hb * (w - hb);
    }
    return d;
}

inline StateVector vector_field(const ModelSpec& spec, int season, const StateVector& xi) noexcept
{
    return vector_field(SeasonDynamics::of(spec, season), xi);
}

struct DenseSample {
    double t = 0.0;
    StateVector xi{};
};

/// Samples of one jump-free piece of a trajectory on the absolute grid
/// k * dt_out, plus both endpoints.
struct DenseSegment {
    double t0 = 0.0;
    double t1 = 0.0;
    double zeta0 = 0.0;
    int season = 0;
    std::vector<DenseSample> samples;

    double zeta_at(double t) const noexcept { return zeta0 + (t - t0); }
};

namespace detail {

inline bool violates_box(ModelKind kind, const StateVector& y, double slack) noexcept
{
    if (!(y[kW] >= -slack && y[kW] <= 1.0 + slack))
        return true;
    if (!(y[kG] >= -slack && y[kG] <= 1.0 + slack))
        return true;
    if (kind == ModelKind::herbivore4d) {
        if (!(y[kHG] >= -slack && std::isfinite(y[kHG])))
            return true;
        if (!(y[kHB] >= -slack && std::isfinite(y[kHB])))
            return true;
    }
    return false;
}

/// Pulls a point that is inside the box up to rounding back to its interior.
inline StateVector project_into_box(ModelKind kind, StateVector y) noexcept
{
    y[kW] = std::clamp(y[kW], positivity_floor, below_one);
    y[kG] = std::clamp(y[kG], positivity_floor, 1.0);
    if (kind == ModelKind::herbivore4d) {
        y[kHG] = std::max(y[kHG], positivity_floor);
        y[kHB] = std::max(y[kHB], positivity_floor);
    }
    return y;
}

} // namespace detail

/// One accepted step, enough to rebuild the cubic Hermite interpolant.
struct HermiteStep {
    double t0 = 0.0;
    double t1 = 0.0;
    StateVector y0{};
    StateVector y1{};
    StateVector f0{};
    StateVector f1{};

    StateVector at(double t) const noexcept
    {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        StateVector y{};
        for (std::size_t j = 0; j < y.size(); ++j)
            y[j] = h00 * y0[j] + h10 * h * f0[j] + h01 * y1[j] + h11 * h * f1[j];
        return y;
    }
};

class FlowPath;
inline FlowPath integrate(const SeasonDynamics& dyn, const StateVector& xi0, double duration,
                          const FlowOptions& opts = {});

/// Solution of the season ODE on [0, duration] in local time.
class FlowPath {
public:
    FlowPath(SeasonDynamics dyn, StateVector start)
        : dyn_(dyn), start_(start)
    {
    }

    const SeasonDynamics& dynamics() const noexcept { return dyn_; }
    double duration() const noexcept { return steps_.empty() ? 0.0 : steps_.back().t1; }
    const std::vector<HermiteStep>& steps() const noexcept { return steps_; }
    const StateVector& start_state() const noexcept { return start_; }
    const StateVector& end_state() const noexcept
    {
        return steps_.empty() ? start_ : steps_.back().y1;
    }

    /// Interpolated state at local time t, clamped to [0, duration].
    StateVector state_at(double t) const noexcept
    {
        if (steps_.empty() || t <= 0.0)
            return start_;
        if (t >= steps_.back().t1)
            return steps_.back().y1;
        const auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                                         [](double v, const HermiteStep& s) { return v < s.t1; });
        return detail::project_into_box(dyn_.kind, it->at(t));
    }

    /// Continues the integration from the current end until local time t.
    void extend_to(double t, const FlowOptions& opts)
    {
        const double t0 = duration();
        if (!(t > t0))
            return;
        FlowPath tail = integrate(dyn_, end_state(), t - t0, opts);
        for (auto step : tail.steps_) {
            step.t0 += t0;
            step.t1 += t0;
            steps_.push_back(step);
        }
        if (!steps_.empty())
            steps_.back().t1 = t;
    }

    /// The same flow stopped at local time t <= duration(). Steps ending
    /// before t are kept; the step containing t is redone so that the end
    /// state is integrator-accurate rather than interpolated.
    FlowPath truncated(double t, const FlowOptions& opts) const
    {
        FlowPath out(dyn_, start_);
        for (const auto& s : steps_) {
            if (s.t1 <= t) {
                out.steps_.push_back(s);
                continue;
            }
            if (t > s.t0) {
                FlowPath tail = integrate(dyn_, s.y0, t - s.t0, opts);
                for (auto step : tail.steps_) {
                    step.t0 += s.t0;
                    step.t1 += s.t0;
                    out.steps_.push_back(step);
                }
                if (!out.steps_.empty())
                    out.steps_.back().t1 = t;
            }
            break;
        }
        return out;
    }

    /// Samples on the absolute grid k * dt_out strictly between t_abs0 and
    /// t_abs1, plus both endpoints. t_abs1 - t_abs0 equals duration() up to
    /// rounding; it is passed explicitly so that segment ends line up
    /// exactly with event times.
    DenseSegment dense_segment(double t_abs0, double t_abs1, double zeta0, int season,
                               double dt_out) const
    {
        DenseSegment seg{t_abs0, t_abs1, zeta0, season, {}};
        seg.samples.push_back({t_abs0, start_});
        if (t_abs1 > t_abs0) {
            const double guard = 1e-9 * dt_out;
            auto k = static_cast<long long>(std::floor(t_abs0 / dt_out)) + 1;
            for (;; ++k) {
                const double t = static_cast<double>(k) * dt_out;
                if (t >= t_abs1 - guard)
                    break;
                if (t <= t_abs0 + guard)
                    continue;
                seg.samples.push_back({t, state_at(t - t_abs0)});
            }
            seg.samples.push_back({t_abs1, end_state()});
        }
        return seg;
    }

private:
    friend FlowPath integrate(const SeasonDynamics&, const StateVector&, double,
                              const FlowOptions&);

    SeasonDynamics dyn_;
    StateVector start_;
    std::vector<HermiteStep> steps_;
};

/// Adaptive Dormand-Prince 5(4) from xi0 over [0, duration]. Steps whose
/// end point leaves the state box by more than the slack are rejected and
/// halved.
inline FlowPath integrate(const SeasonDynamics& dyn, const StateVector& xi0, double duration,
                          const FlowOptions& opts)
{
    FlowPath path(dyn, xi0);
    if (!(duration > 0.0))
        return path;

    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::size_t n = dimension(dyn.kind);
    auto f = [&](const StateVector& y) { return vector_field(dyn, y); };

    StateVector y = xi0;
    StateVector fy = f(y);
    double t = 0.0;

    double h;
    {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double sc = opts.abs_tol + opts.rel_tol * std::abs(y[j]);
            d0 = std::max(d0, std::abs(y[j]) / sc);
            d1 = std::max(d1, std::abs(fy[j]) / sc);
        }
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-3 : 0.01 * d0 / d1;
        h = std::clamp(h, 1e-6, opts.max_step);
    }

    std::size_t steps = 0;
    StateVector k2, k3, k4, k5, k6, k7, tmp, y1;
    while (t < duration) {
        if (++steps > opts.max_steps)
            throw StepFailure("step budget exhausted at local t=" + std::to_string(t));

        bool last = false;
        if (t + h >= duration) {
            h = duration - t;
            last = true;
        }

        for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * a21 * fy[j];
        k2 = f(tmp);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * (a31 * fy[j] + a32 * k2[j]);
        k3 = f(tmp);
        for (std::size_t j = 0; j < n; ++j)
            tmp[j] = y[j] + h * (a41 * fy[j] + a42 * k2[j] + a43 * k3[j]);
        k4 = f(tmp);
        for (std::size_t j = 0; j < n; ++j)
            tmp[j] = y[j] + h * (a51 * fy[j] + a52 * k2[j] + a53 * k3[j] + a54 * k4[j]);
        k5 = f(tmp);
        for (std::size_t j = 0; j < n; ++j)
            tmp[j] = y[j] + h * (a61 * fy[j] + a62 * k2[j] + a63 * k3[j] + a64 * k4[j] + a65 * k5[j]);
        k6 = f(tmp);
        y1 = y;
        for (std::size_t j = 0; j < n; ++j)
            y1[j] = y[j] + h * (a71 * fy[j] + a73 * k3[j] + a74 * k4[j] + a75 * k5[j] + a76 * k6[j]);
        k7 = f(y1);

        double err = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double e = h * (e1 * fy[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] + e6 * k6[j] +
                                  e7 * k7[j]);
            const double sc =
                opts.abs_tol + opts.rel_tol * std::max(std::abs(y[j]), std::abs(y1[j]));
            err = std::max(err, std::abs(e) / sc);
        }

        if (!std::isfinite(err) || err > 1.0) {
            const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.5;
            h *= factor;
            if (h < opts.min_step)
                throw StepFailure("cannot meet tolerance above minimum step at local t=" +
                                  std::to_string(t));
            continue;
        }

        if (detail::violates_box(dyn.kind, y1, opts.bounds_slack)) {
            h *= 0.5;
            if (h < opts.min_step)
                throw BoundsViolation("converged step leaves the state box at local t=" +
                                      std::to_string(t));
            continue;
        }

        const StateVector projected = detail::project_into_box(dyn.kind, y1);
        if (projected != y1)
            k7 = f(projected);

        const double t1 = last ? duration : t + h;
        path.steps_.push_back({t, t1, y, projected, fy, k7});
        t = t1;
        y = projected;
        fy = k7;
        if (last)
            break;

        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(h * factor, opts.max_step);
    }
    return path;
}

struct AdvanceResult {
    StateVector xi_end{};
    DenseSegment segment;
};

/// Flows xi for `duration` time units in the given season. The returned
/// segment is placed at absolute time t_abs0 with clock value zeta0.
inline AdvanceResult advance(const ModelSpec& spec, int season, const StateVector& xi,
                             double duration, const FlowOptions& opts = {}, double t_abs0 = 0.0,
                             double zeta0 = 0.0)
{
    const FlowPath path = integrate(SeasonDynamics::of(spec, season), xi, duration, opts);
    return {path.end_state(),
            path.dense_segment(t_abs0, t_abs0 + duration, zeta0, season, opts.dt_out)};
}

} // namespace pdmp_seasons

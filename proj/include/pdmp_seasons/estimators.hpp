#pragma once

// Empirical long-run analysis of trajectories: Cesaro time averages of
// observables, running averages on a log grid, sojourn-time occupancy
// histograms and averages along the chain observed at unit-rate Poisson
// times. Everything is computed by a segment sink, so the same code runs
// streamed during simulation or replayed over a stored Trajectory.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace pdmp_seasons {

struct Observable {
    std::string name;
    std::function<double(const StateVector& xi, double zeta, int season)> eval;
    bool bounded = true;
};

/// Indicator of w in [w_lo, w_hi) and g in [g_lo, g_hi).
inline Observable rect_indicator(double w_lo, double w_hi, double g_lo, double g_hi)
{
    return {"rect(" + format_double(w_lo) + "," + format_double(w_hi) + "," + format_double(g_lo) +
                "," + format_double(g_hi) + ")",
            [=](const StateVector& xi, double, int) {
                return (xi[kW] >= w_lo && xi[kW] < w_hi && xi[kG] >= g_lo && xi[kG] < g_hi) ? 1.0
                                                                                            : 0.0;
            },
            true};
}

/// Built-in observables by name: one, w, g, h_G, h_B, season0, season1,
/// and rect(w_lo,w_hi,g_lo,g_hi); the rect arguments may also be separated
/// by ';'.
inline Observable builtin_observable(const std::string& name)
{
    auto coord = [&](std::size_t j) {
        return Observable{name, [j](const StateVector& xi, double, int) { return xi[j]; },
                          j < 2};
    };
    if (name == "one")
        return {name, [](const StateVector&, double, int) { return 1.0; }, true};
    if (name == "w")
        return coord(kW);
    if (name == "g")
        return coord(kG);
    if (name == "h_G")
        return coord(kHG);
    if (name == "h_B")
        return coord(kHB);
    if (name == "season0" || name == "season1") {
        const int which = name.back() - '0';
        return {name, [which](const StateVector&, double, int i) { return i == which ? 1.0 : 0.0; },
                true};
    }
    if (name.rfind("rect(", 0) == 0 && name.back() == ')') {
        double v[4];
        std::string args = name;
        std::replace(args.begin(), args.end(), ';', ',');
        if (std::sscanf(args.c_str(), "rect(%lf,%lf,%lf,%lf)", &v[0], &v[1], &v[2], &v[3]) == 4) {
            Observable o = rect_indicator(v[0], v[1], v[2], v[3]);
            o.name = name;
            return o;
        }
    }
    throw ConfigError("unknown observable: " + name);
}

/// lambda^i(w, g, zeta) along the trajectory, optionally restricted to one season.
inline Observable rate_observable(const ModelSpec& spec, std::optional<int> only_season = {})
{
    return {only_season ? "lambda" + std::to_string(*only_season) : "lambda",
            [spec, only_season](const StateVector& xi, double zeta, int i) {
                if (only_season && i != *only_season)
                    return 0.0;
                return spec.season(i).rate(xi[kW], xi[kG], zeta);
            },
            true};
}

struct OccupancyGrid {
    std::size_t w_bins = 50;
    std::size_t g_bins = 50;
};

/// Sojourn time per (w, g) bin and season; bins partition [0,1]^2 with the
/// last row and column closed on the right.
struct Occupancy {
    OccupancyGrid grid;
    std::array<std::vector<double>, 2> time;

    std::size_t bin_index(const StateVector& xi) const noexcept
    {
        auto idx = [](double v, std::size_t n) {
            const auto k = static_cast<long long>(std::floor(v * static_cast<double>(n)));
            return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(n) - 1));
        };
        return idx(xi[kW], grid.w_bins) * grid.g_bins + idx(xi[kG], grid.g_bins);
    }

    double season_total(int season) const
    {
        double s = 0.0;
        for (double v : time[static_cast<std::size_t>(season)])
            s += v;
        return s;
    }
};

struct ErgodicReport {
    double horizon = 0.0;
    std::map<std::string, double> averages;
    std::map<std::string, std::vector<std::pair<double, double>>> running_curve;
    std::optional<Occupancy> occupancy;
    std::map<std::string, double> rchain_averages;
    std::size_t n_rchain = 0;
};

struct ErgodicOptions {
    std::vector<Observable> observables;
    /// No histogram when unset.
    std::optional<OccupancyGrid> bins;
    bool running_curve = true;
    double curve_start = 1.0;
    int points_per_decade = 50;
};

/// Segment sink accumulating every estimator at once.
class ErgodicAccumulator {
public:
    explicit ErgodicAccumulator(ErgodicOptions opts, std::optional<RandomStream> rchain_rng = {})
        : opts_(std::move(opts)),
          integrals_(opts_.observables.size(), 0.0),
          rchain_sums_(opts_.observables.size(), 0.0),
          curves_(opts_.observables.size()),
          rchain_rng_(std::move(rchain_rng)),
          fa_(opts_.observables.size()),
          fb_(opts_.observables.size())
    {
        if (opts_.bins) {
            occupancy_.emplace();
            occupancy_->grid = *opts_.bins;
            for (auto& v : occupancy_->time)
                v.assign(opts_.bins->w_bins * opts_.bins->g_bins, 0.0);
        }
        next_curve_ = opts_.curve_start;
        if (rchain_rng_)
            next_tau_ = rchain_rng_->exponential();
    }

    void on_segment(const DenseSegment& seg)
    {
        const auto& s = seg.samples;
        if (s.empty())
            return;
        const std::size_t m = opts_.observables.size();
        eval_all(s[0].xi, seg.zeta_at(s[0].t), seg.season, fa_);
        for (std::size_t k = 1; k < s.size(); ++k) {
            const double ta = s[k - 1].t;
            const double tb = s[k].t;
            const double zb = seg.zeta_at(tb);
            eval_all(s[k].xi, zb, seg.season, fb_);
            const double dt = tb - ta;
            if (dt > 0.0) {
                if (opts_.running_curve)
                    record_curve(ta, tb, dt);
                if (rchain_rng_)
                    sample_rchain(seg, s[k - 1], s[k]);
                for (std::size_t j = 0; j < m; ++j)
                    integrals_[j] += 0.5 * dt * (fa_[j] + fb_[j]);
                if (occupancy_) {
                    auto& bins = occupancy_->time[static_cast<std::size_t>(seg.season)];
                    bins[occupancy_->bin_index(s[k - 1].xi)] += 0.5 * dt;
                    bins[occupancy_->bin_index(s[k].xi)] += 0.5 * dt;
                }
                elapsed_ += dt;
            }
            std::swap(fa_, fb_);
        }
    }

    double elapsed() const noexcept { return elapsed_; }

    /// Cesaro average of observable j over the time covered so far.
    double average(std::size_t j) const
    {
        return elapsed_ > 0.0 ? integrals_.at(j) / elapsed_ : 0.0;
    }

    double integral(std::size_t j) const { return integrals_.at(j); }

    std::size_t rchain_count() const noexcept { return n_rchain_; }
    double rchain_mean(std::size_t j) const
    {
        if (n_rchain_ == 0)
            throw EmptyChain("no Poisson observation time fell inside the trajectory");
        return rchain_sums_.at(j) / static_cast<double>(n_rchain_);
    }

    const std::optional<Occupancy>& occupancy() const noexcept { return occupancy_; }

    /// Pools another accumulator over disjoint time into this one. Running
    /// curves are per-trajectory and are dropped.
    void merge(const ErgodicAccumulator& other)
    {
        for (std::size_t j = 0; j < integrals_.size(); ++j) {
            integrals_[j] += other.integrals_.at(j);
            rchain_sums_[j] += other.rchain_sums_.at(j);
        }
        elapsed_ += other.elapsed_;
        n_rchain_ += other.n_rchain_;
        if (occupancy_ && other.occupancy_) {
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t b = 0; b < occupancy_->time[i].size(); ++b)
                    occupancy_->time[i][b] += other.occupancy_->time[i][b];
        }
        for (auto& c : curves_)
            c.clear();
    }

    ErgodicReport report(double horizon) const
    {
        ErgodicReport r;
        r.horizon = horizon;
        for (std::size_t j = 0; j < opts_.observables.size(); ++j) {
            const auto& name = opts_.observables[j].name;
            r.averages[name] = average(j);
            if (opts_.running_curve) {
                auto curve = curves_[j];
                if (curve.empty() || curve.back().first < elapsed_)
                    curve.emplace_back(elapsed_, average(j));
                r.running_curve[name] = std::move(curve);
            }
            if (rchain_rng_ && n_rchain_ > 0)
                r.rchain_averages[name] = rchain_mean(j);
        }
        r.occupancy = occupancy_;
        r.n_rchain = n_rchain_;
        return r;
    }

private:
    void eval_all(const StateVector& xi, double zeta, int season, std::vector<double>& out) const
    {
        for (std::size_t j = 0; j < opts_.observables.size(); ++j)
            out[j] = opts_.observables[j].eval(xi, zeta, season);
    }

    void record_curve(double ta, double tb, double dt)
    {
        while (next_curve_ <= tb) {
            if (next_curve_ > ta) {
                const double u = next_curve_ - ta;
                for (std::size_t j = 0; j < curves_.size(); ++j) {
                    const double f_tau = fa_[j] + (fb_[j] - fa_[j]) * (u / dt);
                    const double partial = integrals_[j] + 0.5 * u * (fa_[j] + f_tau);
                    curves_[j].emplace_back(next_curve_, partial / (elapsed_ + u));
                }
            }
            ++curve_index_;
            next_curve_ = opts_.curve_start *
                          std::pow(10.0, static_cast<double>(curve_index_) / opts_.points_per_decade);
        }
    }

    void sample_rchain(const DenseSegment& seg, const DenseSample& a, const DenseSample& b)
    {
        const double dt = b.t - a.t;
        while (next_tau_ < b.t) {
            if (next_tau_ >= a.t) {
                const double u = (next_tau_ - a.t) / dt;
                StateVector xi{};
                for (std::size_t c = 0; c < xi.size(); ++c)
                    xi[c] = a.xi[c] + (b.xi[c] - a.xi[c]) * u;
                const double zeta = seg.zeta_at(next_tau_);
                for (std::size_t j = 0; j < rchain_sums_.size(); ++j)
                    rchain_sums_[j] += opts_.observables[j].eval(xi, zeta, seg.season);
                ++n_rchain_;
            }
            next_tau_ += rchain_rng_->exponential();
        }
    }

    ErgodicOptions opts_;
    std::vector<double> integrals_;
    std::vector<double> rchain_sums_;
    std::vector<std::vector<std::pair<double, double>>> curves_;
    std::optional<Occupancy> occupancy_;
    std::optional<RandomStream> rchain_rng_;
    std::vector<double> fa_;
    std::vector<double> fb_;
    double elapsed_ = 0.0;
    double next_curve_ = 1.0;
    long curve_index_ = 0;
    double next_tau_ = 0.0;
    std::size_t n_rchain_ = 0;
};

/// Feeds a stored trajectory back through a sink, one jump-free segment at
/// a time. Segments are delimited where time stops increasing.
template <SegmentSink Sink>
void replay(const Trajectory& traj, Sink& sink)
{
    const auto& s = traj.samples;
    std::size_t begin = 0;
    while (begin < s.size()) {
        std::size_t end = begin + 1;
        while (end < s.size() && s[end].t > s[end - 1].t && s[end].season == s[begin].season)
            ++end;
        DenseSegment seg{s[begin].t, s[end - 1].t, s[begin].zeta, s[begin].season, {}};
        seg.samples.reserve(end - begin);
        for (std::size_t k = begin; k < end; ++k)
            seg.samples.push_back({s[k].t, s[k].xi});
        sink.on_segment(seg);
        begin = end;
    }
}

/// (1/T) * integral of f along the trajectory, trapezoid on the dense samples.
inline double time_average(const Trajectory& traj, const Observable& f)
{
    ErgodicOptions opts;
    opts.observables = {f};
    opts.running_curve = false;
    ErgodicAccumulator acc(std::move(opts));
    replay(traj, acc);
    return acc.average(0);
}

struct RChainAverage {
    double mean = 0.0;
    std::size_t n = 0;
};

/// Mean of f at the jump times of an independent unit-rate Poisson process
/// on [0, horizon], states read by linear interpolation of the dense samples.
inline RChainAverage rchain_average(const Trajectory& traj, const Observable& f, RandomStream rng)
{
    ErgodicOptions opts;
    opts.observables = {f};
    opts.running_curve = false;
    ErgodicAccumulator acc(std::move(opts), std::move(rng));
    replay(traj, acc);
    return {acc.rchain_mean(0), acc.rchain_count()};
}

inline Occupancy occupancy(const Trajectory& traj, OccupancyGrid bins)
{
    ErgodicOptions opts;
    opts.bins = bins;
    opts.running_curve = false;
    ErgodicAccumulator acc(std::move(opts));
    replay(traj, acc);
    return *acc.occupancy();
}

/// Largest pairwise gap between the final averages of the reports, per
/// observable present in all of them. A diagnostic only: distinct initial
/// conditions may legitimately settle on different averages.
inline std::map<std::string, double> convergence_diagnostic(const std::vector<ErgodicReport>& reports)
{
    std::map<std::string, double> gaps;
    if (reports.size() < 2)
        throw Error("convergence_diagnostic: at least two reports required");
    for (const auto& [name, _] : reports.front().averages) {
        bool everywhere = true;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& r : reports) {
            const auto it = r.averages.find(name);
            if (it == r.averages.end()) {
                everywhere = false;
                break;
            }
            lo = std::min(lo, it->second);
            hi = std::max(hi, it->second);
        }
        if (everywhere)
            gaps[name] = hi - lo;
    }
    return gaps;
}

inline Json report_to_json(const ErgodicReport& r)
{
    Json j;
    j["horizon"] = r.horizon;
    j["averages"] = Json::object();
    for (const auto& [k, v] : r.averages)
        j["averages"][k] = v;
    j["running_curve"] = Json::object();
    for (const auto& [k, curve] : r.running_curve) {
        Json pts = Json::array();
        for (const auto& [t, a] : curve)
            pts.push_back({t, a});
        j["running_curve"][k] = std::move(pts);
    }
    if (r.occupancy) {
        const auto& o = *r.occupancy;
        Json occ;
        occ["w_bins"] = o.grid.w_bins;
        occ["g_bins"] = o.grid.g_bins;
        occ["w_range"] = {0.0, 1.0};
        occ["g_range"] = {0.0, 1.0};
        occ["layout"] = "row-major, index = w_bin * g_bins + g_bin";
        occ["season_time"] = {o.season_total(0), o.season_total(1)};
        occ["seasons"] = {o.time[0], o.time[1]};
        j["occupancy"] = std::move(occ);
    } else {
        j["occupancy"] = nullptr;
    }
    j["rchain_averages"] = Json::object();
    for (const auto& [k, v] : r.rchain_averages)
        j["rchain_averages"][k] = v;
    j["n_rchain"] = r.n_rchain;
    return j;
}

} // namespace pdmp_seasons

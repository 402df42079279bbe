#pragma once

// Domain types shared by the whole library: state vectors, per-season
// parameters, fire-rate functions and loss models.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pdmp_seasons {

enum class ModelKind { basic2d, herbivore4d };

constexpr std::size_t dimension(ModelKind kind) noexcept
{
    return kind == ModelKind::basic2d ? 2 : 4;
}

inline const char* to_string(ModelKind kind) noexcept
{
    return kind == ModelKind::basic2d ? "basic2d" : "herbivore4d";
}

/// Component layout is (w, g, h_G, h_B); the herbivore slots stay zero for
/// the two-dimensional model.
using StateVector = std::array<double, 4>;

enum Component : std::size_t { kW = 0, kG = 1, kHG = 2, kHB = 3 };

/// Smallest value a positive coordinate is allowed to take. Repeated fires
/// can push w or g towards underflow; coordinates are floored here so that
/// the open-box invariant survives in floating point.
inline constexpr double positivity_floor = std::numeric_limits<double>::min();

/// Largest double strictly below one.
inline constexpr double below_one = 1.0 - std::numeric_limits<double>::epsilon() / 2;

/// Affine fire rate lambda(w, g, zeta) = c0 + c_w w + c_g g + c_zeta zeta.
struct RateFunction {
    double c0 = 0.0;
    double c_w = 0.0;
    double c_g = 0.0;
    double c_zeta = 0.0;

    double operator()(double w, double g, double zeta) const noexcept
    {
        return c0 + c_w * w + c_g * g + c_zeta * zeta;
    }

    /// Dominating constant for thinning over w, g <= 1 and zeta <= zeta_m.
    double upper_bound(double zeta_m) const noexcept
    {
        return c0 + c_w + c_g + c_zeta * zeta_m;
    }

    /// True for lambda = c_g * g, the form assumed by the closed-form
    /// coexistence criterion.
    bool is_proportional_to_grass() const noexcept
    {
        return c0 == 0.0 && c_w == 0.0 && c_zeta == 0.0 && c_g > 0.0;
    }

    friend bool operator==(const RateFunction&, const RateFunction&) = default;
};

struct DiracLoss {
    double M_w = 0.0;
    double M_g = 0.0;
    friend bool operator==(const DiracLoss&, const DiracLoss&) = default;
};

struct BetaProductLoss {
    double alpha_w = 1.0;
    double beta_w = 1.0;
    double alpha_g = 1.0;
    double beta_g = 1.0;
    friend bool operator==(const BetaProductLoss&, const BetaProductLoss&) = default;
};

struct UniformRectLoss {
    double lo_w = 0.0;
    double hi_w = 0.0;
    double lo_g = 0.0;
    double hi_g = 0.0;
    friend bool operator==(const UniformRectLoss&, const UniformRectLoss&) = default;
};

/// Distribution of the fractions (theta_w, theta_g) burnt by one fire.
using LossModel = std::variant<DiracLoss, BetaProductLoss, UniformRectLoss>;

struct Theta {
    double w = 0.0;
    double g = 0.0;
    friend bool operator==(const Theta&, const Theta&) = default;
};

struct SeasonSpec {
    double r_w = 0.0;
    double r_g = 0.0;
    double zeta_m = 0.0;
    RateFunction rate;
    LossModel loss = DiracLoss{};

    friend bool operator==(const SeasonSpec&, const SeasonSpec&) = default;
};

/// Consumption (c_*) and conversion (e_*) coefficients; shared by both seasons.
struct HerbivoreParams {
    double c_w = 0.0;
    double c_g = 0.0;
    double e_w = 0.0;
    double e_g = 0.0;
    friend bool operator==(const HerbivoreParams&, const HerbivoreParams&) = default;
};

struct ModelSpec {
    ModelKind kind = ModelKind::basic2d;
    std::array<SeasonSpec, 2> seasons;
    std::optional<HerbivoreParams> herbivores;

    const SeasonSpec& season(int i) const { return seasons.at(static_cast<std::size_t>(i)); }

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// A point (xi, zeta, i) of the hybrid state space.
struct HybridState {
    StateVector xi{};
    double zeta = 0.0;
    int season = 0;

    friend bool operator==(const HybridState&, const HybridState&) = default;
};

enum class EventKind { fire, season_switch };

inline const char* to_string(EventKind kind) noexcept
{
    return kind == EventKind::fire ? "fire" : "season_switch";
}

/// One jump of the process. For a season switch `before` is the boundary
/// point with zeta = zeta_m, which is not itself a state of the process.
struct Event {
    double time = 0.0;
    EventKind kind = EventKind::fire;
    Theta theta;
    HybridState before;
    HybridState after;

    friend bool operator==(const Event&, const Event&) = default;
};

struct Violation {
    std::string field;
    std::string message;

    std::string to_string() const { return field + ": " + message; }
};

namespace detail {

inline bool open_unit(double x) { return x > 0.0 && x < 1.0; }
inline bool positive(double x) { return std::isfinite(x) && x > 0.0; }
inline bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

inline void validate_loss(const LossModel& loss, const std::string& at,
                          std::vector<Violation>& out)
{
    if (const auto* d = std::get_if<DiracLoss>(&loss)) {
        if (!open_unit(d->M_w))
            out.push_back({at + ".M_w", "M_w must lie in (0,1)"});
        if (!open_unit(d->M_g))
            out.push_back({at + ".M_g", "M_g must lie in (0,1)"});
    } else if (const auto* b = std::get_if<BetaProductLoss>(&loss)) {
        const std::pair<const char*, double> shapes[] = {
            {"alpha_w", b->alpha_w}, {"beta_w", b->beta_w},
            {"alpha_g", b->alpha_g}, {"beta_g", b->beta_g}};
        for (const auto& [name, v] : shapes) {
            if (!positive(v))
                out.push_back({at + "." + name, std::string(name) + " must be > 0"});
        }
    } else {
        const auto& u = std::get<UniformRectLoss>(loss);
        auto check = [&](const char* lo_name, double lo, const char* hi_name, double hi) {
            if (!open_unit(lo))
                out.push_back({at + "." + lo_name, std::string(lo_name) + " must lie in (0,1)"});
            if (!open_unit(hi))
                out.push_back({at + "." + hi_name, std::string(hi_name) + " must lie in (0,1)"});
            if (!(lo <= hi))
                out.push_back({at + "." + lo_name,
                               std::string(lo_name) + " must not exceed " + hi_name});
        };
        check("lo_w", u.lo_w, "hi_w", u.hi_w);
        check("lo_g", u.lo_g, "hi_g", u.hi_g);
    }
}

} // namespace detail

/// Lists every violated parameter constraint; an empty result means the spec
/// is usable.
inline std::vector<Violation> validate_spec(const ModelSpec& spec)
{
    std::vector<Violation> out;
    for (std::size_t i = 0; i < spec.seasons.size(); ++i) {
        const auto& s = spec.seasons[i];
        const std::string at = "seasons[" + std::to_string(i) + "]";
        if (!detail::positive(s.r_w))
            out.push_back({at + ".r_w", "r_w > 0 required"});
        if (!detail::positive(s.r_g))
            out.push_back({at + ".r_g", "r_g > 0 required"});
        if (!detail::positive(s.zeta_m))
            out.push_back({at + ".zeta_m", "zeta_m > 0 required"});

        const std::pair<const char*, double> coeffs[] = {
            {"c0", s.rate.c0}, {"c_w", s.rate.c_w}, {"c_g", s.rate.c_g}, {"c_zeta", s.rate.c_zeta}};
        bool coeffs_ok = true;
        for (const auto& [name, v] : coeffs) {
            if (!detail::non_negative(v)) {
                out.push_back({at + ".rate." + name, std::string(name) + " must be finite and >= 0"});
                coeffs_ok = false;
            }
        }
        // Infimum over w, g in (0,1], zeta in [0, zeta_m) is c0, approached
        // but not attained when c_w or c_g is positive.
        if (coeffs_ok && !(s.rate.c0 > 0.0 || s.rate.c_w > 0.0 || s.rate.c_g > 0.0))
            out.push_back({at + ".rate", "rate must be strictly positive on the state box"});

        detail::validate_loss(s.loss, at + ".loss", out);
    }

    if (spec.kind == ModelKind::herbivore4d) {
        if (!spec.herbivores) {
            out.push_back({"herbivores", "herbivore coefficients required for herbivore4d"});
        } else {
            const auto& h = *spec.herbivores;
            const std::pair<const char*, double> coeffs[] = {
                {"c_w", h.c_w}, {"c_g", h.c_g}, {"e_w", h.e_w}, {"e_g", h.e_g}};
            for (const auto& [name, v] : coeffs) {
                if (!detail::positive(v))
                    out.push_back({std::string("herbivores.") + name, std::string(name) + " > 0 required"});
            }
        }
    }
    return out;
}

/// State-space membership: 0 < w < 1, 0 < g <= 1, herbivores > 0 and
/// 0 <= zeta < zeta_m of the current season.
inline std::vector<Violation> validate_state(const ModelSpec& spec, const HybridState& x)
{
    std::vector<Violation> out;
    if (x.season != 0 && x.season != 1) {
        out.push_back({"initial.i", "season index must be 0 or 1"});
        return out;
    }
    if (!detail::open_unit(x.xi[kW]))
        out.push_back({"initial.w", "w must lie in (0,1)"});
    if (!(x.xi[kG] > 0.0 && x.xi[kG] <= 1.0))
        out.push_back({"initial.g", "g must lie in (0,1]"});
    if (spec.kind == ModelKind::herbivore4d) {
        if (!detail::positive(x.xi[kHG]))
            out.push_back({"initial.h_G", "h_G > 0 required"});
        if (!detail::positive(x.xi[kHB]))
            out.push_back({"initial.h_B", "h_B > 0 required"});
    }
    const double zeta_m = spec.season(x.season).zeta_m;
    if (!(x.zeta >= 0.0 && x.zeta < zeta_m))
        out.push_back({"initial.zeta", "zeta must lie in [0, zeta_m) of the current season"});
    return out;
}

} // namespace pdmp_seasons

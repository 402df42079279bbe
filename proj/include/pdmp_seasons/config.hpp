#pragma once

// JSON config documents:
//   { model, seasons: [2], herbivores?, initial: {w, g, h_G?, h_B?, zeta, i} }

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "model.hpp"

namespace pdmp_seasons {

using Json = nlohmann::ordered_json;

struct Config {
    ModelSpec spec;
    HybridState initial;

    friend bool operator==(const Config&, const Config&) = default;
};

/// Shortest form is not used on purpose: all exported numbers carry 17
/// significant digits.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) noexcept
{
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace detail {

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                                const std::string& at)
{
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key()))
            throw ConfigError(at + "." + item.key() + ": unknown key");
    }
}

inline const Json& require(const Json& obj, const char* key, const std::string& at)
{
    if (!obj.is_object())
        throw ConfigError(at + ": expected an object");
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError(at + "." + key + ": missing");
    return *it;
}

inline double number(const Json& obj, const char* key, const std::string& at)
{
    const Json& v = require(obj, key, at);
    if (!v.is_number())
        throw ConfigError(at + "." + key + ": expected a number");
    return v.get<double>();
}

inline double number_or(const Json& obj, const char* key, double fallback, const std::string& at)
{
    if (!obj.contains(key))
        return fallback;
    return number(obj, key, at);
}

inline LossModel parse_loss(const Json& j, const std::string& at)
{
    const Json& type = require(j, "type", at);
    if (!type.is_string())
        throw ConfigError(at + ".type: expected a string");
    const auto t = type.get<std::string>();
    if (t == "dirac") {
        reject_unknown_keys(j, {"type", "M_w", "M_g"}, at);
        return DiracLoss{number(j, "M_w", at), number(j, "M_g", at)};
    }
    if (t == "beta") {
        reject_unknown_keys(j, {"type", "alpha_w", "beta_w", "alpha_g", "beta_g"}, at);
        return BetaProductLoss{number(j, "alpha_w", at), number(j, "beta_w", at),
                               number(j, "alpha_g", at), number(j, "beta_g", at)};
    }
    if (t == "uniform") {
        reject_unknown_keys(j, {"type", "lo_w", "hi_w", "lo_g", "hi_g"}, at);
        return UniformRectLoss{number(j, "lo_w", at), number(j, "hi_w", at), number(j, "lo_g", at),
                               number(j, "hi_g", at)};
    }
    throw ConfigError(at + ".type: expected one of dirac, beta, uniform");
}

inline SeasonSpec parse_season(const Json& j, const std::string& at)
{
    if (!j.is_object())
        throw ConfigError(at + ": expected an object");
    reject_unknown_keys(j, {"r_w", "r_g", "zeta_m", "rate", "loss"}, at);
    SeasonSpec s;
    s.r_w = number(j, "r_w", at);
    s.r_g = number(j, "r_g", at);
    s.zeta_m = number(j, "zeta_m", at);
    const Json& rate = require(j, "rate", at);
    if (!rate.is_object())
        throw ConfigError(at + ".rate: expected an object");
    reject_unknown_keys(rate, {"c0", "c_w", "c_g", "c_zeta"}, at + ".rate");
    s.rate.c0 = number_or(rate, "c0", 0.0, at + ".rate");
    s.rate.c_w = number_or(rate, "c_w", 0.0, at + ".rate");
    s.rate.c_g = number_or(rate, "c_g", 0.0, at + ".rate");
    s.rate.c_zeta = number_or(rate, "c_zeta", 0.0, at + ".rate");
    s.loss = parse_loss(require(j, "loss", at), at + ".loss");
    return s;
}

inline Json loss_to_json(const LossModel& loss)
{
    return std::visit(
        [](const auto& m) -> Json {
            using M = std::decay_t<decltype(m)>;
            Json j;
            if constexpr (std::is_same_v<M, DiracLoss>) {
                j["type"] = "dirac";
                j["M_w"] = m.M_w;
                j["M_g"] = m.M_g;
            } else if constexpr (std::is_same_v<M, BetaProductLoss>) {
                j["type"] = "beta";
                j["alpha_w"] = m.alpha_w;
                j["beta_w"] = m.beta_w;
                j["alpha_g"] = m.alpha_g;
                j["beta_g"] = m.beta_g;
            } else {
                j["type"] = "uniform";
                j["lo_w"] = m.lo_w;
                j["hi_w"] = m.hi_w;
                j["lo_g"] = m.lo_g;
                j["hi_g"] = m.hi_g;
            }
            return j;
        },
        loss);
}

} // namespace detail

/// Parses a config document. Throws ConfigError naming the offending field
/// for structural problems; parameter ranges are checked by validate_config.
inline Config parse_config(const Json& j)
{
    if (!j.is_object())
        throw ConfigError("config: expected a JSON object");
    detail::reject_unknown_keys(j, {"model", "seasons", "herbivores", "initial"}, "config");

    Config c;
    const Json& model = detail::require(j, "model", "config");
    if (model == "basic2d")
        c.spec.kind = ModelKind::basic2d;
    else if (model == "herbivore4d")
        c.spec.kind = ModelKind::herbivore4d;
    else
        throw ConfigError("config.model: expected \"basic2d\" or \"herbivore4d\"");

    const Json& seasons = detail::require(j, "seasons", "config");
    if (!seasons.is_array() || seasons.size() != 2)
        throw ConfigError("config.seasons: expected an array of exactly 2 seasons");
    for (std::size_t i = 0; i < 2; ++i)
        c.spec.seasons[i] = detail::parse_season(seasons[i], "seasons[" + std::to_string(i) + "]");

    if (j.contains("herbivores")) {
        const Json& h = j["herbivores"];
        detail::reject_unknown_keys(h, {"c_w", "c_g", "e_w", "e_g"}, "herbivores");
        c.spec.herbivores = HerbivoreParams{
            detail::number(h, "c_w", "herbivores"), detail::number(h, "c_g", "herbivores"),
            detail::number(h, "e_w", "herbivores"), detail::number(h, "e_g", "herbivores")};
    }

    const Json& init = detail::require(j, "initial", "config");
    detail::reject_unknown_keys(init, {"w", "g", "h_G", "h_B", "zeta", "i"}, "initial");
    c.initial.xi[kW] = detail::number(init, "w", "initial");
    c.initial.xi[kG] = detail::number(init, "g", "initial");
    if (c.spec.kind == ModelKind::herbivore4d) {
        c.initial.xi[kHG] = detail::number(init, "h_G", "initial");
        c.initial.xi[kHB] = detail::number(init, "h_B", "initial");
    }
    c.initial.zeta = detail::number(init, "zeta", "initial");
    const Json& season = detail::require(init, "i", "initial");
    if (!season.is_number_integer())
        throw ConfigError("initial.i: expected an integer season index");
    c.initial.season = season.get<int>();
    return c;
}

inline Config parse_config_text(std::string_view text)
{
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Config load_config(const std::string& path) { return parse_config_text(read_file(path)); }

inline Json spec_to_json(const ModelSpec& spec)
{
    Json j;
    j["model"] = to_string(spec.kind);
    Json seasons = Json::array();
    for (const auto& s : spec.seasons) {
        Json js;
        js["r_w"] = s.r_w;
        js["r_g"] = s.r_g;
        js["zeta_m"] = s.zeta_m;
        js["rate"] = {{"c0", s.rate.c0}, {"c_w", s.rate.c_w}, {"c_g", s.rate.c_g},
                      {"c_zeta", s.rate.c_zeta}};
        js["loss"] = detail::loss_to_json(s.loss);
        seasons.push_back(std::move(js));
    }
    j["seasons"] = std::move(seasons);
    if (spec.herbivores) {
        const auto& h = *spec.herbivores;
        j["herbivores"] = {{"c_w", h.c_w}, {"c_g", h.c_g}, {"e_w", h.e_w}, {"e_g", h.e_g}};
    }
    return j;
}

inline Json state_to_json(ModelKind kind, const HybridState& x)
{
    Json j;
    j["w"] = x.xi[kW];
    j["g"] = x.xi[kG];
    if (kind == ModelKind::herbivore4d) {
        j["h_G"] = x.xi[kHG];
        j["h_B"] = x.xi[kHB];
    }
    j["zeta"] = x.zeta;
    j["i"] = x.season;
    return j;
}

inline Json config_to_json(const Config& c)
{
    Json j = spec_to_json(c.spec);
    j["initial"] = state_to_json(c.spec.kind, c.initial);
    return j;
}

/// Content hash of the model, initial state and random-stream address;
/// stable across runs and platforms.
inline std::string spec_digest(const ModelSpec& spec, const HybridState& initial,
                               std::uint64_t seed, std::uint32_t trajectory = 0)
{
    Json j = spec_to_json(spec);
    j["initial"] = state_to_json(spec.kind, initial);
    std::uint64_t h = fnv1a64(j.dump());
    h = fnv1a64("|seed=" + std::to_string(seed) + "|trajectory=" + std::to_string(trajectory), h);
    return hex64(h);
}

inline std::vector<Violation> validate_config(const Config& c)
{
    auto out = validate_spec(c.spec);
    if (out.empty()) {
        auto state = validate_state(c.spec, c.initial);
        out.insert(out.end(), state.begin(), state.end());
    }
    return out;
}

} // namespace pdmp_seasons

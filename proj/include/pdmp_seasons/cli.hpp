#pragma once

// The three subcommands as library functions. Each returns the process exit
// code: 0 on success, 1 on a config or usage problem, 2 on a runtime failure.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "conditions.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "io.hpp"
#include "simulator.hpp"
#include "version.hpp"

namespace pdmp_seasons::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_runtime = 2;

struct SimulateArgs {
    std::string config;
    double horizon = 100.0;
    std::uint64_t seed = 0;
    std::string out_prefix;
    double dt_out = 0.01;
};

struct EstimateArgs {
    std::string config;
    double horizon = 1e4;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> observables{"w", "g", "season0"};
    std::size_t bins = 50;
    std::string out_prefix;
    double dt_out = 0.01;
    unsigned threads = 0;
};

struct CheckArgs {
    std::string config;
    std::string out_prefix;
    ScanGrid grid;
};

namespace detail {

inline std::string default_prefix(const std::string& config_path)
{
    return std::filesystem::path(config_path).stem().string();
}

struct LoadedConfig {
    Config config;
    std::string bytes;
};

/// Reads and validates; on failure prints every violation and returns nullopt.
inline std::optional<LoadedConfig> load(const std::string& path, std::ostream& err)
{
    LoadedConfig lc;
    try {
        lc.bytes = read_file(path);
        lc.config = parse_config_text(lc.bytes);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return std::nullopt;
    }
    const auto violations = validate_config(lc.config);
    if (!violations.empty()) {
        for (const auto& v : violations)
            err << "config violation: " << v.to_string() << '\n';
        return std::nullopt;
    }
    return lc;
}

inline Json versions_json()
{
    return {{"pdmp_seasons", version},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

} // namespace detail

inline int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err)
{
    if (!(args.horizon > 0.0) || !(args.dt_out > 0.0)) {
        err << "usage error: --horizon and --dt-out must be positive\n";
        return exit_config;
    }
    const auto lc = detail::load(args.config, err);
    if (!lc)
        return exit_config;
    const auto& [spec, initial] = lc->config;
    const std::string prefix = args.out_prefix.empty() ? detail::default_prefix(args.config)
                                                       : args.out_prefix;

    SimulationOptions opts;
    opts.flow.dt_out = args.dt_out;
    try {
        AtomicFile csv(prefix + ".traj.csv");
        csv.stream() << csv_header(spec.kind) << '\n';
        CsvSink sink{&csv.stream(), spec.kind};
        const auto events = simulate(spec, initial, args.horizon, args.seed, 0, opts, sink);

        AtomicFile jsonl(prefix + ".events.jsonl");
        write_events_jsonl(jsonl.stream(), spec.kind, events);

        std::size_t fires = 0;
        for (const auto& e : events)
            fires += e.kind == EventKind::fire;

        Json m;
        m["command"] = "simulate";
        m["spec_digest"] = spec_digest(spec, initial, args.seed);
        m["config_digest"] = hex64(fnv1a64(lc->bytes));
        m["seed"] = args.seed;
        m["horizon"] = args.horizon;
        m["dt_out"] = args.dt_out;
        m["model"] = to_string(spec.kind);
        m["n_events"] = events.size();
        m["n_fires"] = fires;
        m["n_switches"] = events.size() - fires;
        m["files"] = {{"trajectory", std::filesystem::path(prefix + ".traj.csv").filename().string()},
                      {"events", std::filesystem::path(prefix + ".events.jsonl").filename().string()}};
        m["versions"] = detail::versions_json();

        csv.commit();
        jsonl.commit();
        write_file_atomic(prefix + ".manifest.json", m.dump(2) + "\n");
        out << "simulated " << to_string(spec.kind) << " to t=" << format_double(args.horizon)
            << ": " << fires << " fires, " << events.size() - fires << " season switches\n"
            << "wrote " << prefix << ".traj.csv, " << prefix << ".events.jsonl, " << prefix
            << ".manifest.json\n";
    } catch (const SimulationError& e) {
        err << "simulation error: " << e.what() << '\n';
        return exit_runtime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

inline int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err)
{
    if (args.seeds.empty()) {
        err << "usage error: --seeds needs at least one seed\n";
        return exit_config;
    }
    if (!(args.horizon > 0.0) || !(args.dt_out > 0.0)) {
        err << "usage error: --horizon and --dt-out must be positive\n";
        return exit_config;
    }
    const auto lc = detail::load(args.config, err);
    if (!lc)
        return exit_config;
    const auto& [spec, initial] = lc->config;

    std::vector<Observable> observables;
    try {
        for (const auto& name : args.observables)
            observables.push_back(builtin_observable(name));
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_config;
    }
    const std::string prefix = args.out_prefix.empty() ? detail::default_prefix(args.config)
                                                       : args.out_prefix;

    SimulationOptions sim;
    sim.flow.dt_out = args.dt_out;
    ErgodicOptions eopts;
    eopts.observables = observables;
    if (args.bins > 0)
        eopts.bins = OccupancyGrid{args.bins, args.bins};

    const unsigned threads = args.threads ? args.threads : default_thread_count();
    std::vector<ErgodicReport> reports;
    try {
        reports = parallel_map(args.seeds.size(), threads, [&](std::size_t k) {
            const std::uint64_t seed = args.seeds[k];
            ErgodicAccumulator acc(eopts, RandomStream(seed, 0, StreamPurpose::rchain));
            simulate(spec, initial, args.horizon, seed, 0, sim, acc);
            return acc.report(args.horizon);
        });
    } catch (const SimulationError& e) {
        err << "simulation error: " << e.what() << '\n';
        return exit_runtime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }

    try {
        Json diag;
        diag["command"] = "estimate";
        diag["config_digest"] = hex64(fnv1a64(lc->bytes));
        diag["horizon"] = args.horizon;
        diag["seeds"] = args.seeds;
        diag["observables"] = args.observables;
        Json per_seed = Json::array();
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const std::string file = prefix + ".seed" + std::to_string(args.seeds[k]) + ".report.json";
            Json rj = report_to_json(reports[k]);
            rj["seed"] = args.seeds[k];
            rj["spec_digest"] = spec_digest(spec, initial, args.seeds[k]);
            write_file_atomic(file, rj.dump() + "\n");
            per_seed.push_back({{"seed", args.seeds[k]},
                                {"file", std::filesystem::path(file).filename().string()},
                                {"averages", rj["averages"]},
                                {"rchain_averages", rj["rchain_averages"]},
                                {"n_rchain", reports[k].n_rchain}});
        }
        diag["reports"] = std::move(per_seed);
        if (reports.size() >= 2) {
            diag["max_pairwise_gap"] = Json::object();
            for (const auto& [name, gap] : convergence_diagnostic(reports))
                diag["max_pairwise_gap"][name] = gap;
        } else {
            diag["max_pairwise_gap"] = nullptr;
        }
        diag["versions"] = detail::versions_json();
        write_file_atomic(prefix + ".diagnostic.json", diag.dump(2) + "\n");

        for (std::size_t k = 0; k < reports.size(); ++k) {
            out << "seed " << args.seeds[k] << ':';
            for (const auto& [name, v] : reports[k].averages)
                out << ' ' << name << '=' << format_double(v);
            out << '\n';
        }
        if (reports.size() >= 2) {
            out << "max pairwise gap:";
            for (const auto& [name, gap] : convergence_diagnostic(reports))
                out << ' ' << name << '=' << format_double(gap);
            out << '\n';
        }
        out << "wrote " << reports.size() << " reports and " << prefix << ".diagnostic.json\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

inline void print_condition_summary(std::ostream& out, const ConditionReport& r)
{
    if (r.corollary.applicable) {
        out << "corollary margins (r_w + lambda0 ln(1 - M_w)):\n";
        for (std::size_t i = 0; i < 2; ++i)
            out << "  season " << i << ": " << format_double(r.corollary.margins[i]) << '\n';
    } else {
        out << "corollary: Inapplicable (needs constant losses and lambda = lambda0 g)\n";
    }
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : "none"; };
    auto fin = [](double v) { return std::isfinite(v) ? format_double(v) : "none"; };
    out << "scan: a_w=" << opt(r.a_w) << " eps_w=" << fin(r.eps_w) << '\n'
        << "      a_g=" << opt(r.a_g) << " eps_g=" << fin(r.eps_g) << '\n';
    if (r.skipped_exponents)
        out << "      " << r.skipped_exponents << " exponents skipped (divergent loss moments)\n";
    out << "a4 finite: season 0 " << (r.a4_finite[0] ? "yes" : "no") << ", season 1 "
        << (r.a4_finite[1] ? "yes" : "no") << '\n'
        << "verdict: " << to_string(r.verdict) << '\n';
}

inline int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err)
{
    const auto lc = detail::load(args.config, err);
    if (!lc)
        return exit_config;
    const std::string prefix = args.out_prefix.empty() ? detail::default_prefix(args.config)
                                                       : args.out_prefix;
    try {
        const ConditionReport r = scan_a3(lc->config.spec, args.grid);
        Json j = condition_report_to_json(r);
        j["config_digest"] = hex64(fnv1a64(lc->bytes));
        j["versions"] = detail::versions_json();
        write_file_atomic(prefix + ".conditions.json", j.dump(2) + "\n");
        print_condition_summary(out, r);
        out << "wrote " << prefix << ".conditions.json\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

} // namespace pdmp_seasons::cli

#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <pdmp_seasons/cli.hpp>

namespace cli = pdmp_seasons::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Seasonal PDMP savanna models: simulate, estimate long-run averages, check coexistence conditions"};
    app.set_version_flag("--version", pdmp_seasons::version);
    app.require_subcommand(1);

    cli::SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate one trajectory and export CSV, JSONL and a manifest");
    simulate->add_option("config", sim.config, "Config JSON")->required();
    simulate->add_option("--horizon", sim.horizon, "End time (model time units)")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_option("--out-prefix", sim.out_prefix, "Output prefix (default: config file stem)");
    simulate->add_option("--dt-out", sim.dt_out, "Dense output spacing (model time units)")->capture_default_str();

    cli::EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Time averages, occupancy and R-chain means per seed");
    estimate->add_option("config", est.config, "Config JSON")->required();
    estimate->add_option("--horizon", est.horizon, "End time (model time units)")->capture_default_str();
    std::vector<std::string> seed_text;
    estimate->add_option("--seeds", seed_text, "Seeds, one report each (comma separated)")->delimiter(',');
    estimate->add_option("--observables", est.observables,
                         "Observables: one, w, g, h_G, h_B, season0, season1, rect(wlo;whi;glo;ghi)")
        ->delimiter(',')
        ->capture_default_str();
    estimate->add_option("--bins", est.bins, "Occupancy bins per axis, 0 disables")->capture_default_str();
    estimate->add_option("--out-prefix", est.out_prefix, "Output prefix (default: config file stem)");
    estimate->add_option("--dt-out", est.dt_out, "Dense output spacing (model time units)")->capture_default_str();
    estimate->add_option("--threads", est.threads, "Worker threads (default: PDMP_SEASONS_THREADS or all cores)");

    cli::CheckArgs chk;
    auto* check = app.add_subcommand("check", "Check the coexistence conditions and write a condition report");
    check->add_option("config", chk.config, "Config JSON")->required();
    check->add_option("--out-prefix", chk.out_prefix, "Output prefix (default: config file stem)");
    check->add_option("--n-exponents", chk.grid.n_exponents, "Exponent grid size")->capture_default_str();
    check->add_option("--n-small", chk.grid.n_small, "Points on the small-coordinate grid")->capture_default_str();
    check->add_option("--small-lo", chk.grid.small_lo, "Lower end of the small-coordinate grid")->capture_default_str();
    check->add_option("--small-hi", chk.grid.small_hi, "Upper end of the small-coordinate grid")->capture_default_str();
    check->add_option("--n-free", chk.grid.n_free, "Points on the free-coordinate grid")->capture_default_str();
    check->add_option("--n-zeta", chk.grid.n_zeta, "Points on the clock grid")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::exit_config;
    }

    if (*simulate)
        return cli::cmd_simulate(sim, std::cout, std::cerr);
    if (*estimate) {
        for (const auto& text : seed_text) {
            if (text.empty())
                continue;
            try {
                std::size_t used = 0;
                est.seeds.push_back(std::stoull(text, &used));
                if (used != text.size())
                    throw std::invalid_argument(text);
            } catch (const std::exception&) {
                std::cerr << "usage error: invalid seed '" << text << "'\n";
                return cli::exit_config;
            }
        }
        return cli::cmd_estimate(est, std::cout, std::cerr);
    }
    return cli::cmd_check(chk, std::cout, std::cerr);
}

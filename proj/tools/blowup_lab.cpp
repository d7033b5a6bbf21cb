// Command-line front end: run scenarios, re-check bundles, tune σ and θ.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
// 3 runtime error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "blowup/scenario.hpp"

namespace fs = std::filesystem;
using namespace blowup;

namespace {

void print_reports(const std::vector<CheckReport>& reports) {
    for (const auto& r : reports) {
        std::printf("%-28s %-15s residual=%-12.4g tol=%-12.4g", r.name.c_str(), std::string(to_string(r.status)).c_str(),
                    r.residual, r.tolerance);
        for (const auto& n : r.notes) std::printf(" [%s]", n.c_str());
        std::printf("\n");
    }
}

int status_code(const std::vector<CheckReport>& reports) {
    for (const auto& r : reports)
        if (r.failed()) return 1;
    return 0;
}

Scenario configured(const std::string& path, std::optional<std::uint64_t> seed, double scale) {
    auto sc = load_scenario(path);
    if (seed) sc.seed = *seed;
    if (scale != 1.0) sc = refined(sc, scale);
    return sc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for blow-up of perturbed critical semilinear waves"};
    app.require_subcommand(1);

    std::string config, bundle, out;
    std::optional<std::uint64_t> seed;
    double scale = 1.0;

    auto* run = app.add_subcommand("run", "run a scenario and write its bundle");
    run->add_option("config", config, "scenario config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "bundle directory (default bundles/<name>)");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--resolution-scale", scale, "refine dr, ds, amp_step and y cells by this factor");

    auto* check = app.add_subcommand("check", "recompute the trace checks of a bundle");
    check->add_option("bundle", bundle, "bundle directory")->required()->check(CLI::ExistingDirectory);

    auto* tune = app.add_subcommand("tune", "find the smallest passing sigma and theta for a scenario");
    tune->add_option("config", config, "scenario config file")->required()->check(CLI::ExistingFile);
    tune->add_option("--seed", seed, "override the scenario seed");
    tune->add_option("--resolution-scale", scale, "refine dr, ds, amp_step and y cells by this factor");

    auto* list = app.add_subcommand("list-checks", "print the check catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*list) {
        for (const auto& c : check_catalog()) std::printf("%-18s %s\n", c.name.c_str(), c.summary.c_str());
        return 0;
    }

    Scenario sc;
    try {
        if (*check) {
            const auto reports = recheck_bundle(bundle);
            print_reports(reports);
            return status_code(reports);
        }
        sc = configured(config, seed, scale);
        if (*tune) {
            sc.sigma_auto = true;
            sc.theta_auto = true;
            const auto res = run_scenario(sc);
            std::printf("sigma = %s\ntheta = %s\n", io::fmt_double(res.model.sigma).c_str(),
                        io::fmt_double(res.model.theta).c_str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    const fs::path dir = out.empty() ? fs::path("bundles") / sc.name : fs::path(out);
    RunResult res;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        res = run_scenario(sc);
        write_bundle(res, dir);
        const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "%s: %zu steps, %zu frames, %.1f s -> %s\n", sc.name.c_str(), res.traj.steps,
                     res.frames.size(), el, dir.string().c_str());
    } catch (const ConfigError& e) {
        std::cerr << "config error in scenario '" << sc.name << "': " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error in scenario '" << sc.name << "': " << e.what() << "\n";
        RunResult partial;
        partial.scenario = sc;
        partial.error = e.what();
        try {
            write_bundle(partial, dir);
        } catch (const std::exception& w) {
            std::cerr << "could not write partial bundle: " << w.what() << "\n";
        }
        return 3;
    }
    print_reports(res.checks);
    return status_code(res.checks);
}

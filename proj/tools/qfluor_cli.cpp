// qfluor: run / compare / emit-plots
//
// exit codes: 0 success, 1 usage, 2 config error, 3 numerical failure

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qfluor/compare.hpp"
#include "qfluor/config.hpp"
#include "qfluor/plots.hpp"
#include "qfluor/runner.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& methods, const std::string& out,
            std::optional<std::uint64_t> seed, bool desk)
{
    qfluor::RunConfig cfg = qfluor::load_config(config_path);
    if (desk) qfluor::apply_desk_scale(cfg);
    const auto list = qfluor::parse_methods(methods);
    const qfluor::RunManifest man = qfluor::run(cfg, config_path, list, out, seed);
    for (const auto& s : man.status) {
        std::cout << s.method << " " << s.run_id << " " << s.status;
        if (!s.message.empty()) std::cout << ": " << s.message;
        std::cout << '\n';
    }
    return man.exit_code();
}

int cmd_compare(const std::string& a, const std::string& b, std::optional<double> omega_ref,
                std::optional<double> time, const std::string& report)
{
    qfluor::CompareOptions opts;
    opts.omega_ref = omega_ref;
    opts.time = time;
    std::string text;
    for (const auto& r : qfluor::compare_paths(a, b, opts)) text += r.to_text() + "\n";
    std::cout << text;
    if (!report.empty()) {
        std::ofstream f(report, std::ios::binary);
        if (!f) throw qfluor::ConfigError("cannot write '" + report + "'");
        f << text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qfluor: driven qubit fluorescence toolkit"};
    app.require_subcommand(1);

    std::string config, methods = "davydov", out, a, b, report, run_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> omega_ref, time;
    bool desk = false;

    auto* run = app.add_subcommand("run", "run methods for one config");
    run->add_option("--config", config, "JSON config file")->required();
    run->add_option("--methods", methods, "comma list of davydov,tlme,rwa_tlme,heom");
    run->add_option("--out", out, "output directory")->required();
    run->add_option("--seed", seed, "seed for displacement noise and fit restarts");
    run->add_flag("--desk-scale", desk, "override to N_b=60, M=4");

    auto* cmp = app.add_subcommand("compare", "agreement metrics between two outputs");
    cmp->add_option("--a", a, "method or run directory")->required();
    cmp->add_option("--b", b, "method or run directory")->required();
    cmp->add_option("--omega-ref", omega_ref, "asymmetry centre (default omega_x)");
    cmp->add_option("--time", time, "asymmetry time (default last common time)");
    cmp->add_option("--report", report, "also write the report here");

    auto* plots = app.add_subcommand("emit-plots", "write plotting scripts for a run");
    plots->add_option("--run", run_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(config, methods, out, seed, desk);
        if (*cmp) return cmd_compare(a, b, omega_ref, time, report);
        for (const auto& p : qfluor::emit_plots(run_dir)) std::cout << p << '\n';
        return 0;
    } catch (const qfluor::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

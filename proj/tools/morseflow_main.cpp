#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "morseflow/errors.hpp"
#include "morseflow/scenario.hpp"

namespace {

void write_report(const morseflow::Json& report, const std::string& path) {
    std::string text = morseflow::dump_report(report);
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write report to '" << path << "'\n";
        std::exit(1);
    }
    out << text;
}

morseflow::RunOptions make_options(const std::string& coeff, long long seed, bool seed_set,
                                   double tol_scale) {
    morseflow::RunOptions opts;
    opts.tol_scale = tol_scale;
    if (coeff == "z")
        opts.coeff_override = morseflow::Coeff::Z;
    else if (coeff == "z2")
        opts.coeff_override = morseflow::Coeff::Z2;
    if (seed_set) opts.seed_override = seed;
    return opts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"morseflow: Morse homology from gradient-flow trajectory counts on implicit "
                 "surfaces"};
    app.require_subcommand(1);

    std::string scenario_path, report_path, coeff;
    long long seed = 0;
    double tol_scale = 1.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--report", report_path, "report output path (default: stdout)");
        cmd->add_option("--coeff", coeff, "coefficient ring override: z or z2")
            ->check(CLI::IsMember({"z", "z2"}));
        cmd->add_option("--seed", seed, "rng seed override");
        cmd->add_option("--tol-scale", tol_scale,
                        "multiply rk_tol and bisection_tol (0.1 tightens 10x)");
    };

    CLI::App* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    add_common(run);

    CLI::App* dump = app.add_subcommand("dump-trajectories",
                                        "enumerate trajectories and dump plot-ready polylines");
    dump->add_option("scenario", scenario_path, "scenario JSON file")->required();
    add_common(dump);

    CLI::App* verify = app.add_subcommand("verify-all", "run the built-in verification catalog");
    (void)verify;

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            morseflow::Scenario sc = morseflow::Scenario::from_file(scenario_path);
            bool seed_set = run->count("--seed") > 0;
            morseflow::RunResult res =
                morseflow::run_scenario(sc, make_options(coeff, seed, seed_set, tol_scale));
            write_report(res.report, report_path);
            return res.exit_code;
        }
        if (dump->parsed()) {
            morseflow::Scenario sc = morseflow::Scenario::from_file(scenario_path);
            bool seed_set = dump->count("--seed") > 0;
            morseflow::RunResult res =
                morseflow::dump_trajectories(sc, make_options(coeff, seed, seed_set, tol_scale));
            write_report(res.report, report_path);
            return res.exit_code;
        }
        if (verify->parsed()) {
            return morseflow::verify_all(std::cout);
        }
    } catch (const morseflow::Error& e) {
        std::cerr << e.what() << "\n";
        return morseflow::exit_class(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

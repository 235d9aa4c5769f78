// rodlimit: thin curved elastic rods from the command line.
//
//   rodlimit section   --config run.json [--out DIR]
//   rodlimit solve     --model=nonlinear|linear|extensional|coupled --config run.json [--out DIR]
//   rodlimit decompose --config run.json [--out DIR] [--threads N]
//   rodlimit gamma     --config run.json [--out DIR] [--threads N]
//
// Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.
#include "commands.hpp"
#include "config.hpp"

#include "rodlimit/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

struct CommonOptions {
    std::string config;
    std::string out;
    int threads = 1;
};

void addCommon(CLI::App *cmd, CommonOptions &opt) {
    cmd->add_option("--config", opt.config, "JSON run configuration")->required();
    cmd->add_option("--out", opt.out, "output directory (overrides the configuration)");
    cmd->add_option("--threads", opt.threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char **argv) {
    using namespace rodlimit;
    CLI::App app{"Thin curved elastic rods: section constants, limit models, decomposition and the "
                 "Gamma-convergence check"};
    app.require_subcommand(1);
    CommonOptions common;
    std::string model;
    auto *section = app.add_subcommand("section", "section constants and torsion function");
    auto *solve = app.add_subcommand("solve", "solve a one-dimensional limit model");
    auto *decompose = app.add_subcommand("decompose", "decompose a sampled rod deformation");
    auto *gamma = app.add_subcommand("gamma", "numerical Gamma-convergence check");
    for (auto *cmd : {section, solve, decompose, gamma}) addCommon(cmd, common);
    solve->add_option("--model", model, "nonlinear, linear, extensional or coupled")
        ->required()
        ->check(CLI::IsMember({"nonlinear", "linear", "extensional", "coupled"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        const cli::RunConfig cfg = cli::loadConfig(common.config);
        const std::filesystem::path out = common.out.empty() ? cfg.output : std::filesystem::path(common.out);
        std::string summary;
        if (section->parsed()) summary = cli::runSection(cfg, out);
        else if (solve->parsed()) summary = cli::runSolve(cfg, model, out, common.threads);
        else if (decompose->parsed()) summary = cli::runDecompose(cfg, out, common.threads);
        else summary = cli::runGamma(cfg, out, common.threads);
        std::cout << summary << "\n";
        return 0;
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NonConvergenceError &e) {
        std::cerr << "error: " << e.what() << " (last residual " << e.lastResidual() << " after " << e.iterations()
                  << " iterations)\n";
        return kExitNonConvergence;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

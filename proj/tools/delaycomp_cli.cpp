// Batch front end: kernels, simulate, robust, sweep.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "delaycomp/parallel.hpp"
#include "delaycomp/pipeline.hpp"

using namespace delaycomp;

int main(int argc, char** argv) {
    CLI::App app{"Delay-compensated boundary control of coupled hyperbolic PDEs"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    std::size_t grid_nodes = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (INI)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--grid", grid_nodes, "nodes for kernel and simulation grids")->check(CLI::Range(3, 100000));
    };
    auto* kernels = app.add_subcommand("kernels", "solve K, L, alpha, beta and write fields and gain traces");
    auto* simulate = app.add_subcommand("simulate", "run the closed loop and write trajectory artifacts");
    auto* robust = app.add_subcommand("robust", "scan the characteristic functions for the configured delay mismatch");
    auto* sweep = app.add_subcommand("sweep", "robust scan plus a bisection for the largest stable delay mismatch");
    for (auto* sub : {kernels, simulate, robust, sweep}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig config = load_config(config_path);
        if (grid_nodes) config.override_grid(grid_nodes);
        if (!out_dir.empty()) config.output_dir = out_dir;

        const std::string command = app.get_subcommands().front()->get_name();
        RunManifest manifest(config.output_dir, config, command);
        manifest.diagnostics()["threads"] = worker_count();
        Stopwatch total;
        int status = ExitOk;
        if (command == "kernels") status = cmd_kernels(config, manifest);
        else if (command == "simulate") status = cmd_simulate(config, manifest);
        else status = cmd_robust(config, manifest, command == "sweep");
        manifest.timing("total", total.seconds());
        manifest.write();
        return status;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidParameter:
        case ErrorCode::NonPositiveSpeed:
        case ErrorCode::CFLViolation: return ExitUsage;
        case ErrorCode::NonFiniteState: return ExitBlowUp;
        default: return ExitNumerical;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ExitNumerical;
    }
}

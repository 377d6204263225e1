#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "delaycomp/config.hpp"
#include "delaycomp/kernels_rectangle.hpp"
#include "delaycomp/kernels_triangle.hpp"
#include "delaycomp/simulator.hpp"

namespace delaycomp {

/// Triangle and rectangle kernels for one plant on one grid.
struct KernelBundle {
    Grid1D grid;
    TriangleKernelSet tri;
    GeneralKernelProblem alpha_problem, beta_problem; // alpha at tau_bar, beta at tau
    RectKernelPair alpha, beta;
    GainTrace p, mu;
    nlohmann::json diagnostics;
};

KernelBundle solve_kernels(const PlantParams& params, const Grid1D& grid);

/// Piecewise-linear resampling between uniform grids.
std::vector<double> resample(const Grid1D& from, std::span<const double> values, const Grid1D& to);
ControllerGains resample_gains(const ControllerGains& gains, const Grid1D& to);

/// Controller of the requested kind with gains moved onto the simulation grid.
Controller make_controller(ControllerKind kind, const KernelBundle& kernels, const Grid1D& sim_grid);

/// Record of one CLI run: config hash, versions, artifacts, timings, diagnostics.
class RunManifest {
public:
    RunManifest(std::filesystem::path out_dir, const ExperimentConfig& config, std::string command);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    /// Path inside the output directory; the file is listed once written via `add`.
    std::filesystem::path path(const std::string& name) const { return dir_ / name; }
    void add(const std::string& name);
    void timing(const std::string& stage, double seconds);
    nlohmann::json& diagnostics() { return json_["diagnostics"]; }
    const std::vector<std::string>& files() const noexcept { return files_; }

    /// Writes manifest.json; throws if a listed file is missing.
    void write();

private:
    std::filesystem::path dir_;
    nlohmann::json json_;
    std::vector<std::string> files_;
};

/// Wall-clock seconds since construction.
class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Command bodies; each returns the process exit status and fills the manifest.
enum ExitStatus : int { ExitOk = 0, ExitUsage = 1, ExitNumerical = 2, ExitBlowUp = 3 };

int cmd_kernels(const ExperimentConfig& config, RunManifest& manifest);
int cmd_simulate(const ExperimentConfig& config, RunManifest& manifest);
int cmd_robust(const ExperimentConfig& config, RunManifest& manifest, bool sweep);

} // namespace delaycomp

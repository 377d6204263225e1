#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "delaycomp/plant.hpp"
#include "delaycomp/robustness.hpp"
#include "delaycomp/simulator.hpp"

namespace delaycomp {

enum class InitialPreset { Sin2Pi, Table };

/// Everything one experiment needs, loaded from an INI file:
///
///   [plant]       eps1, eps2, c1, c2 (number or "x:v, x:v, ..."), q, tau, tau_bar or delta_tau
///   [grid]        kernel_nodes, sim_nodes, dt
///   [simulation]  controller, t_end, initial (sin2pi | table), u1_table, u2_table, snapshot_every
///   [robustness]  sigma_max, omega_max, n_sigma, n_omega, refine, contour_threshold,
///                 model (closed_loop | h_sum), margin_lo, margin_hi, bisections
///   [output]      dir
struct ExperimentConfig {
    PlantParams plant;
    std::size_t kernel_nodes = 101;
    std::size_t sim_nodes = 101;
    double dt = 0.01;

    ControllerKind controller = ControllerKind::Compensated;
    double t_end = 8.0;
    InitialPreset initial = InitialPreset::Sin2Pi;
    Profile u1_initial, u2_initial;
    std::size_t snapshot_every = 10;

    ScanWindow window;
    CharacteristicModel model = CharacteristicModel::ClosedLoop;
    double margin_lo = 0.0, margin_hi = 1.0;
    std::size_t bisections = 8;

    std::filesystem::path output_dir = "out";

    /// Canonical text the hash is taken over (source bytes plus overrides).
    std::string canonical;

    /// Checks every field against the module preconditions; errors name the field.
    void validate() const;

    /// Uses `n` nodes for both grids and shrinks dt if the CFL bound needs it.
    void override_grid(std::size_t n);

    std::vector<double> initial_u1(const Grid1D& grid) const { return u1_initial.sample(grid); }
    std::vector<double> initial_u2(const Grid1D& grid) const { return u2_initial.sample(grid); }
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

/// Parses "1.5" as a constant or "0:1, 0.5:2, 1:1" as a tabulated profile.
Profile parse_profile(const std::string& text, const std::string& field);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& data);

} // namespace delaycomp

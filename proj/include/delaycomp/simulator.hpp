#pragma once

#include <functional>
#include <string>
#include <vector>

#include "delaycomp/controller.hpp"
#include "delaycomp/kernels_triangle.hpp"

namespace delaycomp {

enum class ControllerKind { Compensated, Nominal, OpenLoop };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

/// What drives U(t). Nominal feedback uses the direct-kernel traces
/// K21(1,.), K22(1,.) and ignores the delay.
struct Controller {
    ControllerKind kind = ControllerKind::OpenLoop;
    ControllerGains gains;
    std::vector<double> k21, k22;

    static Controller open_loop() { return Controller{}; }
    static Controller compensated(ControllerGains g);
    static Controller nominal(std::vector<double> k21_trace, std::vector<double> k22_trace);
};

/// u1, u2 on the spatial grid; v on the delay-line grid (v.front() is the
/// input reaching the plant, v.back() the latest U).
struct SimState {
    std::vector<double> u1, u2, v;
    double t = 0.0;
    double U = 0.0;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> u1, u2, v; // v resampled on the spatial grid
};

struct RunMetadata {
    std::size_t nx = 0;
    std::size_t steps = 0;
    double dx = 0.0, dt = 0.0;
    double tau = 0.0, tau_bar = 0.0;
    std::size_t delay_cells = 0;   // delay-line cells, round(tau / dt)
    std::size_t history_steps = 0; // controller history samples, round(tau_bar / dt)
    std::string controller;
};

struct SimTrajectory {
    std::vector<Snapshot> snapshots;
    std::vector<double> t, l2, sup, U;
    std::vector<double> U_actuator_form; // the v-state form of the compensated law, for the dual check
    RunMetadata meta;
};

struct SimOptions {
    double dt = 0.01;
    double t_end = 1.0;
    std::size_t snapshot_every = 10; // steps between snapshots; 0 keeps only the first and last
};

/// sqrt(int u1^2 + int u2^2) by trapezoid.
double l2_norm(std::span<const double> u1, std::span<const double> u2, double h);

/// First-order upwind integrator of the plant plus its delay line.
///
/// The delay line carries round(tau/dt) cells so its Courant number is one
/// and the transport is an exact shift.
class Simulator {
public:
    Simulator(PlantParams params, Grid1D grid, double dt, Controller controller);

    const Grid1D& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    std::size_t delay_cells() const noexcept { return nv_; }
    const InputHistory& history() const noexcept { return history_; }

    SimState initial_state(std::span<const double> u10, std::span<const double> u20) const;
    /// Advances one time step: transport, sources, boundary conditions, then the next control value.
    void step(SimState& s);
    /// The compensated law in v-state form for the current state (0 for other kinds).
    double actuator_form(const SimState& s) const;

    /// v on the spatial grid.
    std::vector<double> v_on_grid(const SimState& s) const;

    RunMetadata metadata(std::size_t steps) const;

private:
    double control(const SimState& s) const;

    PlantParams params_;
    Grid1D grid_;
    double dt_;
    Controller controller_;
    std::vector<double> eps1_, eps2_, c1_, c2_;
    std::size_t nv_;
    InputHistory history_;
    std::vector<double> scratch1_, scratch2_;
};

SimTrajectory simulate(const PlantParams& params, const Grid1D& grid, std::span<const double> u10,
                       std::span<const double> u20, const Controller& controller, const SimOptions& opts);

/// Target-system fields (w1, w2, z) on the spatial grid.
struct TargetState {
    std::vector<double> w1, w2, z;
    double t = 0.0;
};

/// Solution of the decoupled cascade by characteristics; initial data are
/// sampled on `grid` and interpolated.
TargetState target_explicit(const TargetState& initial, const PlantParams& params, const Grid1D& grid, double t);

/// Everything the forward and inverse transformations need, on one grid.
struct TransformKernels {
    TriangleKernelSet tri;
    RectKernelPair alpha, beta;
    std::vector<double> p, mu;
};

struct PhysicalState {
    std::vector<double> u1, u2, v;
};

TargetState transform_forward(const PhysicalState& s, const TransformKernels& k);
PhysicalState transform_inverse(const TargetState& w, const TransformKernels& k);

} // namespace delaycomp

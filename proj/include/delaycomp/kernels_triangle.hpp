#pragma once

#include <array>
#include <span>
#include <vector>

#include "delaycomp/grid.hpp"
#include "delaycomp/plant.hpp"

namespace delaycomp {

/// Scalar kernel sampled on the triangular lattice {(x_i, y_j) : j <= i}.
class KernelFieldTriangle {
public:
    KernelFieldTriangle() : KernelFieldTriangle(Grid1D(2)) {}
    explicit KernelFieldTriangle(Grid1D grid)
        : grid_(grid), values_(grid.size() * (grid.size() + 1) / 2, 0.0) {}

    const Grid1D& grid() const noexcept { return grid_; }

    double operator()(std::size_t i, std::size_t j) const { return values_[offset(i, j)]; }
    double& at(std::size_t i, std::size_t j) { return values_[offset(i, j)]; }

    /// Linear interpolation at (x, y) with y <= x; diagonal cells use the
    /// lower sub-triangle so no sample above the diagonal is touched.
    double sample(double x, double y) const;

    /// Row x = x_i as a vector over j = 0..i.
    std::vector<double> row(std::size_t i) const;
    /// Trace at x = 1, one value per grid node.
    std::vector<double> trace_at_one() const { return row(grid_.size() - 1); }

    double max_abs() const;
    std::span<const double> raw() const noexcept { return values_; }

private:
    std::size_t offset(std::size_t i, std::size_t j) const {
        if (j > i || i >= grid_.size()) throw Error(ErrorCode::OutOfDomain, "triangle kernel accessed above the diagonal");
        return i * (i + 1) / 2 + j;
    }

    Grid1D grid_;
    std::vector<double> values_;
};

struct DirectKernels {
    KernelFieldTriangle K11, K12, K21, K22;
    std::size_t iterations = 0;
    double final_update = 0.0;
};

struct InverseKernels {
    KernelFieldTriangle L11, L12, L21, L22;
    std::size_t iterations = 0;
    double final_update = 0.0;
};

struct TriangleKernelSet {
    DirectKernels K;
    InverseKernels L;
};

struct TriangleSolverOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 200;
};

/// Direct kernels of the Volterra maps w = u - int K u, solved as a Goursat
/// problem by successive approximation along characteristics.
DirectKernels solve_K(const PlantParams& params, const Grid1D& grid, const TriangleSolverOptions& opts = {});

/// Inverse kernels from the resolvent identity L = K + K o L (Neumann series).
InverseKernels solve_L(const PlantParams& params, const Grid1D& grid, const DirectKernels& K,
                       const TriangleSolverOptions& opts = {});

/// Inverse kernels from their own Goursat system; used as a cross-check of solve_L.
InverseKernels solve_L_goursat(const PlantParams& params, const Grid1D& grid,
                               const TriangleSolverOptions& opts = {});

/// int_0^1 K21(1,y) u1 dy + int_0^1 K22(1,y) u2 dy, by trapezoid.
double nominal_control(std::span<const double> K21_trace, std::span<const double> K22_trace,
                       std::span<const double> u1, std::span<const double> u2, double h);

/// Residuals of the discretized direct-kernel PDEs (first-order one-sided
/// differences), sup and mean over lattice nodes with a full stencil.
struct TriangleResidual {
    double sup = 0.0;
    double mean = 0.0;
};
std::array<TriangleResidual, 4> direct_kernel_residual(const PlantParams& params, const DirectKernels& K);

} // namespace delaycomp

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "delaycomp/field.hpp"
#include "delaycomp/plant.hpp"

namespace delaycomp {

/// Coupled kernel problem on the unit square:
///
///   F1_x / tau - eps1(y) F1_y = g1 + C11 F1 + C12 F2
///   F2_x / tau + eps2(y) F2_y = g2 + C21 F1 + C22 F2
///   F1(x,1) = 0,  F1(0,y) = h1(y),  F2(x,0) = q1(x) F1(x,0),  F2(0,y) = h2(y)
///
/// The compensator kernels (alpha) and the inverse-map kernels (beta) are
/// both instances.
struct GeneralKernelProblem {
    Grid1D grid;
    double tau = 1.0;
    std::vector<double> eps1, eps2;
    SquareField C11, C12, C21, C22;
    SquareField g1, g2;
    std::vector<double> h1, h2, q1;

    void validate() const;
};

enum class RegionF1 : std::uint8_t {
    ReachesTop,  // backward characteristic ends on y = 1 (F1 = 0 there)
    ReachesLeft, // ends on x = 0 (F1 = h1)
};

enum class RegionF2 : std::uint8_t {
    BottomFootTop,  // ends on y = 0 at a point whose F1 characteristic reaches y = 1
    BottomFootLeft, // ends on y = 0 at a point whose F1 characteristic reaches x = 0
    ReachesLeft,    // ends on x = 0 (F2 = h2)
};

enum class Branch { F1ToTop, F1ToLeft, F2ToBottom, F2ToLeft };

/// Backward characteristic sampled in its parameter s; s = 0 is the
/// boundary end and s = terminal is the starting point (x, y).
struct CharacteristicCurve {
    double terminal = 0.0;
    std::vector<double> s, x, y;
};

/// Travel maps and geometry shared by every evaluation of one problem.
class CharacteristicGeometry {
public:
    CharacteristicGeometry(const Grid1D& grid, std::span<const double> eps1, std::span<const double> eps2,
                           double tau);

    double tau() const noexcept { return tau_; }
    const TravelMap& phi1() const noexcept { return phi1_; }
    const TravelMap& phi2() const noexcept { return phi2_; }

    /// Parameter length of the branch from (x, y).
    double terminal(Branch b, double x, double y) const;
    /// Point on the branch at parameter s.
    void point(Branch b, double x, double y, double s, double& xs, double& ys) const;

    RegionF1 region_f1(double x, double y) const;
    RegionF2 region_f2(double x, double y) const;

    /// Largest parameter step keeping each step within one lattice cell.
    double max_step() const noexcept { return max_step_; }

private:
    Grid1D grid_;
    double tau_;
    TravelMap phi1_, phi2_;
    double max_step_;
};

CharacteristicCurve characteristics(const GeneralKernelProblem& problem, double x, double y, Branch branch,
                                    std::size_t samples = 0);

/// Region label of (x, y) for F1 or F2; ties go to the y-boundary branch.
RegionF1 region_of_f1(const GeneralKernelProblem& problem, double x, double y);
RegionF2 region_of_f2(const GeneralKernelProblem& problem, double x, double y);

struct RectKernelPair {
    SquareField F1, F2;
    Grid1D grid;
    std::vector<RegionF1> region_f1; // per node, index i * n + j
    std::vector<RegionF2> region_f2;
    std::vector<double> term_norms;  // sup norm of each successive-approximation term
    std::size_t terms = 0;
};

struct RectSolverOptions {
    double term_tolerance = 1e-12;
    std::size_t max_terms = 200;
};

/// Sums the successive-approximation series F = sum_n F^n, where F^0 holds
/// the boundary data and sources and F^{n+1} is the homogeneous integral
/// operator applied to F^n.
RectKernelPair solve_general(const GeneralKernelProblem& problem, const RectSolverOptions& opts = {});

/// Picard iteration F <- F^0 + I[F] from an arbitrary starting pair; used to
/// probe uniqueness of the fixed point.
RectKernelPair solve_fixed_point(const GeneralKernelProblem& problem, const SquareField& F1_start,
                                 const SquareField& F2_start, const RectSolverOptions& opts = {});

/// Constants of the factorial growth bound |F^n| <= M0 (Cbar Meps)^n / n!.
struct SeriesBound {
    double M0 = 0.0;
    double Cbar = 0.0;
    double Meps = 0.0;
    double qbar = 0.0;
    double bound(std::size_t n) const;
};
SeriesBound series_bound(const GeneralKernelProblem& problem, const RectKernelPair& first_term);
/// F^0 only, the inhomogeneous part of the integral equations.
RectKernelPair initial_term(const GeneralKernelProblem& problem);

/// alpha problem: tau_eff = controller delay, couplings (eps1', c2; c1, -eps2'),
/// boundary data from the direct-kernel traces K21(1,.) and K22(1,.).
GeneralKernelProblem alpha_problem(const PlantParams& params, const Grid1D& grid, std::span<const double> K21_trace,
                                   std::span<const double> K22_trace, double tau_eff);
/// beta problem (kernels of the inverse map for the actuator state).
GeneralKernelProblem beta_problem(const PlantParams& params, const Grid1D& grid, std::span<const double> L21_trace,
                                  std::span<const double> L22_trace, double tau_eff);

enum class GainKind { P, Mu };

struct GainTrace {
    std::vector<double> values;
    GainKind kind = GainKind::P;
};

/// tau_eff * eps2(1) * F2(x, 1).
GainTrace gain_traces(const RectKernelPair& pair, const GeneralKernelProblem& problem, GainKind kind);

/// Residual of the discretized kernel PDEs with first-order upwind
/// differences, restricted to nodes whose stencil stays inside one region
/// (the kernels jump across region boundaries).
struct RectResidual {
    double f1_mean = 0.0, f2_mean = 0.0;
    double f1_sup = 0.0, f2_sup = 0.0;
    std::size_t f1_nodes = 0, f2_nodes = 0;
    double mean() const { return 0.5 * (f1_mean + f2_mean); }
};
RectResidual rect_residual(const GeneralKernelProblem& problem, const RectKernelPair& pair);

} // namespace delaycomp

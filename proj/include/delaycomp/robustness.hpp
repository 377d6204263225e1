#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "delaycomp/kernels_rectangle.hpp"
#include "delaycomp/kernels_triangle.hpp"

namespace delaycomp {

using cplx = std::complex<double>;

/// Kernel traces entering the characteristic function for a delay mismatch
/// tau_bar - tau. Barred quantities are built with tau_bar.
struct MismatchData {
    Grid1D grid;
    GainTrace mu, mu_bar;
    std::vector<double> beta1, beta2, beta1_bar, beta2_bar; // beta_i(1, .)
    std::vector<double> phi1, phi2;                         // travel maps on the grid
    GainTrace p_bar;                                        // compensator gain built with tau_bar (optional)
    double q = 0.0;
    double tau = 1.0, tau_bar = 1.0, delta_tau = 0.0;

    void validate() const;
};

/// Solves the beta problems for tau and tau_bar from the inverse-kernel
/// traces and the alpha problem for tau_bar (for p_bar).
MismatchData build_mismatch(const PlantParams& params, const Grid1D& grid, const TriangleKernelSet& tri,
                            const RectSolverOptions& opts = {});

/// Sum of c_k exp(-d_k s) with d_k >= 0.
struct ExponentialSum {
    std::vector<double> coeff, delay;
    cplx operator()(cplx s) const;
};

/// H_1..H_6 as exponential sums. The data are interpolated linearly onto a
/// grid `refine` times finer and integrated by trapezoid.
std::array<ExponentialSum, 6> h_terms(const MismatchData& data, std::size_t refine = 4);

/// H_i(s), i = 1..6.
cplx eval_H(const MismatchData& data, int i, cplx s, std::size_t refine = 4);
/// P(s) = 1 - sum_i H_i(s).
cplx eval_P(const MismatchData& data, cplx s, std::size_t refine = 4);

/// Characteristic function of the loop closed by the tau_bar history law
/// around the plant with delay tau:
///
///   Q(s) = 1 - (e^{-tau s} - e^{-tau_bar s}) Phi(s),
///   Phi(s) = -M(s) + (1 - Pbar(s)) B(s),
///
/// with M(s) = int mu_bar(1-y) int_y^1 p_bar(xi) e^{-tau_bar (xi-y) s} dxi dy,
/// Pbar(s) = int p_bar(xi) e^{-tau_bar xi s} dxi and
/// B(s) = int q beta1_bar(1,y) e^{-(phi1(y)+phi2(1)) s} + beta2_bar(1,y) e^{-(phi2(1)-phi2(y)) s} dy.
/// It follows from the tau_bar target coordinates, in which the
/// mismatch e(t) = U(t-tau) - U(t-tau_bar) enters as a source p_bar(x) e(t)
/// in the z equation and as an offset in w2(1,t).
cplx eval_closed_loop(const MismatchData& data, cplx s, std::size_t refine = 4);

struct ScanWindow {
    double sigma_max = 2.0;
    double omega_max = 40.0;
    std::size_t n_omega = 2000;
    std::size_t n_sigma = 200;
    double contour_threshold = 1e-6;
    std::size_t refine = 4;
};

struct StabilityReport {
    std::vector<double> sigma, omega;  // sample axes
    std::vector<double> abs_P;         // |P|, index i_sigma * n_omega + i_omega
    double min_margin = 0.0;           // min over samples of 1 - sum |H_i| (NaN for a bare P)
    double min_abs_P_contour = 0.0;
    int zero_count = 0;
    double winding_raw = 0.0;          // accumulated phase / 2 pi
    std::size_t contour_samples = 0;
    cplx min_abs_P_at{0.0, 0.0};       // sample with the smallest |P| in the window
    bool stable = false;
};

/// Samples P on the window and counts zeros inside by the argument principle.
StabilityReport scan_P(const MismatchData& data, const ScanWindow& window = {});
/// Same for Q(s) of eval_closed_loop; min_margin is min of 1 - |(e^{-tau s} - e^{-tau_bar s}) Phi(s)|.
StabilityReport scan_closed_loop(const MismatchData& data, const ScanWindow& window = {});
/// Same for an arbitrary analytic function (used for calibration).
StabilityReport scan_P(const std::function<cplx(cplx)>& P, const ScanWindow& window);

/// Number of zeros of f inside the window's rectangle, counted by phase
/// accumulation along its boundary. Throws InconclusiveContour when |f|
/// falls below the threshold on the boundary.
int winding_number(const std::function<cplx(cplx)>& f, const ScanWindow& window, double* raw = nullptr,
                   double* min_abs = nullptr, std::size_t* samples = nullptr);

struct MarginResult {
    double margin = 0.0;
    std::vector<std::pair<double, bool>> probes; // (delta_tau, stable)
};

enum class CharacteristicModel { HSum, ClosedLoop };

/// Largest delta_tau in [lo, hi] with a stable verdict, by bisection. The
/// tau_bar side kernels are rebuilt for every probe.
MarginResult margin_search(const PlantParams& params, const Grid1D& grid, const TriangleKernelSet& tri, double lo,
                           double hi, const ScanWindow& window = {}, std::size_t bisections = 8,
                           CharacteristicModel model = CharacteristicModel::ClosedLoop);

} // namespace delaycomp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "delaycomp/robustness.hpp"

using namespace delaycomp;

namespace {

PlantParams baseline(double tau_bar) {
    PlantParams p;
    p.eps1 = p.eps2 = p.c1 = p.c2 = Profile::constant(1.0);
    p.q = 1.0;
    p.tau = 3.0;
    p.tau_bar = tau_bar;
    return p;
}

// int (mu_bar - mu) by trapezoid on the data grid.
double trapezoid_difference(const MismatchData& d) {
    std::vector<double> diff(d.mu.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = d.mu_bar.values[i] - d.mu.values[i];
    return trapezoid(diff, d.grid.h());
}

ScanWindow small_window() {
    ScanWindow w;
    w.sigma_max = 2.0;
    w.omega_max = 20.0;
    w.n_omega = 400;
    w.n_sigma = 40;
    return w;
}

} // namespace

TEST_CASE("exponential sums evaluate term by term") {
    const ExponentialSum e{{2.0, -1.0}, {0.0, 1.5}};
    const cplx s{0.3, 2.0};
    CHECK(std::abs(e(s) - (2.0 - std::exp(-1.5 * s))) < 1e-14);
}

TEST_CASE("winding number counts zeros of polynomials") {
    const ScanWindow w = small_window();
    auto two = [](cplx s) { return (s - cplx(0.5, 1.0)) * (s - cplx(1.5, -3.0)); };
    CHECK(winding_number(two, w) == 2);
    auto none = [](cplx s) { return s + 1.0; };
    CHECK(winding_number(none, w) == 0);
    auto on_edge = [](cplx s) { return s - cplx(0.0, 1.0); };
    CHECK_THROWS_AS(winding_number(on_edge, w), Error);
}

TEST_CASE("neutral calibration: 1 - 2 e^{-s} has its root at ln 2") {
    ScanWindow w;
    w.omega_max = 3.0;
    w.n_omega = 600;
    w.n_sigma = 200;
    const StabilityReport r = scan_P([](cplx s) { return 1.0 - 2.0 * std::exp(-s); }, w);
    CHECK(r.zero_count == 1);
    CHECK_FALSE(r.stable);
    CHECK(r.min_abs_P_at.real() == doctest::Approx(std::log(2.0)).epsilon(0.02));
    CHECK(std::isnan(r.min_margin));
}

TEST_CASE("exact delay: P and Q are identically one") {
    const Grid1D g(41);
    const PlantParams p = baseline(3.0);
    TriangleKernelSet tri;
    tri.K = solve_K(p, g);
    tri.L = solve_L(p, g, tri.K);
    const MismatchData d = build_mismatch(p, g, tri);
    CHECK(d.delta_tau == 0.0);
    for (cplx s : {cplx(0.0, 0.0), cplx(0.5, 10.0), cplx(2.0, -33.0)}) {
        CHECK(std::abs(eval_P(d, s) - 1.0) <= 1e-12);
        CHECK(std::abs(eval_closed_loop(d, s) - 1.0) <= 1e-12);
    }
    const StabilityReport r = scan_P(d, small_window());
    CHECK(r.stable);
    CHECK(r.zero_count == 0);
}

TEST_CASE("P is one minus the sum of the H terms") {
    const Grid1D g(41);
    const PlantParams p = baseline(3.2);
    TriangleKernelSet tri;
    tri.K = solve_K(p, g);
    tri.L = solve_L(p, g, tri.K);
    const MismatchData d = build_mismatch(p, g, tri);
    CHECK(d.delta_tau == doctest::Approx(0.2));
    const cplx s{0.2, 1.7};
    cplx sum = 0.0;
    for (int i = 1; i <= 6; ++i) sum += eval_H(d, i, s);
    CHECK(std::abs(eval_P(d, s) - (1.0 - sum)) < 1e-12);
    // On the real axis far right every delayed term vanishes.
    CHECK(std::abs(eval_closed_loop(d, {60.0, 0.0}) - 1.0) < 1e-12);

    const StabilityReport r = scan_closed_loop(d, small_window());
    CHECK(r.stable);
    CHECK(r.min_margin > 0.0);
    CHECK(r.abs_P.size() == 400 * 40);

    // Endpoint values at s = 0.
    CHECK(std::abs(eval_H(d, 1, 0.0)) < 1e-14);
    CHECK(std::abs(eval_H(d, 2, 0.0) - trapezoid_difference(d)) < 1e-12);

    // Smallness of the H terms on the imaginary axis.
    double worst = 0.0;
    for (int k = -2000; k <= 2000; ++k) {
        const cplx s{0.0, 0.02 * k};
        double sum = 0.0;
        for (int i = 1; i <= 6; ++i) sum += std::abs(eval_H(d, i, s));
        worst = std::max(worst, sum);
    }
    CHECK(worst < 1.0);
}

TEST_CASE("stable verdicts are monotone in the mismatch") {
    const Grid1D g(41);
    TriangleKernelSet tri;
    const PlantParams base = baseline(3.0);
    tri.K = solve_K(base, g);
    tri.L = solve_L(base, g, tri.K);
    const StabilityReport b = scan_closed_loop(build_mismatch(baseline(3.2), g, tri), small_window());
    const StabilityReport a = scan_closed_loop(build_mismatch(baseline(3.1), g, tri), small_window());
    REQUIRE(b.stable);
    CHECK(a.stable);
}

TEST_CASE("margin search on a trivial range probes only the endpoint") {
    const Grid1D g(31);
    const PlantParams p = baseline(3.0);
    TriangleKernelSet tri;
    tri.K = solve_K(p, g);
    tri.L = solve_L(p, g, tri.K);
    const MarginResult m = margin_search(p, g, tri, 0.0, 0.0, small_window(), 4);
    CHECK(m.margin == 0.0);
    CHECK(m.probes.size() == 1);
    CHECK(m.probes.front().second);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "delaycomp/kernels_triangle.hpp"

using namespace delaycomp;

namespace {

PlantParams coupled() {
    PlantParams p;
    p.eps1 = Profile::function([](double x) { return 1.0 + 0.3 * x; });
    p.eps2 = Profile::constant(0.8);
    p.c1 = Profile::constant(1.0);
    p.c2 = Profile::function([](double x) { return 0.5 + x; });
    p.q = 1.2;
    return p;
}

// u - int_0^x (K11 u1 + K12 u2), then + int_0^x (L11 w1 + L12 w2): the
// inverse map must recover u.
double round_trip(const DirectKernels& K, const InverseKernels& L) {
    const Grid1D g = K.K11.grid();
    const std::size_t n = g.size();
    const double h = g.h();
    std::vector<double> u1(n), u2(n), w1(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) {
        u1[i] = std::cos(3.0 * g.x(i));
        u2[i] = g.x(i) * g.x(i) - 0.5;
    }
    auto apply = [&](const KernelFieldTriangle& A, const KernelFieldTriangle& B, std::size_t i,
                     const std::vector<double>& a, const std::vector<double>& b) {
        if (i == 0) return 0.0;
        double acc = 0.5 * (A(i, 0) * a[0] + B(i, 0) * b[0] + A(i, i) * a[i] + B(i, i) * b[i]);
        for (std::size_t j = 1; j < i; ++j) acc += A(i, j) * a[j] + B(i, j) * b[j];
        return acc * h;
    };
    for (std::size_t i = 0; i < n; ++i) {
        w1[i] = u1[i] - apply(K.K11, K.K12, i, u1, u2);
        w2[i] = u2[i] - apply(K.K21, K.K22, i, u1, u2);
    }
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e = std::max(e, std::abs(w1[i] + apply(L.L11, L.L12, i, w1, w2) - u1[i]));
        e = std::max(e, std::abs(w2[i] + apply(L.L21, L.L22, i, w1, w2) - u2[i]));
    }
    return e;
}

} // namespace

TEST_CASE("uncoupled plant has zero kernels") {
    PlantParams p;
    const Grid1D g(31);
    const DirectKernels K = solve_K(p, g);
    const InverseKernels L = solve_L(p, g, K);
    CHECK(K.K11.max_abs() == 0.0);
    CHECK(K.K22.max_abs() == 0.0);
    CHECK(L.L12.max_abs() == 0.0);
    CHECK(L.L21.max_abs() == 0.0);
}

TEST_CASE("direct-kernel PDE residual is first order") {
    const PlantParams p = coupled();
    const auto r1 = direct_kernel_residual(p, solve_K(p, Grid1D(41)));
    const auto r2 = direct_kernel_residual(p, solve_K(p, Grid1D(81)));
    for (int k = 0; k < 4; ++k) {
        if (r1[k].mean < 1e-12) continue;
        const double ratio = r1[k].mean / r2[k].mean;
        CHECK(ratio > 1.5);
        CHECK(ratio < 2.6);
    }
}

TEST_CASE("inverse kernels: resolvent agrees with the Goursat solve and inverts the map") {
    const PlantParams p = coupled();
    auto gap_at = [&](std::size_t n) {
        const Grid1D g(n);
        const DirectKernels K = solve_K(p, g);
        const InverseKernels L = solve_L(p, g, K);
        const InverseKernels G = solve_L_goursat(p, g);
        double gap = 0.0;
        for (std::size_t q = 0; q < L.L11.raw().size(); ++q)
            gap = std::max({gap, std::abs(L.L11.raw()[q] - G.L11.raw()[q]), std::abs(L.L12.raw()[q] - G.L12.raw()[q]),
                            std::abs(L.L21.raw()[q] - G.L21.raw()[q]), std::abs(L.L22.raw()[q] - G.L22.raw()[q])});
        return std::pair{gap, round_trip(K, L)};
    };
    const auto [g1, rt1] = gap_at(41);
    const auto [g2, rt2] = gap_at(81);
    CHECK(g2 < g1);
    CHECK(g2 < 0.05);
    CHECK(rt2 < 1e-3);
}

TEST_CASE("triangle field access and sampling") {
    const Grid1D g(5);
    KernelFieldTriangle f(g);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j <= i; ++j) f.at(i, j) = g.x(i) + 2.0 * g.x(j);
    CHECK(f.sample(0.6, 0.3) == doctest::Approx(1.2));
    CHECK(f.trace_at_one().size() == 5);
    CHECK_THROWS_AS(f(1, 2), Error);
}

TEST_CASE("nominal control is a trapezoid of the traces") {
    const std::vector<double> k{1, 1, 1}, z{0, 0, 0}, u{0, 1, 2};
    CHECK(nominal_control(k, z, u, u, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("q = 0 with c1 != 0 is rejected") {
    PlantParams p = coupled();
    p.q = 0.0;
    CHECK_THROWS_AS(solve_K(p, Grid1D(21)), Error);
}

TEST_CASE("baseline configuration: round trip on sin(2 pi y) within 5h, resolvent vs Goursat within 5h") {
    PlantParams p;
    p.eps1 = p.eps2 = p.c1 = p.c2 = Profile::constant(1.0);
    p.q = 1.0;
    const Grid1D g(101);
    const DirectKernels K = solve_K(p, g);
    const InverseKernels L = solve_L(p, g, K);
    const InverseKernels G = solve_L_goursat(p, g);
    double gap = 0.0;
    for (std::size_t q = 0; q < L.L22.raw().size(); ++q)
        gap = std::max({gap, std::abs(L.L11.raw()[q] - G.L11.raw()[q]), std::abs(L.L12.raw()[q] - G.L12.raw()[q]),
                        std::abs(L.L21.raw()[q] - G.L21.raw()[q]), std::abs(L.L22.raw()[q] - G.L22.raw()[q])});
    CHECK(gap <= 5 * g.h());

    const std::size_t n = g.size();
    std::vector<double> u(n), w1(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::sin(2.0 * std::numbers::pi * g.x(i));
    auto row = [&](const KernelFieldTriangle& A, const KernelFieldTriangle& B, std::size_t i,
                   const std::vector<double>& a, const std::vector<double>& b) {
        if (i == 0) return 0.0;
        double acc = 0.5 * (A(i, 0) * a[0] + B(i, 0) * b[0] + A(i, i) * a[i] + B(i, i) * b[i]);
        for (std::size_t j = 1; j < i; ++j) acc += A(i, j) * a[j] + B(i, j) * b[j];
        return acc * g.h();
    };
    for (std::size_t i = 0; i < n; ++i) {
        w1[i] = u[i] - row(K.K11, K.K12, i, u, u);
        w2[i] = u[i] - row(K.K21, K.K22, i, u, u);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        err = std::max({err, std::abs(w1[i] + row(L.L11, L.L12, i, w1, w2) - u[i]),
                        std::abs(w2[i] + row(L.L21, L.L22, i, w1, w2) - u[i])});
    CHECK(err <= 5 * g.h());

    const auto tr = K.K22.trace_at_one();
    for (double v : tr) CHECK(std::isfinite(v));
    const auto r1 = direct_kernel_residual(p, solve_K(p, Grid1D(51)));
    const auto r2 = direct_kernel_residual(p, K);
    CHECK(r1[2].mean / r2[2].mean == doctest::Approx(2.0).epsilon(0.2)); // K21
}

TEST_CASE("nominal control examples") {
    const std::vector<double> zero(11, 0.0), one(11, 1.0), u(11, 0.7);
    CHECK(nominal_control(one, one, zero, zero, 0.1) == 0.0);
    CHECK(nominal_control(zero, zero, u, u, 0.1) == 0.0);
    CHECK(nominal_control(one, one, one, one, 0.1) == doctest::Approx(2.0));
}

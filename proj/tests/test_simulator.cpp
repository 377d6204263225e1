#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "delaycomp/pipeline.hpp"
#include "delaycomp/simulator.hpp"

using namespace delaycomp;

namespace {

constexpr double kPi = std::numbers::pi;

// c = 0, q = 0, U = 0: u2 moves left at speed eps2 and leaves through x = 0.
// Returns the mean absolute error at t = 1.
double transport_error(std::size_t n, double (*profile)(double)) {
    PlantParams p;
    p.eps2 = Profile::constant(0.5);
    p.q = 0.0;
    p.tau = p.tau_bar = 1.0;
    const Grid1D g(n);
    std::vector<double> u1(n, 0.0), u2(n);
    for (std::size_t i = 0; i < n; ++i) u2[i] = profile(g.x(i));
    const SimTrajectory tr = simulate(p, g, u1, u2, Controller::open_loop(), {g.h(), 1.0, 0});
    const Snapshot& last = tr.snapshots.back();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = g.x(i) + 0.5 * last.t;
        const double exact = s <= 1.0 ? profile(s) : 0.0;
        e += (std::abs(last.u2[i] - exact) + std::abs(last.u1[i])) / static_cast<double>(n);
    }
    return e;
}

PlantParams baseline() {
    PlantParams p;
    p.eps1 = p.eps2 = p.c1 = p.c2 = Profile::constant(1.0);
    p.q = 1.0;
    p.tau = p.tau_bar = 3.0;
    return p;
}

} // namespace

double sin2pi(double x) { return std::sin(2.0 * kPi * x); }
double smooth_bump(double x) { return std::pow(std::sin(kPi * x), 4); }

TEST_CASE("pure transport converges to the translated profile") {
    // sin(2 pi x) has a kink where it leaves through x = 0, so only the mean
    // error is first order; the sup error there converges like sqrt(h).
    for (auto profile : {sin2pi, smooth_bump}) {
        const double e1 = transport_error(101, profile), e2 = transport_error(201, profile);
        CHECK(e1 <= 10 * 0.01);
        CHECK(e1 / e2 > 1.6);
        CHECK(e1 / e2 < 2.4);
    }
}

TEST_CASE("CFL violation is reported before running") {
    PlantParams p;
    p.eps1 = Profile::constant(2.0);
    CHECK_THROWS_AS(Simulator(p, Grid1D(11), 0.1, Controller::open_loop()), Error);
    CHECK_NOTHROW(Simulator(p, Grid1D(11), 0.05, Controller::open_loop()));
}

TEST_CASE("blow-up is detected") {
    PlantParams p = baseline();
    const Grid1D g(21);
    std::vector<double> u(21, 1.0), huge(21, 1e300);
    CHECK_THROWS_AS(simulate(p, g, u, u, Controller::nominal(huge, huge), {0.05, 4.0, 0}), Error);
}

TEST_CASE("run metadata and snapshot cadence") {
    PlantParams p = baseline();
    p.tau_bar = 3.2;
    const Grid1D g(21);
    std::vector<double> u(21, 0.0);
    const SimTrajectory tr = simulate(p, g, u, u, Controller::open_loop(), {0.05, 1.0, 5});
    CHECK(tr.meta.steps == 20);
    CHECK(tr.meta.delay_cells == 60);
    CHECK(tr.meta.history_steps == 0); // no controller history in open loop
    CHECK(tr.t.size() == 21);
    CHECK(tr.snapshots.size() == 5);
    CHECK(tr.meta.controller == "open_loop");
    CHECK(l2_norm(u, u, g.h()) == 0.0);
}

TEST_CASE("explicit target solution") {
    PlantParams p;
    p.q = 2.0;
    p.tau = p.tau_bar = 2.0;
    const Grid1D g(101);
    TargetState init;
    init.w1 = init.w2 = init.z = std::vector<double>(101);
    for (std::size_t i = 0; i < 101; ++i) {
        const double x = g.x(i);
        init.w1[i] = x;
        init.w2[i] = 1.0 - x;
        init.z[i] = x * (1.0 - x);
    }
    CHECK(target_explicit(init, p, g, -1.0).w1 == init.w1);
    const TargetState a = target_explicit(init, p, g, 0.25);
    CHECK(a.w1[100] == doctest::Approx(0.75));
    CHECK(a.w1[0] == doctest::Approx(2.0 * 0.75));
    CHECK(a.w2[50] == doctest::Approx(0.25));
    CHECK(a.z[50] == doctest::Approx(0.625 * 0.375).epsilon(1e-3));
    // w2(0, t) for t > 1 reads z(0, t - 1) = z0((t - 1) / tau).
    const TargetState b = target_explicit(init, p, g, 1.5);
    CHECK(b.w2[0] == doctest::Approx(0.25 * 0.75));
    const TargetState c = target_explicit(init, p, g, t_final(p));
    CHECK(*std::max_element(c.w1.begin(), c.w1.end()) == doctest::Approx(0.0));
}

TEST_CASE("compensated run: both forms of the law agree after the first step") {
    const Grid1D g(51);
    const PlantParams p = baseline();
    const KernelBundle k = solve_kernels(p, g);
    std::vector<double> u(51);
    for (std::size_t i = 0; i < 51; ++i) u[i] = std::sin(2.0 * kPi * g.x(i));
    const SimTrajectory tr =
        simulate(p, g, u, u, make_controller(ControllerKind::Compensated, k, g), {g.h(), 6.0, 0});
    double gap = 0.0;
    for (std::size_t s = 1; s < tr.U.size(); ++s) gap = std::max(gap, std::abs(tr.U[s] - tr.U_actuator_form[s]));
    CHECK(gap <= 5 * g.h());
    CHECK(tr.meta.history_steps == 150);
    CHECK(tr.l2.back() < 0.05 * tr.l2.front());
}

TEST_CASE("uncoupled transforms reduce to the identity") {
    PlantParams p;
    p.tau = p.tau_bar = 1.0;
    const Grid1D g(21);
    const KernelBundle k = solve_kernels(p, g);
    const TransformKernels tk{k.tri, k.alpha, k.beta, k.p.values, k.mu.values};
    PhysicalState s{std::vector<double>(21, 1.0), std::vector<double>(21, -2.0), std::vector<double>(21, 0.5)};
    const TargetState w = transform_forward(s, tk);
    CHECK(w.w1 == s.u1);
    CHECK(w.w2 == s.u2);
    CHECK(w.z == s.v);
    CHECK_THROWS_AS(transform_forward({s.u1, s.u2, std::vector<double>(3)}, tk), Error);
}

TEST_CASE("controller kinds parse") {
    CHECK(controller_kind_from_string("nominal") == ControllerKind::Nominal);
    CHECK(to_string(ControllerKind::Compensated) == "compensated");
    CHECK_THROWS_AS(controller_kind_from_string("pid"), Error);
}

TEST_CASE("zero state stays at zero under every controller") {
    const Grid1D g(21);
    const PlantParams p = baseline();
    const KernelBundle k = solve_kernels(p, g);
    std::vector<double> z(21, 0.0);
    for (auto kind : {ControllerKind::OpenLoop, ControllerKind::Nominal, ControllerKind::Compensated}) {
        const SimTrajectory tr = simulate(p, g, z, z, make_controller(kind, k, g), {0.05, 4.0, 10});
        CHECK(*std::max_element(tr.l2.begin(), tr.l2.end()) == 0.0);
        for (double u : tr.U) CHECK(u == 0.0);
    }
}

TEST_CASE("explicit target: hand-evaluated transport and finite-time extinction") {
    PlantParams p;
    p.tau = p.tau_bar = 3.0;
    const Grid1D g(101);
    TargetState init{std::vector<double>(101, 0.0), std::vector<double>(101), std::vector<double>(101, 0.0), 0.0};
    for (std::size_t i = 0; i < 101; ++i) init.w2[i] = std::sin(2.0 * kPi * g.x(i));
    const TargetState w = target_explicit(init, p, g, 0.25);
    for (std::size_t i = 0; i < 101; ++i) {
        const double x = g.x(i);
        const double exact = x <= 0.75 ? std::sin(2.0 * kPi * (x + 0.25)) : 0.0;
        CHECK(w.w2[i] == doctest::Approx(exact).epsilon(1e-3).scale(1.0));
    }
    init.w1.assign(101, 1.0);
    init.z.assign(101, 0.3);
    const TargetState done = target_explicit(init, p, g, t_final(p) + 1e-9);
    for (std::size_t i = 0; i < 101; ++i) {
        CHECK(done.w1[i] == 0.0);
        CHECK(done.w2[i] == 0.0);
        CHECK(done.z[i] == 0.0);
    }
}

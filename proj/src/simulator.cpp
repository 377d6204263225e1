#include "delaycomp/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace delaycomp {

std::string to_string(ControllerKind kind) {
    switch (kind) {
    case ControllerKind::Compensated: return "compensated";
    case ControllerKind::Nominal: return "nominal";
    case ControllerKind::OpenLoop: return "open_loop";
    }
    return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
    if (name == "compensated") return ControllerKind::Compensated;
    if (name == "nominal") return ControllerKind::Nominal;
    if (name == "open_loop") return ControllerKind::OpenLoop;
    throw Error(ErrorCode::ConfigError, "unknown controller kind '" + name + "'");
}

Controller Controller::compensated(ControllerGains g) {
    Controller c;
    c.kind = ControllerKind::Compensated;
    c.gains = std::move(g);
    return c;
}

Controller Controller::nominal(std::vector<double> k21_trace, std::vector<double> k22_trace) {
    Controller c;
    c.kind = ControllerKind::Nominal;
    c.k21 = std::move(k21_trace);
    c.k22 = std::move(k22_trace);
    return c;
}

double l2_norm(std::span<const double> u1, std::span<const double> u2, double h) {
    return std::sqrt(trapezoid_product(u1, u1, h) + trapezoid_product(u2, u2, h));
}

namespace {

InputHistory make_history(const Controller& c, double dt) {
    if (c.kind == ControllerKind::Compensated) return InputHistory::for_delay(dt, c.gains.tau_bar);
    return InputHistory(dt, 1);
}

double sup_abs(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    for (double v : b) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

Simulator::Simulator(PlantParams params, Grid1D grid, double dt, Controller controller)
    : params_(std::move(params)), grid_(grid), dt_(dt), controller_(std::move(controller)),
      nv_(0), history_(make_history(controller_, dt > 0.0 ? dt : 1.0)) {
    params_.validate(grid_);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidParameter, "time step must be positive");
    eps1_ = params_.eps1.sample(grid_);
    eps2_ = params_.eps2.sample(grid_);
    c1_ = params_.c1.sample(grid_);
    c2_ = params_.c2.sample(grid_);
    const double vmax = std::max(*std::max_element(eps1_.begin(), eps1_.end()), *std::max_element(eps2_.begin(), eps2_.end()));
    if (dt * vmax > grid_.h() * (1.0 + 1e-12))
        throw Error(ErrorCode::CFLViolation, "dt * max(eps) = " + std::to_string(dt * vmax) + " exceeds dx = " +
                                                 std::to_string(grid_.h()));
    nv_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params_.tau / dt)));
    switch (controller_.kind) {
    case ControllerKind::Compensated:
        controller_.gains.validate();
        if (!(controller_.gains.grid == grid_))
            throw Error(ErrorCode::GridMismatch, "controller gains are not on the simulation grid");
        break;
    case ControllerKind::Nominal:
        if (controller_.k21.size() != grid_.size() || controller_.k22.size() != grid_.size())
            throw Error(ErrorCode::GridMismatch, "nominal gains are not on the simulation grid");
        break;
    case ControllerKind::OpenLoop: break;
    }
    scratch1_.resize(grid_.size());
    scratch2_.resize(grid_.size());
}

SimState Simulator::initial_state(std::span<const double> u10, std::span<const double> u20) const {
    if (u10.size() != grid_.size() || u20.size() != grid_.size())
        throw Error(ErrorCode::GridMismatch, "initial data are not on the simulation grid");
    SimState s;
    s.u1.assign(u10.begin(), u10.end());
    s.u2.assign(u20.begin(), u20.end());
    s.v.assign(nv_ + 1, 0.0);
    return s;
}

double Simulator::control(const SimState& s) const {
    switch (controller_.kind) {
    case ControllerKind::Compensated: return control_from_history(controller_.gains, s.u1, s.u2, history_);
    case ControllerKind::Nominal: return nominal_control(controller_.k21, controller_.k22, s.u1, s.u2, grid_.h());
    case ControllerKind::OpenLoop: return 0.0;
    }
    return 0.0;
}

double Simulator::actuator_form(const SimState& s) const {
    if (controller_.kind != ControllerKind::Compensated) return 0.0;
    return control_from_actuator_state(controller_.gains, s.u1, s.u2, s.v);
}

void Simulator::step(SimState& s) {
    const std::size_t N = grid_.size() - 1;
    const double lambda = dt_ / grid_.h();
    std::copy(s.u1.begin(), s.u1.end(), scratch1_.begin());
    std::copy(s.u2.begin(), s.u2.end(), scratch2_.begin());
    const auto& o1 = scratch1_;
    const auto& o2 = scratch2_;
    for (std::size_t i = 1; i <= N; ++i)
        s.u1[i] = o1[i] - lambda * eps1_[i] * (o1[i] - o1[i - 1]) + dt_ * c1_[i] * o2[i];
    for (std::size_t i = 0; i < N; ++i)
        s.u2[i] = o2[i] + lambda * eps2_[i] * (o2[i + 1] - o2[i]) + dt_ * c2_[i] * o1[i];
    std::copy(s.v.begin() + 1, s.v.end(), s.v.begin());
    s.u2[N] = s.v.front();
    s.u1[0] = params_.q * s.u2[0];
    s.t += dt_;

    const double U = control(s);
    s.v.back() = U;
    s.U = U;
    history_.push(U);
    if (!std::isfinite(U) || !std::isfinite(l2_norm(s.u1, s.u2, grid_.h())))
        throw Error(ErrorCode::NonFiniteState, "state blew up at t = " + std::to_string(s.t));
}

std::vector<double> Simulator::v_on_grid(const SimState& s) const {
    const Grid1D vg(s.v.size());
    std::vector<double> out(grid_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = interpolate(vg, s.v, grid_.x(i));
    return out;
}

RunMetadata Simulator::metadata(std::size_t steps) const {
    RunMetadata m;
    m.nx = grid_.size();
    m.steps = steps;
    m.dx = grid_.h();
    m.dt = dt_;
    m.tau = params_.tau;
    m.tau_bar = controller_.kind == ControllerKind::Compensated ? controller_.gains.tau_bar : params_.tau_bar;
    m.delay_cells = nv_;
    m.history_steps = controller_.kind == ControllerKind::Compensated ? history_.capacity() : 0;
    m.controller = to_string(controller_.kind);
    return m;
}

SimTrajectory simulate(const PlantParams& params, const Grid1D& grid, std::span<const double> u10,
                       std::span<const double> u20, const Controller& controller, const SimOptions& opts) {
    if (!(opts.t_end > 0.0)) throw Error(ErrorCode::InvalidParameter, "t_end must be positive");
    Simulator sim(params, grid, opts.dt, controller);
    SimState s = sim.initial_state(u10, u20);
    const auto steps = static_cast<std::size_t>(std::llround(opts.t_end / opts.dt));
    SimTrajectory tr;
    tr.meta = sim.metadata(steps);
    auto record = [&](std::size_t k) {
        // Time from the step count keeps the grid of sample times exact.
        const double t = static_cast<double>(k) * opts.dt;
        tr.t.push_back(t);
        tr.l2.push_back(l2_norm(s.u1, s.u2, grid.h()));
        tr.sup.push_back(sup_abs(s.u1, s.u2));
        tr.U.push_back(s.U);
        tr.U_actuator_form.push_back(sim.actuator_form(s));
        const bool snap = k == 0 || k == steps || (opts.snapshot_every != 0 && k % opts.snapshot_every == 0);
        if (snap) tr.snapshots.push_back({t, s.u1, s.u2, sim.v_on_grid(s)});
    };
    record(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        sim.step(s);
        record(k);
    }
    return tr;
}

TargetState target_explicit(const TargetState& initial, const PlantParams& params, const Grid1D& grid, double t) {
    const std::size_t n = grid.size();
    if (initial.w1.size() != n || initial.w2.size() != n || initial.z.size() != n)
        throw Error(ErrorCode::GridMismatch, "initial target data are not on the grid");
    if (t <= 0.0) {
        TargetState out = initial;
        out.t = 0.0;
        return out;
    }
    const TravelMap phi1 = build_travel_map(params.eps1, grid);
    const TravelMap phi2 = build_travel_map(params.eps2, grid);
    const double tau = params.tau;
    auto z_at = [&](double x, double tt) {
        return tt <= tau * (1.0 - x) ? interpolate(grid, initial.z, std::min(1.0, x + tt / tau)) : 0.0;
    };
    auto w2_at = [&](double x, double tt) {
        const double to_boundary = phi2.total() - phi2(x);
        if (tt <= to_boundary) return interpolate(grid, initial.w2, phi2.inverse(phi2(x) + tt));
        return z_at(0.0, tt - to_boundary);
    };
    auto w1_at = [&](double x, double tt) {
        if (tt <= phi1(x)) return interpolate(grid, initial.w1, phi1.inverse(phi1(x) - tt));
        return params.q * w2_at(0.0, tt - phi1(x));
    };
    TargetState out;
    out.t = t;
    out.w1.resize(n);
    out.w2.resize(n);
    out.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x(i);
        out.w1[i] = w1_at(x, t);
        out.w2[i] = w2_at(x, t);
        out.z[i] = z_at(x, t);
    }
    return out;
}

namespace {

void check_transform_grid(const TransformKernels& k, std::size_t n) {
    if (k.tri.K.K11.grid().size() != n || k.tri.L.L11.grid().size() != n || k.alpha.grid.size() != n ||
        k.beta.grid.size() != n || k.p.size() != n || k.mu.size() != n)
        throw Error(ErrorCode::GridMismatch, "transformation kernels and state are on different grids");
}

// Trapezoid of f(j) over j = 0..last with spacing h.
template <class F>
double partial_trapezoid(std::size_t last, double h, F&& f) {
    if (last == 0) return 0.0;
    double acc = 0.5 * (f(0) + f(last));
    for (std::size_t j = 1; j < last; ++j) acc += f(j);
    return acc * h;
}

} // namespace

TargetState transform_forward(const PhysicalState& s, const TransformKernels& k) {
    const std::size_t n = s.u1.size();
    if (s.u2.size() != n || s.v.size() != n) throw Error(ErrorCode::GridMismatch, "state components differ in length");
    check_transform_grid(k, n);
    const double h = k.alpha.grid.h();
    const auto& K = k.tri.K;
    TargetState w;
    w.w1.resize(n);
    w.w2.resize(n);
    w.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        w.w1[i] = s.u1[i] - partial_trapezoid(i, h, [&](std::size_t j) { return K.K11(i, j) * s.u1[j] + K.K12(i, j) * s.u2[j]; });
        w.w2[i] = s.u2[i] - partial_trapezoid(i, h, [&](std::size_t j) { return K.K21(i, j) * s.u1[j] + K.K22(i, j) * s.u2[j]; });
        w.z[i] = s.v[i] - partial_trapezoid(i, h, [&](std::size_t j) { return k.p[i - j] * s.v[j]; }) -
                 partial_trapezoid(n - 1, h, [&](std::size_t j) {
                     return k.alpha.F1(i, j) * s.u1[j] + k.alpha.F2(i, j) * s.u2[j];
                 });
    }
    return w;
}

PhysicalState transform_inverse(const TargetState& w, const TransformKernels& k) {
    const std::size_t n = w.w1.size();
    if (w.w2.size() != n || w.z.size() != n) throw Error(ErrorCode::GridMismatch, "target components differ in length");
    check_transform_grid(k, n);
    const double h = k.beta.grid.h();
    const auto& L = k.tri.L;
    PhysicalState s;
    s.u1.resize(n);
    s.u2.resize(n);
    s.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.u1[i] = w.w1[i] + partial_trapezoid(i, h, [&](std::size_t j) { return L.L11(i, j) * w.w1[j] + L.L12(i, j) * w.w2[j]; });
        s.u2[i] = w.w2[i] + partial_trapezoid(i, h, [&](std::size_t j) { return L.L21(i, j) * w.w1[j] + L.L22(i, j) * w.w2[j]; });
        s.v[i] = w.z[i] + partial_trapezoid(i, h, [&](std::size_t j) { return k.mu[i - j] * w.z[j]; }) +
                 partial_trapezoid(n - 1, h, [&](std::size_t j) {
                     return k.beta.F1(i, j) * w.w1[j] + k.beta.F2(i, j) * w.w2[j];
                 });
    }
    return s;
}

} // namespace delaycomp

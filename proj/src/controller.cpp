#include "delaycomp/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace delaycomp {

void ControllerGains::validate() const {
    const std::size_t n = grid.size();
    if (a1.size() != n || a2.size() != n || p.values.size() != n)
        throw Error(ErrorCode::GridMismatch, "controller gains are not on one grid");
    if (!(tau_bar > 0.0) || !std::isfinite(tau_bar)) throw Error(ErrorCode::InvalidParameter, "tau_bar must be positive");
    for (const auto* v : {&a1, &a2, &p.values})
        for (double e : *v)
            if (!std::isfinite(e)) throw Error(ErrorCode::InvalidParameter, "controller gain is not finite");
}

ControllerGains ControllerGains::from_alpha(const RectKernelPair& alpha, const GeneralKernelProblem& problem) {
    ControllerGains g;
    g.grid = alpha.grid;
    const std::size_t n = g.grid.size();
    g.a1.resize(n);
    g.a2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        g.a1[j] = alpha.F1(n - 1, j);
        g.a2[j] = alpha.F2(n - 1, j);
    }
    g.p = gain_traces(alpha, problem, GainKind::P);
    g.tau_bar = problem.tau;
    return g;
}

std::size_t history_steps(double tau_bar, double dt) {
    if (!(dt > 0.0) || !(tau_bar > 0.0)) throw Error(ErrorCode::InvalidParameter, "history needs positive dt and delay");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(tau_bar / dt)));
}

InputHistory::InputHistory(double dt, std::size_t capacity) : dt_(dt), buffer_(capacity, 0.0) {
    if (capacity == 0) throw Error(ErrorCode::InvalidParameter, "history capacity must be positive");
}

InputHistory InputHistory::for_delay(double dt, double tau_bar) { return InputHistory(dt, history_steps(tau_bar, dt)); }

void InputHistory::push(double u) {
    head_ = head_ == 0 ? buffer_.size() - 1 : head_ - 1;
    buffer_[head_] = u;
}

double InputHistory::back(std::size_t k) const {
    if (k == 0 || k > buffer_.size())
        throw Error(ErrorCode::InsufficientHistory,
                    "history holds " + std::to_string(buffer_.size()) + " samples, asked for " + std::to_string(k));
    return buffer_[(head_ + k - 1) % buffer_.size()];
}

namespace {

double state_part(const ControllerGains& gains, std::span<const double> u1, std::span<const double> u2) {
    if (u1.size() != gains.grid.size() || u2.size() != gains.grid.size())
        throw Error(ErrorCode::GridMismatch, "state and gains are on different grids");
    const double h = gains.grid.h();
    return trapezoid_product(gains.a1, u1, h) + trapezoid_product(gains.a2, u2, h);
}

} // namespace

double control_from_history(const ControllerGains& gains, std::span<const double> u1, std::span<const double> u2,
                            const InputHistory& history) {
    const std::size_t m = history_steps(gains.tau_bar, history.dt());
    if (history.capacity() < m)
        throw Error(ErrorCode::InsufficientHistory, "history shorter than the controller delay");
    // xi_k = k/m maps to U(t - k dt); k = 0 is U(t) itself and takes the latest sample.
    double acc = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
        const double xi = static_cast<double>(k) / static_cast<double>(m);
        const double u = history.back(k == 0 ? 1 : k);
        const double w = (k == 0 || k == m) ? 0.5 : 1.0;
        acc += w * interpolate(gains.grid, gains.p.values, xi) * u;
    }
    return state_part(gains, u1, u2) + acc / static_cast<double>(m);
}

double control_from_actuator_state(const ControllerGains& gains, std::span<const double> u1,
                                   std::span<const double> u2, std::span<const double> v) {
    if (v.size() < 2) throw Error(ErrorCode::GridMismatch, "actuator state needs at least two samples");
    const Grid1D vg(v.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double w = (k == 0 || k + 1 == v.size()) ? 0.5 : 1.0;
        acc += w * interpolate(gains.grid, gains.p.values, 1.0 - vg.x(k)) * v[k];
    }
    return state_part(gains, u1, u2) + acc * vg.h();
}

} // namespace delaycomp

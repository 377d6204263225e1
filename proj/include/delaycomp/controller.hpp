#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "delaycomp/kernels_rectangle.hpp"

namespace delaycomp {

/// Gains of the delay-compensated law: alpha traces at x = 1 and p, all
/// built for the controller's assumed delay tau_bar.
struct ControllerGains {
    Grid1D grid;
    std::vector<double> a1, a2;
    GainTrace p;
    double tau_bar = 1.0;

    void validate() const;

    static ControllerGains from_alpha(const RectKernelPair& alpha, const GeneralKernelProblem& problem);
};

/// Past inputs U(t - k dt), k = 1..capacity, newest first. Starts at zero.
class InputHistory {
public:
    InputHistory(double dt, std::size_t capacity);

    /// History long enough for a delay `tau_bar`, rounded to whole steps.
    static InputHistory for_delay(double dt, double tau_bar);

    double dt() const noexcept { return dt_; }
    std::size_t capacity() const noexcept { return buffer_.size(); }

    void push(double u);
    /// U(t - k dt) for k >= 1, where t is the time of the next push.
    double back(std::size_t k) const;
    double latest() const { return back(1); }

private:
    double dt_;
    std::vector<double> buffer_;
    std::size_t head_ = 0; // slot of the newest sample
};

/// Number of history samples covering tau_bar: round(tau_bar / dt), at least one.
std::size_t history_steps(double tau_bar, double dt);

/// int a1 u1 + int a2 u2 + int_0^1 p(xi) U(t - tau_bar xi) dxi, with the
/// history sampled at xi = k/m and U(t) itself replaced by the latest
/// stored value.
double control_from_history(const ControllerGains& gains, std::span<const double> u1, std::span<const double> u2,
                            const InputHistory& history);

/// int p(1 - y) v(y) dy + int a1 u1 + int a2 u2, with v on its own uniform
/// grid over [0, 1] (any number of nodes >= 2).
double control_from_actuator_state(const ControllerGains& gains, std::span<const double> u1,
                                   std::span<const double> u2, std::span<const double> v);

} // namespace delaycomp

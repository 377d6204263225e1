#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "delaycomp/grid.hpp"

namespace delaycomp {

/// A coefficient profile on [0, 1]: a constant, a closure, or a table of
/// (x, value) pairs evaluated by linear interpolation.
class Profile {
public:
    Profile() : Profile(constant(0.0)) {}

    static Profile constant(double value);
    static Profile function(std::function<double(double)> f, std::string description = "function");
    static Profile tabulated(std::vector<double> xs, std::vector<double> values);

    double operator()(double x) const { return f_(x); }
    std::vector<double> sample(const Grid1D& grid) const;

    bool is_constant() const noexcept { return constant_; }
    const std::string& description() const noexcept { return description_; }

private:
    Profile(std::function<double(double)> f, std::string description, bool constant)
        : f_(std::move(f)), description_(std::move(description)), constant_(constant) {}

    std::function<double(double)> f_;
    std::string description_;
    bool constant_ = false;
};

struct PlantParams {
    Profile eps1 = Profile::constant(1.0);
    Profile eps2 = Profile::constant(1.0);
    Profile c1 = Profile::constant(0.0);
    Profile c2 = Profile::constant(0.0);
    double q = 1.0;
    double tau = 1.0;     // true input delay
    double tau_bar = 1.0; // delay assumed by the controller

    /// Throws NonPositiveSpeed / InvalidParameter if the samples on `grid`
    /// break the model assumptions.
    void validate(const Grid1D& grid) const;
};

/// phi(x) = int_0^x 1/eps, sampled on a grid, with its piecewise-linear inverse.
class TravelMap {
public:
    TravelMap(Grid1D grid, std::vector<double> phi);

    const Grid1D& grid() const noexcept { return grid_; }
    std::span<const double> samples() const noexcept { return phi_; }
    double total() const noexcept { return phi_.back(); }

    double operator()(double x) const { return interpolate(grid_, phi_, x); }
    /// Inverse on [0, total()]; arguments outside are clamped.
    double inverse(double value) const;

private:
    Grid1D grid_;
    std::vector<double> phi_;
};

TravelMap build_travel_map(const Profile& eps, const Grid1D& grid);
TravelMap build_travel_map(std::span<const double> eps_samples, const Grid1D& grid);

/// Settling time of the target system: tau + phi1(1) + phi2(1).
double t_final(const PlantParams& params, const Grid1D& grid = Grid1D(1001));

/// First derivative of grid samples: central differences inside, one-sided
/// second-order stencils at the ends.
std::vector<double> derivative(std::span<const double> f, double h);

} // namespace delaycomp

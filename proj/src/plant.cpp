#include "delaycomp/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delaycomp {

Profile Profile::constant(double value) {
    std::ostringstream os;
    os << value;
    return Profile([value](double) { return value; }, os.str(), true);
}

Profile Profile::function(std::function<double(double)> f, std::string description) {
    return Profile(std::move(f), std::move(description), false);
}

Profile Profile::tabulated(std::vector<double> xs, std::vector<double> values) {
    if (xs.size() != values.size() || xs.empty())
        throw Error(ErrorCode::InvalidParameter, "table needs matching, non-empty x and value columns");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw Error(ErrorCode::InvalidParameter, "table x column must be strictly increasing");
    auto f = [xs = std::move(xs), vs = std::move(values)](double x) {
        if (x <= xs.front()) return vs.front();
        if (x >= xs.back()) return vs.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t k = static_cast<std::size_t>(it - xs.begin());
        double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return vs[k - 1] + t * (vs[k] - vs[k - 1]);
    };
    return Profile(std::move(f), "table", false);
}

std::vector<double> Profile::sample(const Grid1D& grid) const {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f_(grid.x(i));
    return out;
}

void PlantParams::validate(const Grid1D& grid) const {
    auto check = [&](const Profile& p, const char* name, bool positive) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double v = p(grid.x(i));
            if (!std::isfinite(v))
                throw Error(ErrorCode::InvalidParameter, std::string(name) + " is not finite at x=" +
                                                             std::to_string(grid.x(i)));
            if (positive && !(v > 0.0))
                throw Error(ErrorCode::NonPositiveSpeed, std::string(name) + " must be positive, got " +
                                                             std::to_string(v) + " at x=" +
                                                             std::to_string(grid.x(i)));
        }
    };
    check(eps1, "eps1", true);
    check(eps2, "eps2", true);
    check(c1, "c1", false);
    check(c2, "c2", false);
    if (!std::isfinite(q)) throw Error(ErrorCode::InvalidParameter, "q is not finite");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidParameter, "tau must be positive");
    if (!(tau_bar > 0.0) || !std::isfinite(tau_bar))
        throw Error(ErrorCode::InvalidParameter, "tau_bar must be positive");
}

TravelMap::TravelMap(Grid1D grid, std::vector<double> phi) : grid_(grid), phi_(std::move(phi)) {
    if (phi_.size() != grid_.size()) throw Error(ErrorCode::GridMismatch, "travel map samples vs grid");
    for (std::size_t i = 1; i < phi_.size(); ++i)
        if (!(phi_[i] > phi_[i - 1]))
            throw Error(ErrorCode::InvalidParameter, "travel map must be strictly increasing");
}

double TravelMap::inverse(double value) const {
    if (value <= 0.0) return 0.0;
    if (value >= phi_.back()) return 1.0;
    auto it = std::upper_bound(phi_.begin(), phi_.end(), value);
    std::size_t k = static_cast<std::size_t>(it - phi_.begin());
    double t = (value - phi_[k - 1]) / (phi_[k] - phi_[k - 1]);
    return grid_.x(k - 1) + t * grid_.h();
}

TravelMap build_travel_map(std::span<const double> eps, const Grid1D& grid) {
    if (eps.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "speed samples vs grid");
    for (std::size_t i = 0; i < eps.size(); ++i)
        if (!(eps[i] > 0.0))
            throw Error(ErrorCode::NonPositiveSpeed,
                        "speed must be positive, got " + std::to_string(eps[i]) + " at x=" + std::to_string(grid.x(i)));
    std::vector<double> phi(grid.size(), 0.0);
    const double h = grid.h();
    for (std::size_t i = 1; i < phi.size(); ++i) phi[i] = phi[i - 1] + 0.5 * h * (1.0 / eps[i - 1] + 1.0 / eps[i]);
    return TravelMap(grid, std::move(phi));
}

TravelMap build_travel_map(const Profile& eps, const Grid1D& grid) {
    auto samples = eps.sample(grid);
    return build_travel_map(samples, grid);
}

double t_final(const PlantParams& params, const Grid1D& grid) {
    return params.tau + build_travel_map(params.eps1, grid).total() + build_travel_map(params.eps2, grid).total();
}

std::vector<double> derivative(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    if (n == 2) {
        d[0] = d[1] = (f[1] - f[0]) / h;
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return d;
}

} // namespace delaycomp

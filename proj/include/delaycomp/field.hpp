#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "delaycomp/grid.hpp"

namespace delaycomp {

/// Scalar samples on the unit-square lattice, index (i, j) <-> (x_i, y_j).
class SquareField {
public:
    SquareField() : SquareField(Grid1D(2)) {}
    explicit SquareField(Grid1D grid, double fill = 0.0)
        : grid_(grid), values_(grid.size() * grid.size(), fill) {}

    const Grid1D& grid() const noexcept { return grid_; }
    std::size_t n() const noexcept { return grid_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * grid_.size() + j]; }

    double bilinear(double x, double y) const {
        std::size_t i, j;
        double a, b;
        grid_.locate(x, i, a);
        grid_.locate(y, j, b);
        const std::size_t n = grid_.size();
        const double* p = values_.data() + i * n + j;
        return (1.0 - a) * ((1.0 - b) * p[0] + b * p[1]) + a * ((1.0 - b) * p[n] + b * p[n + 1]);
    }

    /// Column x = x_i over all y.
    std::vector<double> at_x(std::size_t i) const {
        return {values_.begin() + static_cast<std::ptrdiff_t>(i * n()),
                values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n())};
    }
    /// Row y = y_j over all x.
    std::vector<double> at_y(std::size_t j) const {
        std::vector<double> out(n());
        for (std::size_t i = 0; i < n(); ++i) out[i] = (*this)(i, j);
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    std::span<const double> raw() const noexcept { return values_; }
    std::span<double> raw() noexcept { return values_; }

    static SquareField from_function(const Grid1D& grid, auto&& f) {
        SquareField out(grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < grid.size(); ++j) out.at(i, j) = f(grid.x(i), grid.x(j));
        return out;
    }

private:
    Grid1D grid_;
    std::vector<double> values_;
};

} // namespace delaycomp

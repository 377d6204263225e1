#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "delaycomp/error.hpp"

namespace delaycomp {

/// Uniform nodes on [0, 1], endpoints included.
class Grid1D {
public:
    Grid1D() : Grid1D(101) {}
    explicit Grid1D(std::size_t n) : n_(n) {
        if (n < 2) throw Error(ErrorCode::InvalidParameter, "grid needs at least 2 nodes");
        h_ = 1.0 / static_cast<double>(n - 1);
    }

    std::size_t size() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    double x(std::size_t i) const noexcept {
        return i + 1 == n_ ? 1.0 : static_cast<double>(i) * h_;
    }
    std::vector<double> nodes() const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
        return out;
    }

    /// Cell index i and fraction t with x = x(i) + t h, clamped to [0, 1].
    void locate(double xq, std::size_t& i, double& t) const noexcept {
        double s = xq / h_;
        if (!(s > 0.0)) {
            i = 0;
            t = 0.0;
            return;
        }
        const double last = static_cast<double>(n_ - 1);
        if (s >= last) {
            i = n_ - 2;
            t = 1.0;
            return;
        }
        double fl = std::floor(s);
        i = static_cast<std::size_t>(fl);
        t = s - fl;
    }

    friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept { return a.n_ == b.n_; }

private:
    std::size_t n_;
    double h_;
};

/// Composite trapezoid of samples on a uniform grid with spacing h.
inline double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double acc = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
    return acc * h;
}

/// Trapezoid of the pointwise product a*b.
inline double trapezoid_product(std::span<const double> a, std::span<const double> b, double h) {
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    double acc = 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
    for (std::size_t i = 1; i + 1 < n; ++i) acc += a[i] * b[i];
    return acc * h;
}

/// Piecewise-linear interpolation of grid samples at xq in [0, 1].
inline double interpolate(const Grid1D& grid, std::span<const double> f, double xq) {
    std::size_t i;
    double t;
    grid.locate(xq, i, t);
    return f[i] + t * (f[i + 1] - f[i]);
}

} // namespace delaycomp

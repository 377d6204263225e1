#include "delaycomp/kernels_triangle.hpp"

#include <algorithm>
#include <cmath>

#include "delaycomp/parallel.hpp"

namespace delaycomp {

double KernelFieldTriangle::sample(double x, double y) const {
    const double h = grid_.h();
    const std::size_t last = grid_.size() - 1;
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, x);
    std::size_t i;
    double a;
    grid_.locate(x, i, a);
    double sb = y / h;
    std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(sb))), last);
    double b = sb - static_cast<double>(j);
    if (j > i) {
        j = i;
        b = a;
    }
    if (j == i) {
        // Lower sub-triangle of the diagonal cell: corners (i,i), (i+1,i), (i+1,i+1).
        b = std::min(b, a);
        return (1.0 - a) * (*this)(i, i) + (a - b) * (*this)(i + 1, i) + b * (*this)(i + 1, i + 1);
    }
    if (j + 1 > last) {
        j = last - 1;
        b = 1.0;
    }
    const double f00 = (*this)(i, j), f10 = (*this)(i + 1, j);
    const double f01 = (*this)(i, j + 1), f11 = (*this)(i + 1, j + 1);
    return (1.0 - a) * ((1.0 - b) * f00 + b * f01) + a * ((1.0 - b) * f10 + b * f11);
}

std::vector<double> KernelFieldTriangle::row(std::size_t i) const {
    std::vector<double> out(i + 1);
    for (std::size_t j = 0; j <= i; ++j) out[j] = (*this)(i, j);
    return out;
}

double KernelFieldTriangle::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// One unknown of a 2x2 Goursat system on the triangle:
//   rho(x) F_x + s * sigma(y) F_y = lambda(y) F + sum_m a_m F_m
// with s = +1 (characteristics reach y = 0) or s = -1 (they reach y = x).
struct Coupling {
    int other;
    std::vector<double> coeff;
    bool depends_on_x; // coefficient is a function of x instead of y
};

struct Unknown {
    const TravelMap* lead = nullptr;  // x-direction travel map (speed rho)
    const TravelMap* trans = nullptr; // y-direction travel map (speed sigma)
    std::vector<double> lead_speed, trans_speed;
    bool reaches_diagonal = false;
    std::vector<double> lambda;
    std::vector<Coupling> couplings;
    std::vector<double> diagonal_data; // F(x, x), when reaches_diagonal
    int linked = -1;                   // F(x, 0) = ratio * F_linked(x, 0) otherwise
    double ratio = 0.0;
    double max_speed = 1.0;
};

struct GoursatSystem {
    Grid1D grid;
    std::array<Unknown, 4> unknowns;
};

struct Path {
    double length = 0.0;  // parameter length R
    double lead0 = 0.0;   // Phi_rho(x) at r = 0 (the foot)
    double trans0 = 0.0;  // Phi_sigma(y) at r = 0
    double trans_dir = 1; // dPhi_sigma / dr
    double foot_x = 0.0;
};

Path trace_path(const Unknown& u, double x, double y) {
    Path p;
    const double lx = (*u.lead)(x);
    const double ty = (*u.trans)(y);
    if (!u.reaches_diagonal) {
        p.length = std::min(ty, lx);
        p.lead0 = lx - p.length;
        p.trans0 = ty - p.length;
        p.trans_dir = 1.0;
        p.foot_x = u.lead->inverse(p.lead0);
        return p;
    }
    // x(R) = Phi_rho^{-1}(lx - R) meets y(R) = Phi_sigma^{-1}(ty + R).
    auto gap = [&](double r) { return u.lead->inverse(lx - r) - u.trans->inverse(ty + r); };
    double lo = 0.0, hi = std::min(lx, u.trans->total() - ty);
    if (gap(lo) <= 0.0) {
        hi = 0.0;
    } else {
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
            double mid = 0.5 * (lo + hi);
            (gap(mid) > 0.0 ? lo : hi) = mid;
        }
    }
    p.length = hi;
    p.lead0 = lx - hi;
    p.trans0 = ty + hi;
    p.trans_dir = -1.0;
    p.foot_x = u.lead->inverse(p.lead0);
    return p;
}

class GoursatSolver {
public:
    explicit GoursatSolver(const GoursatSystem& sys) : sys_(sys) {}

    double value_at(int k, double x, double y, const std::array<KernelFieldTriangle, 4>& old) const {
        const Unknown& u = sys_.unknowns[static_cast<std::size_t>(k)];
        const Grid1D& g = sys_.grid;
        const Path p = trace_path(u, x, y);
        double boundary;
        if (u.reaches_diagonal) {
            boundary = interpolate(g, u.diagonal_data, p.foot_x);
        } else {
            boundary = u.ratio == 0.0 ? 0.0 : u.ratio * value_at(u.linked, p.foot_x, 0.0, old);
        }
        if (p.length <= 0.0) return boundary;
        const double h = g.h();
        const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p.length * u.max_speed / h)));
        const double dr = p.length / static_cast<double>(steps);
        double acc = 0.0;
        for (std::size_t s = 0; s <= steps; ++s) {
            const double r = dr * static_cast<double>(s);
            double xs = u.lead->inverse(p.lead0 + r);
            double ys = u.trans->inverse(p.trans0 + p.trans_dir * r);
            if (s == steps) {
                xs = x;
                ys = y;
            }
            ys = std::min(ys, xs);
            double f = interpolate(g, u.lambda, ys) * old[static_cast<std::size_t>(k)].sample(xs, ys);
            for (const auto& c : u.couplings) {
                const double coeff = interpolate(g, c.coeff, c.depends_on_x ? xs : ys);
                if (coeff != 0.0) f += coeff * old[static_cast<std::size_t>(c.other)].sample(xs, ys);
            }
            const double w = (s == 0 || s == steps) ? 0.5 : 1.0;
            acc += w * f;
        }
        return boundary + acc * dr;
    }

    std::array<KernelFieldTriangle, 4> solve(const TriangleSolverOptions& opts, std::size_t& iterations,
                                             double& final_update) const {
        const Grid1D& g = sys_.grid;
        const std::size_t n = g.size();
        std::array<KernelFieldTriangle, 4> cur{KernelFieldTriangle(g), KernelFieldTriangle(g),
                                               KernelFieldTriangle(g), KernelFieldTriangle(g)};
        for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
            std::array<KernelFieldTriangle, 4> next = cur;
            std::vector<double> row_update(n, 0.0);
            parallel_for(n, [&](std::size_t i) {
                double du = 0.0;
                for (std::size_t j = 0; j <= i; ++j)
                    for (int k = 0; k < 4; ++k) {
                        double v = value_at(k, g.x(i), g.x(j), cur);
                        du = std::max(du, std::abs(v - cur[static_cast<std::size_t>(k)](i, j)));
                        next[static_cast<std::size_t>(k)].at(i, j) = v;
                    }
                row_update[i] = du;
            });
            cur = std::move(next);
            final_update = *std::max_element(row_update.begin(), row_update.end());
            iterations = it;
            if (!std::isfinite(final_update)) break;
            if (final_update <= opts.tolerance) return cur;
        }
        throw Error(ErrorCode::NoConvergence, "triangle kernel iteration stalled at update " +
                                                  std::to_string(final_update) + " after " +
                                                  std::to_string(iterations) + " sweeps");
    }

private:
    const GoursatSystem& sys_;
};

struct PlantSamples {
    Grid1D grid;
    std::vector<double> eps1, eps2, c1, c2, deps1, deps2;
    TravelMap phi1, phi2;

    PlantSamples(const PlantParams& p, const Grid1D& g)
        : grid(g), eps1(p.eps1.sample(g)), eps2(p.eps2.sample(g)), c1(p.c1.sample(g)), c2(p.c2.sample(g)),
          deps1(derivative(eps1, g.h())), deps2(derivative(eps2, g.h())), phi1(build_travel_map(eps1, g)),
          phi2(build_travel_map(eps2, g)) {}
};

std::vector<double> scaled(std::span<const double> v, double s) {
    std::vector<double> out(v.begin(), v.end());
    for (double& e : out) e *= s;
    return out;
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double e) { return e == 0.0; });
}

// Ratio for F(x,0) of the first row: eps2(0) / (q eps1(0)). With q = 0 the
// relation only closes when the first-row kernels vanish, i.e. c1 = 0.
double first_row_ratio(const PlantParams& params, const PlantSamples& s) {
    if (params.q != 0.0) return s.eps2.front() / (params.q * s.eps1.front());
    if (all_zero(s.c1)) return 0.0;
    throw Error(ErrorCode::InvalidParameter,
                "q = 0 with nonzero c1: the first-row kernel boundary relation has no solution");
}

std::vector<double> diagonal_value(const PlantSamples& s, std::span<const double> c, double sign) {
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = sign * c[i] / (s.eps1[i] + s.eps2[i]);
    return out;
}

void fill_speeds(Unknown& u, const PlantSamples& s, int lead, int trans) {
    u.lead = lead == 1 ? &s.phi1 : &s.phi2;
    u.trans = trans == 1 ? &s.phi1 : &s.phi2;
    u.lead_speed = lead == 1 ? s.eps1 : s.eps2;
    u.trans_speed = trans == 1 ? s.eps1 : s.eps2;
    u.max_speed = std::max(*std::max_element(u.lead_speed.begin(), u.lead_speed.end()),
                           *std::max_element(u.trans_speed.begin(), u.trans_speed.end()));
}

// Direct kernels:
//   eps1(x) K11_x + eps1(y) K11_y = -eps1'(y) K11 - c2(y) K12,   K11(x,0) = eps2(0)/(q eps1(0)) K12(x,0)
//   eps1(x) K12_x - eps2(y) K12_y =  eps2'(y) K12 - c1(y) K11,   K12(x,x) = c1/(eps1+eps2)
//   eps2(x) K21_x - eps1(y) K21_y =  eps1'(y) K21 + c2(y) K22,   K21(x,x) = -c2/(eps1+eps2)
//   eps2(x) K22_x + eps2(y) K22_y = -eps2'(y) K22 + c1(y) K21,   K22(x,0) = q eps1(0)/eps2(0) K21(x,0)
GoursatSystem direct_system(const PlantParams& params, const PlantSamples& s) {
    GoursatSystem sys{s.grid, {}};
    auto& [k11, k12, k21, k22] = sys.unknowns;
    fill_speeds(k11, s, 1, 1);
    k11.lambda = scaled(s.deps1, -1.0);
    k11.couplings = {{1, scaled(s.c2, -1.0), false}};
    k11.linked = 1;
    k11.ratio = first_row_ratio(params, s);

    fill_speeds(k12, s, 1, 2);
    k12.reaches_diagonal = true;
    k12.lambda = s.deps2;
    k12.couplings = {{0, scaled(s.c1, -1.0), false}};
    k12.diagonal_data = diagonal_value(s, s.c1, 1.0);

    fill_speeds(k21, s, 2, 1);
    k21.reaches_diagonal = true;
    k21.lambda = s.deps1;
    k21.couplings = {{3, s.c2, false}};
    k21.diagonal_data = diagonal_value(s, s.c2, -1.0);

    fill_speeds(k22, s, 2, 2);
    k22.lambda = scaled(s.deps2, -1.0);
    k22.couplings = {{2, s.c1, false}};
    k22.linked = 2;
    k22.ratio = params.q * s.eps1.front() / s.eps2.front();
    return sys;
}

// Inverse kernels (u = w + int L w):
//   eps1(x) L11_x + eps1(y) L11_y = -eps1'(y) L11 + c1(x) L21,   L11(x,0) = eps2(0)/(q eps1(0)) L12(x,0)
//   eps1(x) L12_x - eps2(y) L12_y =  eps2'(y) L12 + c1(x) L22,   L12(x,x) = c1/(eps1+eps2)
//   eps2(x) L21_x - eps1(y) L21_y =  eps1'(y) L21 - c2(x) L11,   L21(x,x) = -c2/(eps1+eps2)
//   eps2(x) L22_x + eps2(y) L22_y = -eps2'(y) L22 - c2(x) L12,   L22(x,0) = q eps1(0)/eps2(0) L21(x,0)
GoursatSystem inverse_system(const PlantParams& params, const PlantSamples& s) {
    GoursatSystem sys{s.grid, {}};
    auto& [l11, l12, l21, l22] = sys.unknowns;
    fill_speeds(l11, s, 1, 1);
    l11.lambda = scaled(s.deps1, -1.0);
    l11.couplings = {{2, s.c1, true}};
    l11.linked = 1;
    l11.ratio = first_row_ratio(params, s);

    fill_speeds(l12, s, 1, 2);
    l12.reaches_diagonal = true;
    l12.lambda = s.deps2;
    l12.couplings = {{3, s.c1, true}};
    l12.diagonal_data = diagonal_value(s, s.c1, 1.0);

    fill_speeds(l21, s, 2, 1);
    l21.reaches_diagonal = true;
    l21.lambda = s.deps1;
    l21.couplings = {{0, scaled(s.c2, -1.0), true}};
    l21.diagonal_data = diagonal_value(s, s.c2, -1.0);

    fill_speeds(l22, s, 2, 2);
    l22.lambda = scaled(s.deps2, -1.0);
    l22.couplings = {{1, scaled(s.c2, -1.0), true}};
    l22.linked = 2;
    l22.ratio = params.q * s.eps1.front() / s.eps2.front();
    return sys;
}

} // namespace

DirectKernels solve_K(const PlantParams& params, const Grid1D& grid, const TriangleSolverOptions& opts) {
    params.validate(grid);
    PlantSamples s(params, grid);
    GoursatSystem sys = direct_system(params, s);
    DirectKernels out;
    auto fields = GoursatSolver(sys).solve(opts, out.iterations, out.final_update);
    out.K11 = std::move(fields[0]);
    out.K12 = std::move(fields[1]);
    out.K21 = std::move(fields[2]);
    out.K22 = std::move(fields[3]);
    return out;
}

InverseKernels solve_L_goursat(const PlantParams& params, const Grid1D& grid, const TriangleSolverOptions& opts) {
    params.validate(grid);
    PlantSamples s(params, grid);
    GoursatSystem sys = inverse_system(params, s);
    InverseKernels out;
    auto fields = GoursatSolver(sys).solve(opts, out.iterations, out.final_update);
    out.L11 = std::move(fields[0]);
    out.L12 = std::move(fields[1]);
    out.L21 = std::move(fields[2]);
    out.L22 = std::move(fields[3]);
    return out;
}

InverseKernels solve_L(const PlantParams& params, const Grid1D& grid, const DirectKernels& K,
                       const TriangleSolverOptions& opts) {
    if (!(K.K11.grid() == grid)) throw Error(ErrorCode::GridMismatch, "direct kernels were solved on another grid");
    params.validate(grid);
    const std::size_t n = grid.size();
    const double h = grid.h();
    const std::array<const KernelFieldTriangle*, 4> k{&K.K11, &K.K12, &K.K21, &K.K22};
    // L^{ij}(x,y) = K^{ij}(x,y) + sum_m int_y^x K^{im}(x,xi) L^{mj}(xi,y) dxi
    std::array<KernelFieldTriangle, 4> cur{K.K11, K.K12, K.K21, K.K22};
    InverseKernels out;
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        std::array<KernelFieldTriangle, 4> next = cur;
        std::vector<double> row_update(n, 0.0);
        parallel_for(n, [&](std::size_t a) {
            double du = 0.0;
            for (std::size_t b = 0; b <= a; ++b)
                for (std::size_t row = 0; row < 2; ++row)
                    for (std::size_t col = 0; col < 2; ++col) {
                        double acc = 0.0;
                        if (a > b) {
                            for (std::size_t m = 0; m < 2; ++m) {
                                const auto& km = *k[2 * row + m];
                                const auto& lm = cur[2 * m + col];
                                double s = 0.5 * (km(a, b) * lm(b, b) + km(a, a) * lm(a, b));
                                for (std::size_t c = b + 1; c < a; ++c) s += km(a, c) * lm(c, b);
                                acc += s * h;
                            }
                        }
                        double v = (*k[2 * row + col])(a, b) + acc;
                        du = std::max(du, std::abs(v - cur[2 * row + col](a, b)));
                        next[2 * row + col].at(a, b) = v;
                    }
            row_update[a] = du;
        });
        cur = std::move(next);
        out.final_update = *std::max_element(row_update.begin(), row_update.end());
        out.iterations = it;
        if (!std::isfinite(out.final_update)) break;
        if (out.final_update <= opts.tolerance) {
            out.L11 = std::move(cur[0]);
            out.L12 = std::move(cur[1]);
            out.L21 = std::move(cur[2]);
            out.L22 = std::move(cur[3]);
            return out;
        }
    }
    throw Error(ErrorCode::NoConvergence, "resolvent iteration for L stalled at update " +
                                              std::to_string(out.final_update));
}

double nominal_control(std::span<const double> K21_trace, std::span<const double> K22_trace,
                       std::span<const double> u1, std::span<const double> u2, double h) {
    const std::size_t n = K21_trace.size();
    if (K22_trace.size() != n || u1.size() != n || u2.size() != n)
        throw Error(ErrorCode::GridMismatch, "nominal control: traces and states differ in length");
    return trapezoid_product(K21_trace, u1, h) + trapezoid_product(K22_trace, u2, h);
}

std::array<TriangleResidual, 4> direct_kernel_residual(const PlantParams& params, const DirectKernels& K) {
    const Grid1D& g = K.K11.grid();
    PlantSamples s(params, g);
    GoursatSystem sys = direct_system(params, s);
    const std::array<const KernelFieldTriangle*, 4> f{&K.K11, &K.K12, &K.K21, &K.K22};
    const double h = g.h();
    const std::size_t n = g.size();
    std::array<TriangleResidual, 4> out{};
    for (std::size_t k = 0; k < 4; ++k) {
        const Unknown& u = sys.unknowns[k];
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 1; j < i; ++j) {
                const double fx = ((*f[k])(i, j) - (*f[k])(i - 1, j)) / h;
                // Upwind in y: characteristics move towards larger y for the
                // bottom-anchored unknowns and towards smaller y otherwise.
                const double fy = u.reaches_diagonal ? ((*f[k])(i, j + 1) - (*f[k])(i, j)) / h
                                                     : ((*f[k])(i, j) - (*f[k])(i, j - 1)) / h;
                double lhs = u.lead_speed[i] * fx + (u.reaches_diagonal ? -1.0 : 1.0) * u.trans_speed[j] * fy;
                double rhs = u.lambda[j] * (*f[k])(i, j);
                for (const auto& c : u.couplings) rhs += c.coeff[c.depends_on_x ? i : j] * (*f[static_cast<std::size_t>(c.other)])(i, j);
                const double r = std::abs(lhs - rhs);
                out[k].sup = std::max(out[k].sup, r);
                sum += r;
                ++count;
            }
        out[k].mean = count ? sum / static_cast<double>(count) : 0.0;
    }
    return out;
}

} // namespace delaycomp

#include "delaycomp/kernels_rectangle.hpp"

#include <algorithm>
#include <cmath>

#include "delaycomp/parallel.hpp"

namespace delaycomp {

void GeneralKernelProblem::validate() const {
    const std::size_t n = grid.size();
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidParameter, "kernel problem needs tau > 0");
    for (const auto* v : {&eps1, &eps2, &h1, &h2, &q1})
        if (v->size() != n) throw Error(ErrorCode::GridMismatch, "kernel problem profile length differs from grid");
    for (const auto* f : {&C11, &C12, &C21, &C22, &g1, &g2})
        if (!(f->grid() == grid)) throw Error(ErrorCode::GridMismatch, "kernel problem field on another grid");
    for (const auto* v : {&eps1, &eps2, &h1, &h2, &q1})
        for (double e : *v)
            if (!std::isfinite(e)) throw Error(ErrorCode::InvalidParameter, "kernel problem data not finite");
    for (const auto* f : {&C11, &C12, &C21, &C22, &g1, &g2})
        for (double e : f->raw())
            if (!std::isfinite(e)) throw Error(ErrorCode::InvalidParameter, "kernel problem data not finite");
}

CharacteristicGeometry::CharacteristicGeometry(const Grid1D& grid, std::span<const double> eps1,
                                               std::span<const double> eps2, double tau)
    : grid_(grid), tau_(tau), phi1_(build_travel_map(eps1, grid)), phi2_(build_travel_map(eps2, grid)) {
    const double vmax = std::max(*std::max_element(eps1.begin(), eps1.end()), *std::max_element(eps2.begin(), eps2.end()));
    max_step_ = grid.h() * std::min(tau, 1.0 / vmax);
}

double CharacteristicGeometry::terminal(Branch b, double x, double y) const {
    switch (b) {
    case Branch::F1ToTop: return phi1_.total() - phi1_(y);
    case Branch::F1ToLeft: return tau_ * x;
    case Branch::F2ToBottom: return phi2_(y);
    case Branch::F2ToLeft: return tau_ * x;
    }
    return 0.0;
}

void CharacteristicGeometry::point(Branch b, double x, double y, double s, double& xs, double& ys) const {
    switch (b) {
    case Branch::F1ToTop:
        xs = x + (s - terminal(b, x, y)) / tau_;
        ys = phi1_.inverse(phi1_.total() - s);
        break;
    case Branch::F1ToLeft:
        xs = s / tau_;
        ys = phi1_.inverse(tau_ * x + phi1_(y) - s);
        break;
    case Branch::F2ToBottom:
        xs = x + (s - phi2_(y)) / tau_;
        ys = phi2_.inverse(s);
        break;
    case Branch::F2ToLeft:
        xs = s / tau_;
        ys = phi2_.inverse(phi2_(y) - tau_ * x + s);
        break;
    }
    xs = std::clamp(xs, 0.0, 1.0);
}

RegionF1 CharacteristicGeometry::region_f1(double x, double y) const {
    return phi1_.total() - phi1_(y) <= tau_ * x ? RegionF1::ReachesTop : RegionF1::ReachesLeft;
}

RegionF2 CharacteristicGeometry::region_f2(double x, double y) const {
    const double s21 = phi2_(y);
    if (!(s21 <= tau_ * x)) return RegionF2::ReachesLeft;
    const double foot = x - s21 / tau_;
    return phi1_.total() <= tau_ * foot ? RegionF2::BottomFootTop : RegionF2::BottomFootLeft;
}

namespace {

void check_in_square(double x, double y) {
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw Error(ErrorCode::OutOfDomain, "point (" + std::to_string(x) + ", " + std::to_string(y) +
                                                ") is outside the unit square");
}

bool is_zero(const SquareField& f) {
    return std::all_of(f.raw().begin(), f.raw().end(), [](double v) { return v == 0.0; });
}

class RectOperator {
public:
    explicit RectOperator(const GeneralKernelProblem& p)
        : p_(p), geo_(p.grid, p.eps1, p.eps2, p.tau), n_(p.grid.size()), tag1_(n_ * n_), tag2_(n_ * n_) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                tag1_[i * n_ + j] = geo_.region_f1(p.grid.x(i), p.grid.x(j));
                tag2_[i * n_ + j] = geo_.region_f2(p.grid.x(i), p.grid.x(j));
            }
        zero_[0] = is_zero(p.C11);
        zero_[1] = is_zero(p.C12);
        zero_[2] = is_zero(p.C21);
        zero_[3] = is_zero(p.C22);
        zero_g_[0] = is_zero(p.g1);
        zero_g_[1] = is_zero(p.g2);
    }

    const CharacteristicGeometry& geometry() const { return geo_; }
    const std::vector<RegionF1>& tags1() const { return tag1_; }
    const std::vector<RegionF2>& tags2() const { return tag2_; }

    // One application of the integral map to (F1, F2). With `inhomogeneous`
    // the boundary data and sources are included (F^0 + I[F]); without, only
    // the linear part acts (the successive-approximation recursion).
    void apply(const SquareField& F1, const SquareField& F2, bool inhomogeneous, SquareField& out1,
               SquareField& out2) const {
        const Grid1D& g = p_.grid;
        parallel_for(n_, [&](std::size_t i) {
            const double x = g.x(i);
            for (std::size_t j = 0; j < n_; ++j) {
                const double y = g.x(j);
                out1.at(i, j) = f1_at(x, y, F1, F2, inhomogeneous);
                out2.at(i, j) = f2_at(x, y, F1, F2, inhomogeneous);
            }
            if (i == 0) {
                // Boundary data are imposed exactly on x = 0.
                for (std::size_t j = 0; j < n_; ++j) {
                    if (tag1_[j] == RegionF1::ReachesLeft) out1.at(0, j) = inhomogeneous ? p_.h1[j] : 0.0;
                    if (tag2_[j] == RegionF2::ReachesLeft) out2.at(0, j) = inhomogeneous ? p_.h2[j] : 0.0;
                }
            }
        });
    }

    double f1_at(double x, double y, const SquareField& F1, const SquareField& F2, bool inhom) const {
        if (geo_.region_f1(x, y) == RegionF1::ReachesTop) return integrate(Branch::F1ToTop, x, y, F1, F2, inhom);
        double boundary = 0.0;
        if (inhom) {
            double x0, y0;
            geo_.point(Branch::F1ToLeft, x, y, 0.0, x0, y0);
            boundary = interpolate(p_.grid, p_.h1, y0);
        }
        return boundary + integrate(Branch::F1ToLeft, x, y, F1, F2, inhom);
    }

    double f2_at(double x, double y, const SquareField& F1, const SquareField& F2, bool inhom) const {
        if (geo_.region_f2(x, y) == RegionF2::ReachesLeft) {
            double boundary = 0.0;
            if (inhom) {
                double x0, y0;
                geo_.point(Branch::F2ToLeft, x, y, 0.0, x0, y0);
                boundary = interpolate(p_.grid, p_.h2, y0);
            }
            return boundary + integrate(Branch::F2ToLeft, x, y, F1, F2, inhom);
        }
        const double foot = std::max(0.0, x - geo_.phi2()(y) / geo_.tau());
        const double q = interpolate(p_.grid, p_.q1, foot);
        const double reflected = q == 0.0 ? 0.0 : q * f1_at(foot, 0.0, F1, F2, inhom);
        return reflected + integrate(Branch::F2ToBottom, x, y, F1, F2, inhom);
    }

    // Interpolation that only mixes lattice values from the region of (x, y)
    // when the cell straddles a region boundary.
    double sample_f1(const SquareField& F, double x, double y) const {
        return sample_tagged(F, tag1_, x, y, [&] { return static_cast<int>(geo_.region_f1(x, y)); });
    }
    double sample_f2(const SquareField& F, double x, double y) const {
        return sample_tagged(F, tag2_, x, y, [&] { return static_cast<int>(geo_.region_f2(x, y)); });
    }

private:
    template <class Tag, class TagOf>
    double sample_tagged(const SquareField& F, const std::vector<Tag>& tags, double x, double y, TagOf&& tag_of) const {
        const Grid1D& g = p_.grid;
        std::size_t i, j;
        double a, b;
        g.locate(x, i, a);
        g.locate(y, j, b);
        const std::size_t k00 = i * n_ + j, k01 = k00 + 1, k10 = k00 + n_, k11 = k10 + 1;
        const double w[4] = {(1 - a) * (1 - b), (1 - a) * b, a * (1 - b), a * b};
        const std::size_t k[4] = {k00, k01, k10, k11};
        const auto raw = F.raw();
        if (tags[k00] == tags[k01] && tags[k00] == tags[k10] && tags[k00] == tags[k11])
            return w[0] * raw[k00] + w[1] * raw[k01] + w[2] * raw[k10] + w[3] * raw[k11];
        const int t = tag_of();
        const double da[4] = {a, a, 1 - a, 1 - a}, db[4] = {b, 1 - b, b, 1 - b};
        double acc = 0.0, wsum = 0.0, plain = 0.0, nearest = 0.0, best = 1e300;
        for (int c = 0; c < 4; ++c) {
            plain += w[c] * raw[k[c]];
            if (static_cast<int>(tags[k[c]]) == t) {
                acc += w[c] * raw[k[c]];
                wsum += w[c];
                const double d = da[c] * da[c] + db[c] * db[c];
                if (d < best) {
                    best = d;
                    nearest = raw[k[c]];
                }
            }
        }
        if (best == 1e300) return plain;
        // Near a corner of the other region the weights of the matching
        // corners vanish; fall back to the closest matching corner.
        return wsum > 1e-6 ? acc / wsum : nearest;
    }

    double integrate(Branch b, double x, double y, const SquareField& F1, const SquareField& F2, bool inhom) const {
        const bool row1 = b == Branch::F1ToTop || b == Branch::F1ToLeft;
        const SquareField& Ca = row1 ? p_.C11 : p_.C21;
        const SquareField& Cb = row1 ? p_.C12 : p_.C22;
        const SquareField& gs = row1 ? p_.g1 : p_.g2;
        const bool use_a = !zero_[row1 ? 0 : 2];
        const bool use_b = !zero_[row1 ? 1 : 3];
        const bool use_g = inhom && !zero_g_[row1 ? 0 : 1];
        if (!use_a && !use_b && !use_g) return 0.0;
        const double T = geo_.terminal(b, x, y);
        if (T <= 0.0) return 0.0;
        const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / geo_.max_step() - 1e-9)));
        const double ds = T / static_cast<double>(steps);
        auto at = [&](double s, double& xs, double& ys) {
            if (s >= T) {
                xs = x;
                ys = y;
            } else {
                geo_.point(b, x, y, s, xs, ys);
            }
        };
        auto integrand = [&](double xs, double ys) {
            double f = 0.0;
            if (use_g) f += gs.bilinear(xs, ys);
            if (use_a) f += Ca.bilinear(xs, ys) * sample_f1(F1, xs, ys);
            if (use_b) f += Cb.bilinear(xs, ys) * sample_f2(F2, xs, ys);
            return f;
        };
        // The sampled kernels jump across region boundaries, so a sub-interval
        // whose end points lie in different regions is split at the crossing.
        auto tag = [&](double xs, double ys) {
            int t = 0;
            if (use_a) t += static_cast<int>(geo_.region_f1(xs, ys));
            if (use_b) t += 4 * static_cast<int>(geo_.region_f2(xs, ys));
            return t;
        };
        double acc = 0.0;
        double s0 = 0.0, x0, y0;
        at(s0, x0, y0);
        double f0 = integrand(x0, y0);
        int t0 = tag(x0, y0);
        for (std::size_t k = 1; k <= steps; ++k) {
            const double s1 = k == steps ? T : ds * static_cast<double>(k);
            double x1, y1;
            at(s1, x1, y1);
            const double f1 = integrand(x1, y1);
            const int t1 = tag(x1, y1);
            if (t1 == t0) {
                acc += 0.5 * (f0 + f1) * (s1 - s0);
            } else {
                double lo = s0, hi = s1;
                for (int it = 0; it < 60 && hi - lo > 1e-13 * T; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    double xm, ym;
                    at(mid, xm, ym);
                    (tag(xm, ym) == t0 ? lo : hi) = mid;
                }
                double xl, yl, xh, yh;
                at(lo, xl, yl);
                at(hi, xh, yh);
                acc += 0.5 * (f0 + integrand(xl, yl)) * (lo - s0) + 0.5 * (integrand(xh, yh) + f1) * (s1 - hi);
            }
            s0 = s1;
            f0 = f1;
            t0 = t1;
        }
        return acc;
    }

    const GeneralKernelProblem& p_;
    CharacteristicGeometry geo_;
    std::size_t n_;
    std::vector<RegionF1> tag1_;
    std::vector<RegionF2> tag2_;
    bool zero_[4] = {};
    bool zero_g_[2] = {};
};

double sup_norm(const SquareField& a, const SquareField& b) { return std::max(a.max_abs(), b.max_abs()); }

RectKernelPair make_pair(const GeneralKernelProblem& p, const RectOperator& op) {
    RectKernelPair out;
    out.grid = p.grid;
    out.F1 = SquareField(p.grid);
    out.F2 = SquareField(p.grid);
    out.region_f1 = op.tags1();
    out.region_f2 = op.tags2();
    return out;
}

void add_into(SquareField& dst, const SquareField& src) {
    auto d = dst.raw();
    auto s = src.raw();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
}

} // namespace

CharacteristicCurve characteristics(const GeneralKernelProblem& problem, double x, double y, Branch branch,
                                    std::size_t samples) {
    check_in_square(x, y);
    CharacteristicGeometry geo(problem.grid, problem.eps1, problem.eps2, problem.tau);
    CharacteristicCurve c;
    c.terminal = geo.terminal(branch, x, y);
    if (samples == 0)
        samples = 1 + std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c.terminal / geo.max_step())));
    samples = std::max<std::size_t>(samples, 2);
    for (std::size_t k = 0; k < samples; ++k) {
        const double s = c.terminal * static_cast<double>(k) / static_cast<double>(samples - 1);
        double xs, ys;
        geo.point(branch, x, y, s, xs, ys);
        c.s.push_back(s);
        c.x.push_back(xs);
        c.y.push_back(ys);
    }
    return c;
}

RegionF1 region_of_f1(const GeneralKernelProblem& problem, double x, double y) {
    check_in_square(x, y);
    return CharacteristicGeometry(problem.grid, problem.eps1, problem.eps2, problem.tau).region_f1(x, y);
}

RegionF2 region_of_f2(const GeneralKernelProblem& problem, double x, double y) {
    check_in_square(x, y);
    return CharacteristicGeometry(problem.grid, problem.eps1, problem.eps2, problem.tau).region_f2(x, y);
}

RectKernelPair initial_term(const GeneralKernelProblem& problem) {
    problem.validate();
    RectOperator op(problem);
    RectKernelPair out = make_pair(problem, op);
    SquareField zero(problem.grid);
    op.apply(zero, zero, true, out.F1, out.F2);
    out.term_norms = {sup_norm(out.F1, out.F2)};
    out.terms = 1;
    return out;
}

RectKernelPair solve_general(const GeneralKernelProblem& problem, const RectSolverOptions& opts) {
    problem.validate();
    RectOperator op(problem);
    RectKernelPair out = make_pair(problem, op);
    SquareField zero(problem.grid);
    SquareField t1(problem.grid), t2(problem.grid);
    op.apply(zero, zero, true, t1, t2);
    out.F1 = t1;
    out.F2 = t2;
    double norm = sup_norm(t1, t2);
    out.term_norms.push_back(norm);
    out.terms = 1;
    SquareField n1(problem.grid), n2(problem.grid);
    while (norm > opts.term_tolerance) {
        if (out.terms >= opts.max_terms || !std::isfinite(norm))
            throw Error(ErrorCode::NoConvergence, "successive approximation term " + std::to_string(out.terms) +
                                                      " still has sup norm " + std::to_string(norm));
        op.apply(t1, t2, false, n1, n2);
        std::swap(t1, n1);
        std::swap(t2, n2);
        add_into(out.F1, t1);
        add_into(out.F2, t2);
        norm = sup_norm(t1, t2);
        out.term_norms.push_back(norm);
        ++out.terms;
    }
    return out;
}

RectKernelPair solve_fixed_point(const GeneralKernelProblem& problem, const SquareField& F1_start,
                                 const SquareField& F2_start, const RectSolverOptions& opts) {
    problem.validate();
    if (!(F1_start.grid() == problem.grid) || !(F2_start.grid() == problem.grid))
        throw Error(ErrorCode::GridMismatch, "starting iterate on another grid");
    RectOperator op(problem);
    RectKernelPair out = make_pair(problem, op);
    SquareField a1 = F1_start, a2 = F2_start, b1(problem.grid), b2(problem.grid);
    for (std::size_t it = 1; it <= opts.max_terms; ++it) {
        op.apply(a1, a2, true, b1, b2);
        double diff = 0.0;
        for (std::size_t k = 0; k < b1.raw().size(); ++k)
            diff = std::max({diff, std::abs(b1.raw()[k] - a1.raw()[k]), std::abs(b2.raw()[k] - a2.raw()[k])});
        std::swap(a1, b1);
        std::swap(a2, b2);
        out.term_norms.push_back(diff);
        out.terms = it;
        if (!std::isfinite(diff)) break;
        if (diff <= opts.term_tolerance) {
            out.F1 = std::move(a1);
            out.F2 = std::move(a2);
            return out;
        }
    }
    throw Error(ErrorCode::NoConvergence, "Picard iteration for the rectangle kernels did not settle");
}

double SeriesBound::bound(std::size_t n) const {
    const double rate = Cbar * Meps;
    if (n == 0) return M0;
    if (rate <= 0.0 || M0 <= 0.0) return 0.0;
    const double dn = static_cast<double>(n);
    return M0 * std::exp(dn * std::log(rate) - std::lgamma(dn + 1.0));
}

SeriesBound series_bound(const GeneralKernelProblem& problem, const RectKernelPair& first_term) {
    const Grid1D& g = problem.grid;
    const std::size_t n = g.size();
    auto cbar = [&](const SquareField& C) {
        double m = C.max_abs();
        for (std::size_t j = 0; j < n; ++j) {
            auto d = derivative(C.at_y(j), g.h());
            for (double v : d) m = std::max(m, std::abs(v));
        }
        return m;
    };
    const double c11 = cbar(problem.C11), c12 = cbar(problem.C12), c21 = cbar(problem.C21), c22 = cbar(problem.C22);
    SeriesBound b;
    for (double v : problem.q1) b.qbar = std::max(b.qbar, std::abs(v));
    for (double v : derivative(problem.q1, g.h())) b.qbar = std::max(b.qbar, std::abs(v));
    b.Meps = problem.tau;
    for (double v : problem.eps1) b.Meps = std::max(b.Meps, 1.0 / v);
    for (double v : problem.eps2) b.Meps = std::max(b.Meps, 1.0 / v);
    const double row1 = c11 + c12, row2 = c21 + c22;
    const double f1 = first_term.F1.max_abs(), f2 = first_term.F2.max_abs();
    const double fmax = std::max(f1, f2);
    b.M0 = std::max({f1, f2, 2.0 * (c11 * f1 + c12 * f2), 2.0 * (c21 * f1 + c22 * f2),
                     (2.0 * b.qbar * row1 + row2) * fmax});
    b.Cbar = std::max({3.0 * b.qbar * row1 + 2.0 * row2, 3.0 * row1, 3.0 * row2});
    return b;
}

namespace {

GeneralKernelProblem base_problem(const PlantParams& params, const Grid1D& grid, std::span<const double> h1,
                                  std::span<const double> h2, double tau_eff) {
    params.validate(grid);
    if (h1.size() != grid.size() || h2.size() != grid.size())
        throw Error(ErrorCode::GridMismatch, "boundary traces do not match the kernel grid");
    if (!(tau_eff > 0.0)) throw Error(ErrorCode::InvalidParameter, "tau_eff must be positive");
    GeneralKernelProblem p;
    p.grid = grid;
    p.tau = tau_eff;
    p.eps1 = params.eps1.sample(grid);
    p.eps2 = params.eps2.sample(grid);
    p.h1.assign(h1.begin(), h1.end());
    p.h2.assign(h2.begin(), h2.end());
    p.q1.assign(grid.size(), params.q * p.eps1.front() / p.eps2.front());
    p.C11 = p.C12 = p.C21 = p.C22 = p.g1 = p.g2 = SquareField(grid);
    return p;
}

SquareField y_profile(const Grid1D& grid, std::span<const double> v, double sign) {
    SquareField f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) f.at(i, j) = sign * v[j];
    return f;
}

} // namespace

GeneralKernelProblem alpha_problem(const PlantParams& params, const Grid1D& grid, std::span<const double> K21_trace,
                                   std::span<const double> K22_trace, double tau_eff) {
    GeneralKernelProblem p = base_problem(params, grid, K21_trace, K22_trace, tau_eff);
    p.C11 = y_profile(grid, derivative(p.eps1, grid.h()), 1.0);
    p.C12 = y_profile(grid, params.c2.sample(grid), 1.0);
    p.C21 = y_profile(grid, params.c1.sample(grid), 1.0);
    p.C22 = y_profile(grid, derivative(p.eps2, grid.h()), -1.0);
    return p;
}

GeneralKernelProblem beta_problem(const PlantParams& params, const Grid1D& grid, std::span<const double> L21_trace,
                                  std::span<const double> L22_trace, double tau_eff) {
    // The inverse map's kernels obey the same transport operators as alpha
    // (F1 towards smaller y, F2 towards larger y) with only the eps' terms.
    GeneralKernelProblem p = base_problem(params, grid, L21_trace, L22_trace, tau_eff);
    p.C11 = y_profile(grid, derivative(p.eps1, grid.h()), 1.0);
    p.C22 = y_profile(grid, derivative(p.eps2, grid.h()), -1.0);
    return p;
}

GainTrace gain_traces(const RectKernelPair& pair, const GeneralKernelProblem& problem, GainKind kind) {
    GainTrace g;
    g.kind = kind;
    const std::size_t n = pair.grid.size();
    g.values.resize(n);
    const double scale = problem.tau * problem.eps2.back();
    for (std::size_t i = 0; i < n; ++i) g.values[i] = scale * pair.F2(i, n - 1);
    return g;
}

RectResidual rect_residual(const GeneralKernelProblem& p, const RectKernelPair& pair) {
    const std::size_t n = p.grid.size();
    const double h = p.grid.h();
    RectResidual r;
    double s1 = 0.0, s2 = 0.0;
    auto t1 = [&](std::size_t i, std::size_t j) { return pair.region_f1[i * n + j]; };
    auto t2 = [&](std::size_t i, std::size_t j) { return pair.region_f2[i * n + j]; };
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double y_speed1 = p.eps1[j], y_speed2 = p.eps2[j];
            if (j + 1 < n && t1(i, j) == t1(i - 1, j) && t1(i, j) == t1(i, j + 1)) {
                const double fx = (pair.F1(i, j) - pair.F1(i - 1, j)) / (p.tau * h);
                const double fy = (pair.F1(i, j + 1) - pair.F1(i, j)) / h;
                const double rhs = p.g1(i, j) + p.C11(i, j) * pair.F1(i, j) + p.C12(i, j) * pair.F2(i, j);
                const double res = std::abs(fx - y_speed1 * fy - rhs);
                r.f1_sup = std::max(r.f1_sup, res);
                s1 += res;
                ++r.f1_nodes;
            }
            if (j >= 1 && t2(i, j) == t2(i - 1, j) && t2(i, j) == t2(i, j - 1)) {
                const double fx = (pair.F2(i, j) - pair.F2(i - 1, j)) / (p.tau * h);
                const double fy = (pair.F2(i, j) - pair.F2(i, j - 1)) / h;
                const double rhs = p.g2(i, j) + p.C21(i, j) * pair.F1(i, j) + p.C22(i, j) * pair.F2(i, j);
                const double res = std::abs(fx + y_speed2 * fy - rhs);
                r.f2_sup = std::max(r.f2_sup, res);
                s2 += res;
                ++r.f2_nodes;
            }
        }
    r.f1_mean = r.f1_nodes ? s1 / static_cast<double>(r.f1_nodes) : 0.0;
    r.f2_mean = r.f2_nodes ? s2 / static_cast<double>(r.f2_nodes) : 0.0;
    return r;
}

} // namespace delaycomp

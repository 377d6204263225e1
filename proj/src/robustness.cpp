#include "delaycomp/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "delaycomp/parallel.hpp"

namespace delaycomp {

void MismatchData::validate() const {
    const std::size_t n = grid.size();
    for (const auto* v : {&mu.values, &mu_bar.values, &beta1, &beta2, &beta1_bar, &beta2_bar, &phi1, &phi2})
        if (v->size() != n) throw Error(ErrorCode::GridMismatch, "mismatch data traces are not on one grid");
    if (!(tau > 0.0) || !(tau_bar > 0.0)) throw Error(ErrorCode::InvalidParameter, "delays must be positive");
}

namespace {

struct BetaTraces {
    GainTrace mu;
    std::vector<double> beta1, beta2;
};

BetaTraces beta_traces(const PlantParams& params, const Grid1D& grid, const InverseKernels& L, double tau_eff,
                       const RectSolverOptions& opts) {
    const auto problem = beta_problem(params, grid, L.L21.trace_at_one(), L.L22.trace_at_one(), tau_eff);
    const auto pair = solve_general(problem, opts);
    BetaTraces out;
    out.mu = gain_traces(pair, problem, GainKind::Mu);
    const std::size_t n = grid.size();
    out.beta1.resize(n);
    out.beta2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.beta1[j] = pair.F1(n - 1, j);
        out.beta2[j] = pair.F2(n - 1, j);
    }
    return out;
}

GainTrace compensator_gain(const PlantParams& params, const Grid1D& grid, const DirectKernels& K, double tau_eff,
                            const RectSolverOptions& opts) {
    const auto problem = alpha_problem(params, grid, K.K21.trace_at_one(), K.K22.trace_at_one(), tau_eff);
    return gain_traces(solve_general(problem, opts), problem, GainKind::P);
}

MismatchData assemble(const PlantParams& params, const Grid1D& grid, const BetaTraces& exact, const BetaTraces& barred,
                      double tau_bar) {
    MismatchData d;
    d.grid = grid;
    d.mu = exact.mu;
    d.mu_bar = barred.mu;
    d.beta1 = exact.beta1;
    d.beta2 = exact.beta2;
    d.beta1_bar = barred.beta1;
    d.beta2_bar = barred.beta2;
    const auto phi1 = build_travel_map(params.eps1, grid).samples();
    const auto phi2 = build_travel_map(params.eps2, grid).samples();
    d.phi1.assign(phi1.begin(), phi1.end());
    d.phi2.assign(phi2.begin(), phi2.end());
    d.q = params.q;
    d.tau = params.tau;
    d.tau_bar = tau_bar;
    d.delta_tau = tau_bar - params.tau;
    return d;
}

} // namespace

MismatchData build_mismatch(const PlantParams& params, const Grid1D& grid, const TriangleKernelSet& tri,
                            const RectSolverOptions& opts) {
    params.validate(grid);
    const BetaTraces exact = beta_traces(params, grid, tri.L, params.tau, opts);
    const BetaTraces barred =
        params.tau_bar == params.tau ? exact : beta_traces(params, grid, tri.L, params.tau_bar, opts);
    MismatchData d = assemble(params, grid, exact, barred, params.tau_bar);
    d.p_bar = compensator_gain(params, grid, tri.K, params.tau_bar, opts);
    return d;
}

cplx ExponentialSum::operator()(cplx s) const {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < coeff.size(); ++k) acc += coeff[k] * std::exp(-delay[k] * s);
    return acc;
}

namespace {

// Merges equal delays so that exactly cancelling pairs vanish.
ExponentialSum merged(std::vector<std::pair<double, double>> terms) {
    std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    ExponentialSum out;
    for (std::size_t k = 0; k < terms.size();) {
        const double d = terms[k].first;
        double c = 0.0;
        for (; k < terms.size() && terms[k].first == d; ++k) c += terms[k].second;
        if (c != 0.0) {
            out.delay.push_back(d);
            out.coeff.push_back(c);
        }
    }
    return out;
}

std::vector<double> refined(const Grid1D& grid, const Grid1D& fine, std::span<const double> f) {
    std::vector<double> out(fine.size());
    for (std::size_t k = 0; k < fine.size(); ++k) out[k] = interpolate(grid, f, fine.x(k));
    return out;
}

} // namespace

std::array<ExponentialSum, 6> h_terms(const MismatchData& d, std::size_t refine) {
    d.validate();
    refine = std::max<std::size_t>(1, refine);
    const Grid1D fine((d.grid.size() - 1) * refine + 1);
    const std::size_t m = fine.size();
    const auto mu = refined(d.grid, fine, d.mu.values);
    const auto mub = refined(d.grid, fine, d.mu_bar.values);
    const auto b1 = refined(d.grid, fine, d.beta1);
    const auto b1b = refined(d.grid, fine, d.beta1_bar);
    const auto b2 = refined(d.grid, fine, d.beta2);
    const auto b2b = refined(d.grid, fine, d.beta2_bar);
    const auto p1 = refined(d.grid, fine, d.phi1);
    const auto p2 = refined(d.grid, fine, d.phi2);
    const double p2_total = d.phi2.back();
    std::array<std::vector<std::pair<double, double>>, 6> t;
    for (std::size_t k = 0; k < m; ++k) {
        const double w = fine.h() * ((k == 0 || k + 1 == m) ? 0.5 : 1.0);
        const double y = fine.x(k);
        // H1: mu (e^{-tau_bar y s} - e^{-tau y s}); H2: (mu_bar - mu) e^{-tau_bar y s}
        t[0].push_back({d.tau_bar * y, w * mu[k]});
        t[0].push_back({d.tau * y, -w * mu[k]});
        t[1].push_back({d.tau_bar * y, w * (mub[k] - mu[k])});
        // H3, H4: reflected path through w1, delay phi1(y) + phi2(1) + tau
        const double r1 = p1[k] + p2_total;
        t[2].push_back({r1 + d.tau_bar, w * d.q * b1[k]});
        t[2].push_back({r1 + d.tau, -w * d.q * b1[k]});
        t[3].push_back({r1 + d.tau_bar, w * d.q * (b1b[k] - b1[k])});
        // H5, H6: direct path through w2, delay phi2(1) - phi2(y) + tau
        const double r2 = p2_total - p2[k];
        t[4].push_back({r2 + d.tau_bar, w * b2[k]});
        t[4].push_back({r2 + d.tau, -w * b2[k]});
        t[5].push_back({r2 + d.tau_bar, w * (b2b[k] - b2[k])});
    }
    std::array<ExponentialSum, 6> out;
    for (int i = 0; i < 6; ++i) out[i] = merged(std::move(t[i]));
    return out;
}

cplx eval_H(const MismatchData& data, int i, cplx s, std::size_t refine) {
    if (i < 1 || i > 6) throw Error(ErrorCode::InvalidParameter, "H index must be in 1..6");
    return h_terms(data, refine)[i - 1](s);
}

cplx eval_P(const MismatchData& data, cplx s, std::size_t refine) {
    const auto H = h_terms(data, refine);
    cplx p = 1.0;
    for (const auto& h : H) p -= h(s);
    return p;
}

namespace {

// D, M, Pbar, B of the closed-loop characteristic function.
std::array<ExponentialSum, 4> closed_loop_terms(const MismatchData& d, std::size_t refine) {
    d.validate();
    if (d.p_bar.values.size() != d.grid.size())
        throw Error(ErrorCode::InvalidParameter, "closed-loop characteristic function needs the tau_bar compensator gain");
    refine = std::max<std::size_t>(1, refine);
    const Grid1D fine((d.grid.size() - 1) * refine + 1);
    const std::size_t m = fine.size();
    const double hf = fine.h();
    const auto mub = refined(d.grid, fine, d.mu_bar.values);
    const auto pb = refined(d.grid, fine, d.p_bar.values);
    const auto b1b = refined(d.grid, fine, d.beta1_bar);
    const auto b2b = refined(d.grid, fine, d.beta2_bar);
    const auto p1 = refined(d.grid, fine, d.phi1);
    const auto p2 = refined(d.grid, fine, d.phi2);
    const double p2_total = d.phi2.back();
    auto weight = [&](std::size_t k) { return hf * ((k == 0 || k + 1 == m) ? 0.5 : 1.0); };

    std::array<ExponentialSum, 4> out;
    out[0] = merged({{d.tau, 1.0}, {d.tau_bar, -1.0}});

    // Inner integral over xi in [y_j, 1] with its own trapezoid end weights.
    std::vector<double> conv(m, 0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double outer = weight(j) * mub[m - 1 - j];
        for (std::size_t k = 0; j + k < m; ++k) {
            const double inner = hf * ((k == 0 || j + k + 1 == m) ? 0.5 : 1.0);
            conv[k] += outer * inner * pb[j + k];
        }
    }
    std::vector<std::pair<double, double>> tm, tp, tb;
    for (std::size_t k = 0; k < m; ++k) {
        tm.push_back({d.tau_bar * fine.x(k), conv[k]});
        tp.push_back({d.tau_bar * fine.x(k), weight(k) * pb[k]});
        tb.push_back({p1[k] + p2_total, weight(k) * d.q * b1b[k]});
        tb.push_back({p2_total - p2[k], weight(k) * b2b[k]});
    }
    out[1] = merged(std::move(tm));
    out[2] = merged(std::move(tp));
    out[3] = merged(std::move(tb));
    return out;
}

cplx closed_loop_combine(const cplx* v, double* margin) {
    const cplx loop = v[0] * (-v[1] + (1.0 - v[2]) * v[3]);
    if (margin) *margin = 1.0 - std::abs(loop);
    return 1.0 - loop;
}

cplx h_sum_combine(const cplx* v, double* margin) {
    cplx p = 1.0;
    double sum_abs = 0.0;
    for (int i = 0; i < 6; ++i) {
        p -= v[i];
        sum_abs += std::abs(v[i]);
    }
    if (margin) *margin = 1.0 - sum_abs;
    return p;
}

} // namespace

cplx eval_closed_loop(const MismatchData& data, cplx s, std::size_t refine) {
    const auto t = closed_loop_terms(data, refine);
    const cplx v[4] = {t[0](s), t[1](s), t[2](s), t[3](s)};
    return closed_loop_combine(v, nullptr);
}

namespace {

void check_window(const ScanWindow& w) {
    if (!(w.sigma_max > 0.0) || !(w.omega_max > 0.0) || w.n_omega < 2 || w.n_sigma < 2 || !(w.contour_threshold >= 0.0))
        throw Error(ErrorCode::InvalidParameter, "scan window and resolution must be positive");
}

StabilityReport empty_report(const ScanWindow& w) {
    StabilityReport r;
    r.sigma.resize(w.n_sigma);
    r.omega.resize(w.n_omega);
    for (std::size_t a = 0; a < w.n_sigma; ++a)
        r.sigma[a] = w.sigma_max * static_cast<double>(a) / static_cast<double>(w.n_sigma - 1);
    for (std::size_t b = 0; b < w.n_omega; ++b)
        r.omega[b] = -w.omega_max + 2.0 * w.omega_max * static_cast<double>(b) / static_cast<double>(w.n_omega - 1);
    r.abs_P.assign(w.n_sigma * w.n_omega, 0.0);
    return r;
}

void finish_report(StabilityReport& r, const std::function<cplx(cplx)>& f, const ScanWindow& w) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < r.abs_P.size(); ++k)
        if (r.abs_P[k] < r.abs_P[best]) best = k;
    r.min_abs_P_at = {r.sigma[best / w.n_omega], r.omega[best % w.n_omega]};
    r.zero_count = winding_number(f, w, &r.winding_raw, &r.min_abs_P_contour, &r.contour_samples);
    r.stable = r.zero_count == 0;
}

// Phase change along [a, b], halving the step until each piece turns by
// less than pi/2.
double phase_along(const std::function<cplx(cplx)>& f, cplx a, cplx fa, cplx b, cplx fb, int depth, double& min_abs,
                   std::size_t& samples, double threshold) {
    const double d = std::arg(fb / fa);
    if (std::abs(d) <= std::numbers::pi / 2 || depth >= 40) return d;
    const cplx m = 0.5 * (a + b);
    const cplx fm = f(m);
    ++samples;
    min_abs = std::min(min_abs, std::abs(fm));
    if (std::abs(fm) < threshold)
        throw Error(ErrorCode::InconclusiveContour, "|P| = " + std::to_string(std::abs(fm)) + " on the contour near s = " +
                                                        std::to_string(m.real()) + " + " + std::to_string(m.imag()) +
                                                        "i; refine or move the window");
    return phase_along(f, a, fa, m, fm, depth + 1, min_abs, samples, threshold) +
           phase_along(f, m, fm, b, fb, depth + 1, min_abs, samples, threshold);
}

} // namespace

int winding_number(const std::function<cplx(cplx)>& f, const ScanWindow& w, double* raw, double* min_abs_out,
                   std::size_t* samples_out) {
    check_window(w);
    // Counter-clockwise: bottom, right, top, left edges.
    std::vector<cplx> path;
    auto edge = [&](cplx from, cplx to, std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) path.push_back(from + (to - from) * (static_cast<double>(k) / static_cast<double>(n)));
    };
    const cplx c00{0.0, -w.omega_max}, c10{w.sigma_max, -w.omega_max}, c11{w.sigma_max, w.omega_max},
        c01{0.0, w.omega_max};
    edge(c00, c10, w.n_sigma);
    edge(c10, c11, w.n_omega);
    edge(c11, c01, w.n_sigma);
    edge(c01, c00, w.n_omega);
    std::vector<cplx> values(path.size());
    parallel_for(path.size(), [&](std::size_t k) { values[k] = f(path[k]); });
    double min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); ++k) {
        min_abs = std::min(min_abs, std::abs(values[k]));
        if (!(std::abs(values[k]) >= w.contour_threshold))
            throw Error(ErrorCode::InconclusiveContour, "|P| = " + std::to_string(std::abs(values[k])) +
                                                            " on the contour near s = " + std::to_string(path[k].real()) +
                                                            " + " + std::to_string(path[k].imag()) +
                                                            "i; refine or move the window");
    }
    std::size_t samples = path.size();
    double total = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const std::size_t next = (k + 1) % path.size();
        total += phase_along(f, path[k], values[k], path[next], values[next], 0, min_abs, samples, w.contour_threshold);
    }
    const double turns = total / (2.0 * std::numbers::pi);
    if (raw) *raw = turns;
    if (min_abs_out) *min_abs_out = min_abs;
    if (samples_out) *samples_out = samples;
    return static_cast<int>(std::lround(turns));
}

namespace {

// Samples a function assembled from exponential sums. Each sum is advanced
// along omega by a fixed phase rotation per term, re-anchored periodically.
template <std::size_t N, class Combine>
StabilityReport scan_sums(const std::array<ExponentialSum, N>& sums, Combine combine, const ScanWindow& w) {
    StabilityReport r = empty_report(w);
    const std::size_t nw = w.n_omega;
    const double domega = r.omega[1] - r.omega[0];
    std::vector<double> row_margin(w.n_sigma, std::numeric_limits<double>::infinity());
    parallel_for(w.n_sigma, [&](std::size_t a) {
        const double sigma = r.sigma[a];
        std::vector<std::array<cplx, N>> vals(nw);
        for (auto& v : vals) v.fill(0.0);
        for (std::size_t i = 0; i < N; ++i) {
            const auto& e = sums[i];
            for (std::size_t k = 0; k < e.coeff.size(); ++k) {
                const double d = e.delay[k];
                const double mag = e.coeff[k] * std::exp(-d * sigma);
                const cplx ratio = std::polar(1.0, -d * domega);
                cplx z;
                for (std::size_t b = 0; b < nw; ++b) {
                    if (b % 256 == 0) z = std::polar(mag, -d * r.omega[b]);
                    vals[b][i] += z;
                    z *= ratio;
                }
            }
        }
        for (std::size_t b = 0; b < nw; ++b) {
            double margin = 0.0;
            r.abs_P[a * nw + b] = std::abs(combine(vals[b].data(), &margin));
            row_margin[a] = std::min(row_margin[a], margin);
        }
    });
    r.min_margin = *std::min_element(row_margin.begin(), row_margin.end());
    finish_report(r, [&](cplx s) {
        std::array<cplx, N> v;
        for (std::size_t i = 0; i < N; ++i) v[i] = sums[i](s);
        return combine(v.data(), nullptr);
    }, w);
    return r;
}

} // namespace

StabilityReport scan_P(const MismatchData& data, const ScanWindow& w) {
    check_window(w);
    return scan_sums(h_terms(data, w.refine), h_sum_combine, w);
}

StabilityReport scan_closed_loop(const MismatchData& data, const ScanWindow& w) {
    check_window(w);
    return scan_sums(closed_loop_terms(data, w.refine), closed_loop_combine, w);
}

StabilityReport scan_P(const std::function<cplx(cplx)>& P, const ScanWindow& w) {
    check_window(w);
    StabilityReport r = empty_report(w);
    parallel_for(w.n_sigma, [&](std::size_t a) {
        for (std::size_t b = 0; b < w.n_omega; ++b) r.abs_P[a * w.n_omega + b] = std::abs(P({r.sigma[a], r.omega[b]}));
    });
    r.min_margin = std::numeric_limits<double>::quiet_NaN();
    finish_report(r, P, w);
    return r;
}

MarginResult margin_search(const PlantParams& params, const Grid1D& grid, const TriangleKernelSet& tri, double lo,
                           double hi, const ScanWindow& window, std::size_t bisections, CharacteristicModel model) {
    if (!(lo >= 0.0) || !(hi >= lo)) throw Error(ErrorCode::InvalidParameter, "margin range must satisfy 0 <= lo <= hi");
    params.validate(grid);
    MarginResult out;
    const BetaTraces exact = beta_traces(params, grid, tri.L, params.tau, {});
    auto probe = [&](double dt) {
        bool stable = true;
        if (dt != 0.0) {
            const double tau_bar = params.tau + dt;
            MismatchData d = assemble(params, grid, exact, beta_traces(params, grid, tri.L, tau_bar, {}), tau_bar);
            try {
                if (model == CharacteristicModel::HSum) {
                    stable = scan_P(d, window).stable;
                } else {
                    d.p_bar = compensator_gain(params, grid, tri.K, tau_bar, {});
                    stable = scan_closed_loop(d, window).stable;
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::InconclusiveContour) throw;
                stable = false;
            }
        }
        out.probes.push_back({dt, stable});
        return stable;
    };
    if (hi == lo) {
        probe(lo);
        out.margin = lo;
        return out;
    }
    if (probe(hi)) {
        out.margin = hi;
        return out;
    }
    if (!probe(lo)) {
        out.margin = lo;
        return out;
    }
    double a = lo, b = hi;
    for (std::size_t k = 0; k < bisections; ++k) {
        const double m = 0.5 * (a + b);
        (probe(m) ? a : b) = m;
    }
    out.margin = a;
    return out;
}

} // namespace delaycomp

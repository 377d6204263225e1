#include "delaycomp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <boost/version.hpp>
#include <openssl/opensslv.h>

#include "delaycomp/csv.hpp"
#include "delaycomp/robustness.hpp"
#include "delaycomp/svg.hpp"

namespace delaycomp {
namespace {

using nlohmann::json;

double max_abs_diff(const KernelFieldTriangle& a, const KernelFieldTriangle& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.raw().size(); ++k) m = std::max(m, std::abs(a.raw()[k] - b.raw()[k]));
    return m;
}

void write_triangle(RunManifest& m, const std::string& name, const KernelFieldTriangle& f) {
    CsvWriter csv(m.path(name), {"x", "y", "value"});
    const Grid1D& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) csv.row({g.x(i), g.x(j), f(i, j)});
    m.add(name);
}

void write_square(RunManifest& m, const std::string& name, const SquareField& f) {
    CsvWriter csv(m.path(name), {"x", "y", "value"});
    const Grid1D& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) csv.row({g.x(i), g.x(j), f(i, j)});
    m.add(name);
}

void write_svg(RunManifest& m, const std::string& name, const std::string& svg) {
    write_text(m.path(name), svg);
    m.add(name);
}

Heatmap square_heatmap(const SquareField& f, const std::string& title) {
    Heatmap h;
    h.title = title;
    h.xlabel = "y";
    h.ylabel = "x";
    h.x = h.y = f.grid().nodes();
    h.values.assign(f.raw().begin(), f.raw().end()); // row i (x) is the vertical axis
    return h;
}

json window_json(const ScanWindow& w) {
    return {{"sigma_max", w.sigma_max}, {"omega_max", w.omega_max}, {"n_sigma", w.n_sigma},
            {"n_omega", w.n_omega}, {"refine", w.refine}, {"contour_threshold", w.contour_threshold}};
}

} // namespace

KernelBundle solve_kernels(const PlantParams& params, const Grid1D& grid) {
    params.validate(grid);
    KernelBundle b{grid, {}, {}, {}, {}, {}, {}, {}, json::object()};
    Stopwatch sw;
    b.tri.K = solve_K(params, grid);
    b.tri.L = solve_L(params, grid, b.tri.K);
    const InverseKernels Lg = solve_L_goursat(params, grid);
    const double t_tri = sw.seconds();

    b.alpha_problem = alpha_problem(params, grid, b.tri.K.K21.trace_at_one(), b.tri.K.K22.trace_at_one(), params.tau_bar);
    b.alpha = solve_general(b.alpha_problem);
    b.beta_problem = beta_problem(params, grid, b.tri.L.L21.trace_at_one(), b.tri.L.L22.trace_at_one(), params.tau);
    b.beta = solve_general(b.beta_problem);
    b.p = gain_traces(b.alpha, b.alpha_problem, GainKind::P);
    b.mu = gain_traces(b.beta, b.beta_problem, GainKind::Mu);

    const auto tri_res = direct_kernel_residual(params, b.tri.K);
    const auto ra = rect_residual(b.alpha_problem, b.alpha);
    const auto rb = rect_residual(b.beta_problem, b.beta);
    const double l_gap = std::max({max_abs_diff(b.tri.L.L11, Lg.L11), max_abs_diff(b.tri.L.L12, Lg.L12),
                                   max_abs_diff(b.tri.L.L21, Lg.L21), max_abs_diff(b.tri.L.L22, Lg.L22)});
    json tri_json = json::array();
    for (const auto& r : tri_res) tri_json.push_back({{"sup", r.sup}, {"mean", r.mean}});
    auto rect_json = [](const RectKernelPair& k, const RectResidual& r) {
        return json{{"terms", k.terms},
                    {"last_term_norm", k.term_norms.empty() ? 0.0 : k.term_norms.back()},
                    {"residual_f1_mean", r.f1_mean},
                    {"residual_f2_mean", r.f2_mean},
                    {"residual_f1_sup", r.f1_sup},
                    {"residual_f2_sup", r.f2_sup}};
    };
    b.diagnostics = {{"nodes", grid.size()},
                     {"K_iterations", b.tri.K.iterations},
                     {"K_final_update", b.tri.K.final_update},
                     {"L_iterations", b.tri.L.iterations},
                     {"L_final_update", b.tri.L.final_update},
                     {"L_resolvent_vs_goursat", l_gap},
                     {"K_residual", tri_json},
                     {"alpha", rect_json(b.alpha, ra)},
                     {"beta", rect_json(b.beta, rb)},
                     {"triangle_seconds", t_tri},
                     {"rectangle_seconds", sw.seconds() - t_tri}};
    return b;
}

std::vector<double> resample(const Grid1D& from, std::span<const double> values, const Grid1D& to) {
    if (values.size() != from.size()) throw Error(ErrorCode::GridMismatch, "resample: samples do not match grid");
    if (from == to) return {values.begin(), values.end()};
    std::vector<double> out(to.size());
    for (std::size_t i = 0; i < to.size(); ++i) out[i] = interpolate(from, values, to.x(i));
    return out;
}

ControllerGains resample_gains(const ControllerGains& gains, const Grid1D& to) {
    ControllerGains g = gains;
    g.grid = to;
    g.a1 = resample(gains.grid, gains.a1, to);
    g.a2 = resample(gains.grid, gains.a2, to);
    g.p.values = resample(gains.grid, gains.p.values, to);
    return g;
}

Controller make_controller(ControllerKind kind, const KernelBundle& k, const Grid1D& sim_grid) {
    switch (kind) {
    case ControllerKind::Compensated:
        return Controller::compensated(
            resample_gains(ControllerGains::from_alpha(k.alpha, k.alpha_problem), sim_grid));
    case ControllerKind::Nominal:
        return Controller::nominal(resample(k.grid, k.tri.K.K21.trace_at_one(), sim_grid),
                                   resample(k.grid, k.tri.K.K22.trace_at_one(), sim_grid));
    case ControllerKind::OpenLoop: break;
    }
    return Controller::open_loop();
}

RunManifest::RunManifest(std::filesystem::path out_dir, const ExperimentConfig& config, std::string command)
    : dir_(std::move(out_dir)) {
    std::filesystem::create_directories(dir_);
    json_ = {{"command", command},
             {"config_sha256", sha256_hex(config.canonical)},
             {"versions",
              {{"delaycomp", "1.0.0"},
               {"compiler", __VERSION__},
               {"boost", BOOST_LIB_VERSION},
               {"openssl", OPENSSL_VERSION_TEXT},
               {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
             {"files", json::array()},
             {"timings", json::object()},
             {"diagnostics", json::object()}};
}

void RunManifest::add(const std::string& name) {
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void RunManifest::timing(const std::string& stage, double seconds) { json_["timings"][stage] = seconds; }

void RunManifest::write() {
    for (const auto& f : files_)
        if (!std::filesystem::exists(dir_ / f))
            throw Error(ErrorCode::ConfigError, "manifest lists missing file " + f);
    json_["files"] = files_;
    write_text(dir_ / "manifest.json", json_.dump(2) + "\n");
}

int cmd_kernels(const ExperimentConfig& config, RunManifest& m) {
    Stopwatch sw;
    const Grid1D grid(config.kernel_nodes);
    const KernelBundle k = solve_kernels(config.plant, grid);
    m.timing("kernels", sw.seconds());
    m.diagnostics()["kernels"] = k.diagnostics;

    Stopwatch io;
    write_triangle(m, "K11.csv", k.tri.K.K11);
    write_triangle(m, "K12.csv", k.tri.K.K12);
    write_triangle(m, "K21.csv", k.tri.K.K21);
    write_triangle(m, "K22.csv", k.tri.K.K22);
    write_triangle(m, "L11.csv", k.tri.L.L11);
    write_triangle(m, "L12.csv", k.tri.L.L12);
    write_triangle(m, "L21.csv", k.tri.L.L21);
    write_triangle(m, "L22.csv", k.tri.L.L22);
    write_square(m, "alpha1.csv", k.alpha.F1);
    write_square(m, "alpha2.csv", k.alpha.F2);
    write_square(m, "beta1.csv", k.beta.F1);
    write_square(m, "beta2.csv", k.beta.F2);

    const std::size_t n = grid.size();
    const auto a1 = k.alpha.F1.at_x(n - 1), a2 = k.alpha.F2.at_x(n - 1);
    {
        CsvWriter csv(m.path("traces.csv"), {"s", "alpha1_x1", "alpha2_x1", "p", "mu"});
        for (std::size_t j = 0; j < n; ++j) csv.row({grid.x(j), a1[j], a2[j], k.p.values[j], k.mu.values[j]});
        m.add("traces.csv");
    }
    write_svg(m, "alpha1.svg", render_heatmap(square_heatmap(k.alpha.F1, "alpha1(x, y)")));
    write_svg(m, "alpha2.svg", render_heatmap(square_heatmap(k.alpha.F2, "alpha2(x, y)")));
    const auto s = grid.nodes();
    LineChart traces{"Gain traces", "s", "value", false,
                     {{"alpha1(1,s)", s, a1}, {"alpha2(1,s)", s, a2}, {"p(s)", s, k.p.values}}};
    write_svg(m, "traces.svg", render_line_chart(traces));
    m.timing("write", io.seconds());

    const auto& d = k.diagnostics;
    std::cout << "kernels: n=" << n << "  K iterations=" << d["K_iterations"] << "  alpha terms=" << k.alpha.terms
              << "  beta terms=" << k.beta.terms << "\n  alpha residual mean (F1, F2) = "
              << d["alpha"]["residual_f1_mean"] << ", " << d["alpha"]["residual_f2_mean"] << "\n";
    return ExitOk;
}

int cmd_simulate(const ExperimentConfig& config, RunManifest& m) {
    const Grid1D sim_grid(config.sim_nodes);
    Controller controller = Controller::open_loop();
    if (config.controller != ControllerKind::OpenLoop) {
        Stopwatch sw;
        const KernelBundle k = solve_kernels(config.plant, Grid1D(config.kernel_nodes));
        m.timing("kernels", sw.seconds());
        m.diagnostics()["kernels"] = k.diagnostics;
        controller = make_controller(config.controller, k, sim_grid);
    }

    SimOptions opts;
    opts.dt = config.dt;
    opts.t_end = config.t_end;
    opts.snapshot_every = config.snapshot_every;
    const auto u10 = config.initial_u1(sim_grid), u20 = config.initial_u2(sim_grid);

    Stopwatch sw;
    SimTrajectory tr;
    try {
        tr = simulate(config.plant, sim_grid, u10, u20, controller, opts);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteState) throw;
        m.timing("simulate", sw.seconds());
        m.diagnostics()["simulation"] = {{"blow_up", true}, {"message", e.what()}};
        std::cerr << "simulate: " << e.what() << "\n";
        return ExitBlowUp;
    }
    m.timing("simulate", sw.seconds());

    Stopwatch io;
    {
        CsvWriter csv(m.path("trajectory.csv"), {"t", "x", "u1", "u2", "v"});
        for (const auto& s : tr.snapshots)
            for (std::size_t i = 0; i < sim_grid.size(); ++i) csv.row({s.t, sim_grid.x(i), s.u1[i], s.u2[i], s.v[i]});
        m.add("trajectory.csv");
    }
    {
        CsvWriter csv(m.path("summary.csv"), {"t", "L2", "sup", "U"});
        for (std::size_t k = 0; k < tr.t.size(); ++k) csv.row({tr.t[k], tr.l2[k], tr.sup[k], tr.U[k]});
        m.add("summary.csv");
    }
    const json meta = {{"nx", tr.meta.nx},
                       {"steps", tr.meta.steps},
                       {"dx", tr.meta.dx},
                       {"dt", tr.meta.dt},
                       {"tau", tr.meta.tau},
                       {"tau_bar", tr.meta.tau_bar},
                       {"delay_cells", tr.meta.delay_cells},
                       {"history_steps", tr.meta.history_steps},
                       {"controller", tr.meta.controller},
                       {"t_end", config.t_end},
                       {"snapshot_every", config.snapshot_every}};
    write_text(m.path("metadata.json"), meta.dump(2) + "\n");
    m.add("metadata.json");

    write_svg(m, "l2.svg",
              render_line_chart({"L2 norm of (u1, u2)", "t", "L2", true, {{"L2", tr.t, tr.l2}, {"sup", tr.t, tr.sup}}}));
    write_svg(m, "control.svg", render_line_chart({"Control input U(t)", "t", "U", false, {{"U", tr.t, tr.U}}}));

    LineChart snaps{"State snapshots u1(x, t)", "x", "u1", false, {}};
    const std::size_t picks = std::min<std::size_t>(6, tr.snapshots.size());
    for (std::size_t k = 0; k < picks; ++k) {
        const auto& s = tr.snapshots[picks > 1 ? k * (tr.snapshots.size() - 1) / (picks - 1) : 0];
        snaps.series.push_back({"t=" + format_number(std::round(s.t * 100) / 100), sim_grid.nodes(), s.u1});
    }
    write_svg(m, "snapshots.svg", render_line_chart(snaps));
    for (int which = 1; which <= 2; ++which) {
        Heatmap h;
        h.title = which == 1 ? "u1(x, t)" : "u2(x, t)";
        h.xlabel = "x";
        h.ylabel = "t";
        h.x = sim_grid.nodes();
        for (const auto& s : tr.snapshots) {
            h.y.push_back(s.t);
            const auto& u = which == 1 ? s.u1 : s.u2;
            h.values.insert(h.values.end(), u.begin(), u.end());
        }
        write_svg(m, which == 1 ? "u1_xt.svg" : "u2_xt.svg", render_heatmap(h));
    }
    m.timing("write", io.seconds());

    const double l2_0 = tr.l2.front();
    const double peak = *std::max_element(tr.l2.begin(), tr.l2.end());
    m.diagnostics()["simulation"] = {{"blow_up", false},
                                     {"l2_initial", l2_0},
                                     {"l2_final", tr.l2.back()},
                                     {"l2_peak", peak},
                                     {"t_final_settling", t_final(config.plant, sim_grid)}};
    std::cout << "simulate: controller=" << to_string(config.controller) << "  L2(0)=" << l2_0
              << "  L2(" << tr.t.back() << ")=" << tr.l2.back() << "  peak=" << peak << "\n";
    return ExitOk;
}

int cmd_robust(const ExperimentConfig& config, RunManifest& m, bool sweep) {
    const Grid1D grid(config.kernel_nodes);
    config.plant.validate(grid);
    Stopwatch sw;
    TriangleKernelSet tri;
    tri.K = solve_K(config.plant, grid);
    tri.L = solve_L(config.plant, grid, tri.K);
    const MismatchData data = build_mismatch(config.plant, grid, tri);
    m.timing("kernels", sw.seconds());

    json verdicts = json::object();
    std::string summary;
    int status = ExitOk;
    auto run = [&](const std::string& tag, const std::string& label, auto&& scan) {
        Stopwatch t;
        json v = {{"delta_tau", data.delta_tau}};
        try {
            const StabilityReport r = scan();
            {
                CsvWriter csv(m.path(tag + ".csv"), {"s_re", "s_im", "abs"});
                for (std::size_t a = 0; a < r.sigma.size(); ++a)
                    for (std::size_t b = 0; b < r.omega.size(); ++b)
                        csv.row({r.sigma[a], r.omega[b], r.abs_P[a * r.omega.size() + b]});
                m.add(tag + ".csv");
            }
            Heatmap h{"|" + label + "(s)| over the scan window", "Im s", "Re s", r.omega, r.sigma, r.abs_P, true};
            write_svg(m, tag + ".svg", render_heatmap(h));
            v.update({{"stable", r.stable},
                      {"zero_count", r.zero_count},
                      {"winding_raw", r.winding_raw},
                      {"min_margin", std::isnan(r.min_margin) ? json(nullptr) : json(r.min_margin)},
                      {"min_abs_on_contour", r.min_abs_P_contour},
                      {"contour_samples", r.contour_samples}});
            summary += label + ": " + (r.stable ? "stable" : "unstable") + " (zeros in window: " +
                       std::to_string(r.zero_count) + ", min margin: " + format_number(r.min_margin) + ")\n";
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InconclusiveContour) throw;
            v["inconclusive"] = e.what();
            summary += label + ": inconclusive (" + e.what() +
                       "); try a slightly different robustness.sigma_max or omega_max, or a larger refine\n";
            std::cerr << "warning: " << label << " scan inconclusive: " << e.what()
                      << "\n  hint: shift the window edges or raise robustness.refine\n";
        }
        m.timing(tag, t.seconds());
        verdicts[tag] = v;
    };
    run("robust_P", "P", [&] { return scan_P(data, config.window); });
    run("robust_Q", "Q", [&] { return scan_closed_loop(data, config.window); });

    if (sweep) {
        Stopwatch t;
        const MarginResult r = margin_search(config.plant, grid, tri, config.margin_lo, config.margin_hi,
                                             config.window, config.bisections, config.model);
        CsvWriter csv(m.path("sweep.csv"), {"delta_tau", "stable"});
        for (const auto& [d, ok] : r.probes) csv.row({d, ok ? 1.0 : 0.0});
        m.add("sweep.csv");
        m.timing("sweep", t.seconds());
        verdicts["margin"] = {{"value", r.margin},
                              {"model", config.model == CharacteristicModel::HSum ? "h_sum" : "closed_loop"},
                              {"range", {config.margin_lo, config.margin_hi}},
                              {"probes", r.probes.size()}};
        summary += "margin: delta_tau up to " + format_number(r.margin) + " in [" + format_number(config.margin_lo) +
                   ", " + format_number(config.margin_hi) + "]\n";
    }
    write_text(m.path("robust_summary.txt"), summary);
    m.add("robust_summary.txt");
    m.diagnostics()["robustness"] = verdicts;
    m.diagnostics()["robustness"]["window"] = window_json(config.window);
    std::cout << summary;
    return status;
}

} // namespace delaycomp

#include "delaycomp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

namespace delaycomp {
namespace {

using boost::property_tree::ptree;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigError, field + ": " + why);
}

std::string trim(std::string s) {
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s.erase(hash);
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) fail(field, "expected a number, got '" + t + "'");
    if (!std::isfinite(v)) fail(field, "must be finite");
    return v;
}

std::size_t to_count(const std::string& text, const std::string& field) {
    const double v = to_double(text, field);
    if (v < 0 || v != std::floor(v) || v > 1e9) fail(field, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"plant", {"eps1", "eps2", "c1", "c2", "q", "tau", "tau_bar", "delta_tau"}},
        {"grid", {"kernel_nodes", "sim_nodes", "dt"}},
        {"simulation", {"controller", "t_end", "initial", "u1_table", "u2_table", "snapshot_every"}},
        {"robustness",
         {"sigma_max", "omega_max", "n_sigma", "n_omega", "refine", "contour_threshold", "model", "margin_lo",
          "margin_hi", "bisections"}},
        {"output", {"dir"}},
    };
    return keys;
}

} // namespace

Profile parse_profile(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    if (t.find(':') == std::string::npos) return Profile::constant(to_double(t, field));
    std::vector<double> xs, vs;
    std::stringstream ss(t);
    std::string pair;
    while (std::getline(ss, pair, ',')) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) fail(field, "table entries must be x:value");
        xs.push_back(to_double(pair.substr(0, colon), field));
        vs.push_back(to_double(pair.substr(colon + 1), field));
    }
    try {
        return Profile::tabulated(std::move(xs), std::move(vs));
    } catch (const Error& e) {
        fail(field, e.what());
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) fail(section, "unknown section");
        for (const auto& [key, _] : body)
            if (!it->second.count(key)) fail(section + "." + key, "unknown key");
    }

    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(path)) return trim(*v);
        return std::nullopt;
    };
    auto number = [&](const std::string& path, double& out) {
        if (auto v = get(path)) out = to_double(*v, path);
    };
    auto count = [&](const std::string& path, std::size_t& out) {
        if (auto v = get(path)) out = to_count(*v, path);
    };
    auto profile = [&](const std::string& path, Profile& out) {
        if (auto v = get(path)) out = parse_profile(*v, path);
    };

    ExperimentConfig c;
    c.canonical = text;
    profile("plant.eps1", c.plant.eps1);
    profile("plant.eps2", c.plant.eps2);
    profile("plant.c1", c.plant.c1);
    profile("plant.c2", c.plant.c2);
    number("plant.q", c.plant.q);
    c.plant.tau = 3.0;
    number("plant.tau", c.plant.tau);
    c.plant.tau_bar = c.plant.tau;
    if (get("plant.tau_bar") && get("plant.delta_tau")) fail("plant.delta_tau", "give either tau_bar or delta_tau");
    number("plant.tau_bar", c.plant.tau_bar);
    if (auto v = get("plant.delta_tau")) c.plant.tau_bar = c.plant.tau + to_double(*v, "plant.delta_tau");

    count("grid.kernel_nodes", c.kernel_nodes);
    count("grid.sim_nodes", c.sim_nodes);
    number("grid.dt", c.dt);

    if (auto v = get("simulation.controller")) {
        try {
            c.controller = controller_kind_from_string(*v);
        } catch (const Error&) {
            fail("simulation.controller", "expected compensated, nominal or open_loop, got '" + *v + "'");
        }
    }
    number("simulation.t_end", c.t_end);
    count("simulation.snapshot_every", c.snapshot_every);
    const std::string initial = get("simulation.initial").value_or("sin2pi");
    if (initial == "sin2pi") {
        c.initial = InitialPreset::Sin2Pi;
        auto s = Profile::function([](double x) { return std::sin(2.0 * std::numbers::pi * x); }, "sin(2 pi x)");
        c.u1_initial = s;
        c.u2_initial = s;
    } else if (initial == "table") {
        c.initial = InitialPreset::Table;
        auto u1 = get("simulation.u1_table");
        auto u2 = get("simulation.u2_table");
        if (!u1) fail("simulation.u1_table", "required when initial = table");
        if (!u2) fail("simulation.u2_table", "required when initial = table");
        c.u1_initial = parse_profile(*u1, "simulation.u1_table");
        c.u2_initial = parse_profile(*u2, "simulation.u2_table");
    } else {
        fail("simulation.initial", "expected sin2pi or table, got '" + initial + "'");
    }

    number("robustness.sigma_max", c.window.sigma_max);
    number("robustness.omega_max", c.window.omega_max);
    count("robustness.n_sigma", c.window.n_sigma);
    count("robustness.n_omega", c.window.n_omega);
    count("robustness.refine", c.window.refine);
    number("robustness.contour_threshold", c.window.contour_threshold);
    if (auto v = get("robustness.model")) {
        if (*v == "closed_loop") c.model = CharacteristicModel::ClosedLoop;
        else if (*v == "h_sum") c.model = CharacteristicModel::HSum;
        else fail("robustness.model", "expected closed_loop or h_sum, got '" + *v + "'");
    }
    number("robustness.margin_lo", c.margin_lo);
    number("robustness.margin_hi", c.margin_hi);
    count("robustness.bisections", c.bisections);

    if (auto v = get("output.dir")) c.output_dir = *v;

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
    const Grid1D probe(std::max<std::size_t>(std::max(kernel_nodes, sim_nodes), 2));
    try {
        plant.validate(probe);
    } catch (const Error& e) {
        const std::string what = e.what();
        const auto colon = what.find(": ");
        throw Error(ErrorCode::ConfigError, "plant." + (colon == std::string::npos ? what : what.substr(colon + 2)));
    }
    if (kernel_nodes < 3) fail("grid.kernel_nodes", "needs at least 3 nodes");
    if (sim_nodes < 3) fail("grid.sim_nodes", "needs at least 3 nodes");
    if (!(dt > 0.0)) fail("grid.dt", "must be positive");
    const Grid1D sim(sim_nodes);
    double vmax = 0.0;
    for (std::size_t i = 0; i < sim.size(); ++i)
        vmax = std::max({vmax, plant.eps1(sim.x(i)), plant.eps2(sim.x(i))});
    if (dt * vmax > sim.h() * (1.0 + 1e-12))
        fail("grid.dt", "violates the CFL bound dt * max(eps) <= h (" + std::to_string(dt * vmax) + " > " +
                            std::to_string(sim.h()) + ")");
    if (plant.tau_bar / dt < 1.0) fail("plant.tau_bar", "shorter than one time step");
    if (plant.tau / dt < 1.0) fail("plant.tau", "shorter than one time step");
    if (!(t_end > 0.0)) fail("simulation.t_end", "must be positive");
    if (!(window.sigma_max > 0.0)) fail("robustness.sigma_max", "must be positive");
    if (!(window.omega_max > 0.0)) fail("robustness.omega_max", "must be positive");
    if (window.n_sigma < 2) fail("robustness.n_sigma", "needs at least 2 samples");
    if (window.n_omega < 2) fail("robustness.n_omega", "needs at least 2 samples");
    if (window.refine < 1) fail("robustness.refine", "must be at least 1");
    if (!(window.contour_threshold > 0.0)) fail("robustness.contour_threshold", "must be positive");
    if (margin_lo < 0.0 || margin_hi < margin_lo) fail("robustness.margin_hi", "need 0 <= margin_lo <= margin_hi");
    if (plant.tau + margin_lo <= 0.0) fail("robustness.margin_lo", "tau + margin_lo must be positive");
}

void ExperimentConfig::override_grid(std::size_t n) {
    if (n < 3) fail("--grid", "needs at least 3 nodes");
    kernel_nodes = sim_nodes = n;
    const Grid1D g(n);
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) vmax = std::max({vmax, plant.eps1(g.x(i)), plant.eps2(g.x(i))});
    if (dt * vmax > g.h()) dt = g.h() / vmax;
    canonical += "\n# --grid " + std::to_string(n) + "\n";
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::ConfigError, "SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 15];
    }
    return out;
}

} // namespace delaycomp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "delaycomp/config.hpp"
#include "delaycomp/csv.hpp"
#include "delaycomp/pipeline.hpp"
#include "delaycomp/svg.hpp"

using namespace delaycomp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("delaycomp_test_" + name);
    fs::remove_all(p);
    return p;
}

const char* kSmall = R"(
[plant]
eps1 = 1
eps2 = 1
c1 = 1
c2 = 0:1, 1:0.5
q = 1
tau = 1
[grid]
kernel_nodes = 21
sim_nodes = 21
dt = 0.05
[simulation]
controller = compensated
t_end = 1
)";

} // namespace

TEST_CASE("numbers round-trip through their shortest text") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e-5}) {
        const std::string s = format_number(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(NAN) == "nan");
}

TEST_CASE("CSV write and read back") {
    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    {
        CsvWriter w(dir / "a.csv", {"x", "y"});
        w.row({1.0, 0.25});
        w.row({2.0, -1e-7});
        CHECK_THROWS_AS(w.row({1.0}), Error);
    }
    CHECK(slurp(dir / "a.csv") == "x,y\n1,0.25\n2,-1e-07\n");
    const CsvTable t = read_csv(dir / "a.csv");
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    CHECK(t.rows[1][1] == -1e-7);
}

TEST_CASE("SHA-256 test vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing and field-named validation") {
    const ExperimentConfig c = parse_config(kSmall);
    CHECK(c.kernel_nodes == 21);
    CHECK(c.plant.c2(0.5) == doctest::Approx(0.75));
    CHECK(c.plant.tau_bar == 1.0);
    CHECK(c.controller == ControllerKind::Compensated);
    CHECK(c.initial_u1(Grid1D(5))[1] == doctest::Approx(1.0));

    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigError);
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[plant]\neps1 = -1\n").find("plant.eps1") != std::string::npos);
    CHECK(message("[plant]\ntau = abc\n").find("plant.tau") != std::string::npos);
    CHECK(message("[plant]\nspeed = 1\n").find("plant.speed") != std::string::npos);
    CHECK(message("[grid]\ndt = 0.5\n").find("grid.dt") != std::string::npos);
    CHECK(message("[simulation]\ncontroller = pid\n").find("simulation.controller") != std::string::npos);
    CHECK(message("[simulation]\ninitial = table\n").find("simulation.u1_table") != std::string::npos);
    CHECK(message("[plant]\ntau_bar = 3\ndelta_tau = 0.1\n").find("plant.delta_tau") != std::string::npos);

    ExperimentConfig d = parse_config("[plant]\neps1 = 0.5\ndelta_tau = 0.2\n");
    CHECK(d.plant.tau_bar == doctest::Approx(3.2));
    d.override_grid(201);
    CHECK(d.sim_nodes == 201);
    CHECK(d.dt == doctest::Approx(0.005));
    CHECK(sha256_hex(d.canonical) != sha256_hex("[plant]\neps1 = 0.5\ndelta_tau = 0.2\n"));
}

TEST_CASE("SVG output is a closed document") {
    LineChart c{"t<1>", "x", "y", true, {{"a", {0, 1, 2}, {1, 10, 100}}}};
    const std::string s = render_line_chart(c);
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("t&lt;1&gt;") != std::string::npos);
    Heatmap h{"m", "x", "y", {0, 1}, {0, 1, 2}, {1, 2, 3, 4, 5, 6}, false};
    const std::string m = render_heatmap(h);
    CHECK(m.find("<rect") != std::string::npos);
    CHECK(m.find("</svg>") != std::string::npos);
}

TEST_CASE("kernels and simulate commands: deterministic files and a complete manifest") {
    const ExperimentConfig c = parse_config(kSmall);
    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = scratch("run" + std::to_string(run));
        RunManifest m(dir, c, "kernels");
        CHECK(cmd_kernels(c, m) == ExitOk);
        CHECK(cmd_simulate(c, m) == ExitOk);
        m.write();
        for (const auto& f : m.files()) {
            CHECK(fs::exists(dir / f));
            if (f.ends_with(".csv")) {
                if (run == 0) first[f] = slurp(dir / f);
                else CHECK(first[f] == slurp(dir / f));
            }
        }
        const std::string manifest = slurp(dir / "manifest.json");
        CHECK(manifest.find("config_sha256") != std::string::npos);
        CHECK(manifest.find("alpha1.csv") != std::string::npos);
        CHECK(manifest.find("trajectory.csv") != std::string::npos);
    }
    CHECK(first.count("K21.csv"));
    CHECK(first.count("summary.csv"));
}

TEST_CASE("uncoupled config writes all-zero kernel files") {
    ExperimentConfig c = parse_config(kSmall);
    c.plant.c1 = c.plant.c2 = Profile::constant(0.0);
    const fs::path dir = scratch("zero");
    RunManifest m(dir, c, "kernels");
    cmd_kernels(c, m);
    for (const char* f : {"K11.csv", "K22.csv", "L12.csv", "alpha1.csv", "alpha2.csv", "beta1.csv", "beta2.csv"}) {
        const CsvTable t = read_csv(dir / f);
        for (const auto& r : t.rows) CHECK(r[2] == 0.0);
    }
    for (const auto& r : read_csv(dir / "traces.csv").rows)
        for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[k] == 0.0);
}

TEST_CASE("manifest refuses to list a missing file") {
    const ExperimentConfig c = parse_config(kSmall);
    RunManifest m(scratch("missing"), c, "kernels");
    m.add("nope.csv");
    CHECK_THROWS_AS(m.write(), Error);
}

TEST_CASE("baseline traces match the golden snapshot") {
    ExperimentConfig c = parse_config(R"(
[plant]
eps1 = 1
eps2 = 1
c1 = 1
c2 = 1
q = 1
tau = 3
)");
    c.override_grid(51);
    const fs::path dir = scratch("golden");
    RunManifest m(dir, c, "kernels");
    cmd_kernels(c, m);
    const CsvTable got = read_csv(dir / "traces.csv");
    const CsvTable want = read_csv(fs::path(DELAYCOMP_GOLDEN_DIR) / "baseline_traces_n51.csv");
    REQUIRE(got.header == want.header);
    REQUIRE(got.rows.size() == want.rows.size());
    double worst = 0.0;
    for (std::size_t r = 0; r < got.rows.size(); ++r)
        for (std::size_t k = 0; k < got.rows[r].size(); ++k)
            worst = std::max(worst, std::abs(got.rows[r][k] - want.rows[r][k]) / (1.0 + std::abs(want.rows[r][k])));
    CHECK(worst <= 1e-9);
    // Sign pattern: p starts at -tau and stays negative.
    for (const auto& r : got.rows) CHECK(r[3] < 0.0);
}

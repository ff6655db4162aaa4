#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <sys/wait.h>

#include "qfluor/compare.hpp"
#include "qfluor/config.hpp"
#include "qfluor/csv.hpp"
#include "qfluor/plots.hpp"
#include "qfluor/runner.hpp"

using namespace qfluor;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "model": {"rabi": 0.5, "omega_x": 1.0, "alpha": 0.05, "n_modes": 8, "t_final": 1.0, "dt": 0.01,
            "multiplicity": 2, "initial": "ground"},
  "tlme": {"dt_corr": 0.1},
  "heom": {"t_fit": 10.0, "n_real": 1, "n_imag": 1, "depth": 1, "depth_check": false,
           "fit_threshold": 1.0, "fit_starts": 1, "fit_samples": 301},
  "output": {"sample_dt": 0.1}
})";

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("qfluor_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(QFLUOR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

} // namespace

TEST_CASE("config: defaults, round trip through the echo, strict keys")
{
    const RunConfig def = parse_config("{}");
    CHECK(def == RunConfig{});
    const RunConfig c = parse_config(kSmall);
    CHECK(c.model.n_modes == 8);
    CHECK(c.sample_stride() == 10);
    CHECK(parse_config(config_echo(c)) == c);
    CHECK(config_echo(parse_config(config_echo(c))) == config_echo(c));

    RunConfig b = c;
    b.model.initial.kind = InitialQubit::bloch;
    b.model.initial.theta = 0.3;
    b.model.initial.phi = 1.2;
    b.davydov.solver = EomSolver::truncated;
    CHECK(parse_config(config_echo(b)) == b);

    CHECK_THROWS_AS(parse_config(R"({"model": {"omega": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"plot": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"n_modes": "ten"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"alpha": -0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"dt": 0.03}, "output": {"sample_dt": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/qfluor.json"), ConfigError);

    RunConfig d = c;
    apply_desk_scale(d);
    CHECK(d.model.n_modes == 60);
    CHECK(d.model.multiplicity == 4);
}

TEST_CASE("csv: values survive the round trip bit for bit")
{
    for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::denorm_min()})
    {
        const std::string txt = format_number(v);
        double back = 1.0;
        std::from_chars(txt.data(), txt.data() + txt.size(), back);
        CHECK(back == v);
        CHECK(std::signbit(back) == std::signbit(v));
    }
    const fs::path dir = scratch("csv");
    Table t;
    t.kind = "spectrum";
    t.method = "tlme";
    t.run_id = "0123456789abcdef";
    t.config = config_echo(RunConfig{});
    t.columns = {"t", "0.0166666666666666664", "1.5"};
    t.rows = {{0.0, 1e-17, 2.0 / 7.0}, {0.1, -3.25, 1e300}};
    write_table((dir / "x.csv").string(), t);
    const Table r = read_table((dir / "x.csv").string());
    CHECK(r.kind == t.kind);
    CHECK(r.method == t.method);
    CHECK(r.run_id == t.run_id);
    CHECK(r.config == t.config);
    CHECK(r.columns == t.columns);
    CHECK(r.rows == t.rows);
    CHECK(r.column("1.5") == 2);
    CHECK(r.column("nope") == -1);
    std::ofstream(dir / "bad.csv") << "# format=qfluor-dynamics version=99 method=a run=b\n";
    CHECK_THROWS(read_table((dir / "bad.csv").string()));
}

TEST_CASE("asymmetry of mirrored spectra")
{
    std::vector<double> w, n;
    for (int k = 0; k <= 40; ++k) {
        w.push_back(0.05 * k);
        n.push_back(std::exp(-std::pow(w.back() - 1.0, 2) / 0.02));
    }
    CHECK(asymmetry(w, n, 1.0) < 1e-12);
    // centre between two modes: mirrors land on grid points
    std::vector<double> n2;
    for (double x : w) n2.push_back(std::exp(-std::pow(x - 1.025, 2) / 0.02));
    CHECK(asymmetry(w, n2, 1.025) < 1e-12);
    std::vector<double> skew = n;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (w[k] > 1.0) skew[k] *= 2.0;
    CHECK(asymmetry(w, skew, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK_THROWS(asymmetry({1.0}, {1.0}, 1.0));
}

TEST_CASE("run: outputs, determinism, compare and plots")
{
    const RunConfig cfg = parse_config(kSmall);
    const fs::path a = scratch("run_a"), b = scratch("run_b");
    const auto methods = parse_methods("davydov,tlme,rwa_tlme,heom");
    const auto ma = run(cfg, "small.json", methods, a.string(), 11);
    const auto mb = run(cfg, "small.json", methods, b.string(), 11);
    REQUIRE(ma.ok());
    CHECK(ma.exit_code() == 0);
    CHECK(ma.seed == 11);
    for (const auto& m : methods) {
        CHECK(slurp(a / m / "dynamics.csv") == slurp(b / m / "dynamics.csv"));
        CHECK(fs::exists(a / m / "meta.txt"));
        CHECK(fs::exists(a / m / "spectrum.csv") == (m != "heom"));
    }
    CHECK(slurp(a / "davydov" / "spectrum.csv") == slurp(b / "davydov" / "spectrum.csv"));

    const Table dyn = read_table((a / "davydov" / "dynamics.csv").string());
    CHECK(dyn.columns == std::vector<std::string>{"t", "P_z", "norm", "sigma2"});
    CHECK(dyn.rows.size() == 11);
    CHECK(dyn.run_id == run_id("davydov", parse_config(dyn.config)));
    CHECK(parse_config(dyn.config).davydov.seed == 11);
    const Table spec = read_table((a / "tlme" / "spectrum.csv").string());
    CHECK(spec.columns.size() == 9);
    CHECK(read_table((a / "heom" / "dynamics.csv").string()).columns == std::vector<std::string>{"t", "P_z"});

    const auto back = read_manifest(a.string());
    CHECK(back.methods == methods);
    CHECK(back.status.size() == methods.size());
    for (const auto& s : back.status) CHECK(s.status == "ok");

    for (const auto& r : compare_paths(a.string(), b.string())) {
        CHECK(r.pz_linf == 0.0);
        CHECK(r.pz_l2 == 0.0);
        if (r.spectrum) CHECK(r.spectrum->aggregate == 0.0);
    }
    const auto dt = compare_paths((a / "davydov").string(), (a / "tlme").string());
    REQUIRE(dt.size() == 1);
    CHECK(dt[0].common_times == 11);
    CHECK(dt[0].pz_linf < 1e-2);
    CHECK(dt[0].asymmetry_a.has_value());
    CHECK(dt[0].omega_ref == 1.0);
    CHECK_THROWS_AS(compare_paths((a / "davydov").string(), b.string()), ConfigError);

    const auto scripts = emit_plots(a.string());
    CHECK(scripts.size() == 4); // pz_overlay, spectrum_overlay, deviation, spectrum
    for (const auto& s : scripts) CHECK(fs::exists(s));
    const fs::path single = scratch("run_single");
    run(cfg, "small.json", {"davydov"}, single.string());
    CHECK(emit_plots(single.string()).size() == 3);
}

TEST_CASE("method lists")
{
    CHECK(parse_methods("tlme") == std::vector<std::string>{"tlme"});
    CHECK_THROWS_AS(parse_methods("tlme,tlme"), ConfigError);
    CHECK_THROWS_AS(parse_methods("magic"), ConfigError);
    CHECK_THROWS_AS(parse_methods(""), ConfigError);
}

TEST_CASE("command line exit codes")
{
    const fs::path dir = scratch("cli");
    std::ofstream(dir / "ok.json") << kSmall;
    std::ofstream(dir / "bad.json") << R"({"model": {"bogus": 1}})";
    CHECK(cli("run --config " + (dir / "ok.json").string() + " --methods rwa_tlme --out " + (dir / "o").string()) == 0);
    CHECK(fs::exists(dir / "o" / "manifest.json"));
    CHECK(cli("run --config " + (dir / "bad.json").string() + " --out " + (dir / "p").string()) == 2);
    CHECK(cli("run --config " + (dir / "ok.json").string() + " --methods nope --out " + (dir / "q").string()) == 2);
    CHECK(cli("run --out x") == 1);
    CHECK(cli("compare --a " + (dir / "o").string() + " --b " + (dir / "o").string() + " --report " +
              (dir / "rep.txt").string()) == 0);
    CHECK(slurp(dir / "rep.txt").find("pz_linf = 0") != std::string::npos);
    CHECK(cli("emit-plots --run " + (dir / "o").string()) == 0);
    CHECK(cli("emit-plots --run " + (dir / "missing").string()) == 2);
}

#include "qfluor/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "qfluor/csv.hpp"
#include "qfluor/parallel.hpp"

namespace qfluor {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Meta {
public:
    template <class T>
    Meta& put(const std::string& key, const T& v)
    {
        os_ << key << " = " << v << '\n';
        return *this;
    }
    Meta& num(const std::string& key, double v) { return put(key, format_number(v)); }
    Meta& raw(const std::string& text)
    {
        os_ << text;
        return *this;
    }
    void write(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + path + "'");
        out << os_.str();
    }

private:
    std::ostringstream os_;
};

Table make_table(const char* kind, const std::string& method, const RunConfig& cfg)
{
    Table t;
    t.kind = kind;
    t.method = method;
    t.run_id = run_id(method, cfg);
    t.config = config_echo(cfg);
    return t;
}

std::vector<std::string> spectrum_columns(const DiscretizedBath& bath)
{
    std::vector<std::string> c{"t"};
    for (double w : bath.omegas) c.push_back(format_number(w));
    return c;
}

void common_meta(Meta& m, const std::string& method, const RunConfig& cfg)
{
    m.put("method", method).put("run", run_id(method, cfg));
    m.num("dt", cfg.model.dt).num("sample_dt", cfg.sample_dt).put("n_modes", cfg.model.n_modes);
}

void run_davydov(const RunConfig& cfg, const DiscretizedBath& bath, const fs::path& dir)
{
    const DavydovState s0 = init_state(cfg.model, bath, cfg.davydov);
    const DavydovTrajectory tr =
        evolve(s0, cfg.model, bath, uniform_samples(cfg.model, cfg.sample_stride()), cfg.davydov);

    Table dyn = make_table("dynamics", "davydov", cfg);
    dyn.columns = {"t", "P_z", "norm", "sigma2"};
    Table spec = make_table("spectrum", "davydov", cfg);
    spec.columns = spectrum_columns(bath);
    for (const auto& s : tr.samples) {
        dyn.rows.push_back({s.t, s.pz, s.norm, s.sigma2});
        std::vector<double> row{s.t};
        row.insert(row.end(), s.photons.data(), s.photons.data() + s.photons.size());
        spec.rows.push_back(std::move(row));
    }
    write_table((dir / "dynamics.csv").string(), dyn);
    write_table((dir / "spectrum.csv").string(), spec);

    Meta m;
    common_meta(m, "davydov", cfg);
    m.put("multiplicity", cfg.model.multiplicity).put("seed", tr.seed).num("noise", cfg.davydov.noise);
    m.put("solver", cfg.davydov.solver == EomSolver::tikhonov ? "tikhonov" : "truncated");
    m.num("svd_cutoff", cfg.davydov.svd_cutoff);
    m.num("max_norm_error", tr.max_norm_error).num("min_photon", tr.min_photon).num("max_imag", tr.max_imag);
    m.num("halved_step_delta", tr.halved_step_delta);
    for (const auto& w : tr.warnings) m.put("warning", w);
    m.write((dir / "meta.txt").string());
}

void run_master(const RunConfig& cfg, Coupling coupling, const DiscretizedBath& bath, const fs::path& dir)
{
    const std::string method = coupling_name(coupling);
    const TlmeResult res = run_tlme(cfg.model, coupling, bath, cfg.tlme);
    const long rho_stride = cfg.sample_stride();
    const long grid_stride = std::lround(cfg.sample_dt / cfg.tlme.dt_corr);

    Table dyn = make_table("dynamics", method, cfg);
    dyn.columns = {"t", "P_z"};
    for (std::size_t i = 0; i < res.rho.lab.size(); i += rho_stride) dyn.rows.push_back({res.rho.time(i), res.rho.pz(i)});
    Table spec = make_table("spectrum", method, cfg);
    spec.columns = spectrum_columns(bath);
    for (std::size_t q = 0; q < res.spectrum.times.size(); q += grid_stride) {
        std::vector<double> row{res.spectrum.times[q]};
        for (Eigen::Index k = 0; k < res.spectrum.values.cols(); ++k) row.push_back(res.spectrum.values(q, k));
        spec.rows.push_back(std::move(row));
    }
    write_table((dir / "dynamics.csv").string(), dyn);
    write_table((dir / "spectrum.csv").string(), spec);

    Meta m;
    common_meta(m, method, cfg);
    m.num("dt_corr", cfg.tlme.dt_corr).put("n_max", cfg.tlme.n_max).put("inhomogeneous", cfg.tlme.inhomogeneous);
    m.num("max_trace_error", res.rho.max_trace_error).num("max_hermiticity_error", res.rho.max_hermiticity_error);
    m.num("min_eigenvalue", res.rho.min_eigenvalue);
    m.num("spectrum_max_imag", res.spectrum.max_imag).num("spectrum_min_value", res.spectrum.min_value);
    for (const auto& w : res.rho.warnings) m.put("warning", w);
    if (res.spectrum.min_value < -1e-6) m.put("warning", "negative photon numbers (perturbative validity)");
    m.write((dir / "meta.txt").string());
}

void run_heom_method(const RunConfig& cfg, const fs::path& dir)
{
    const HeomTrajectory tr = run_heom(cfg.model, cfg.heom, cfg.sample_stride());
    Table dyn = make_table("dynamics", "heom", cfg);
    dyn.columns = {"t", "P_z"};
    for (std::size_t i = 0; i < tr.t.size(); ++i) dyn.rows.push_back({tr.t[i], tr.pz[i]});
    write_table((dir / "dynamics.csv").string(), dyn);

    Meta m;
    common_meta(m, "heom", cfg);
    m.put("depth", tr.depth).put("nodes", tr.nodes).num("depth_delta", tr.depth_delta);
    m.num("max_trace_error", tr.max_trace_error).num("max_hermiticity_error", tr.max_hermiticity_error);
    m.raw(tr.fit.describe());
    m.write((dir / "meta.txt").string());
}

} // namespace

std::vector<std::string> parse_methods(const std::string& list)
{
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        name.erase(0, name.find_first_not_of(" \t"));
        name.erase(name.find_last_not_of(" \t") + 1);
        if (name.empty()) continue;
        const auto& known = known_methods();
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError("unknown method '" + name + "' (expected davydov, tlme, rwa_tlme, heom)");
        if (std::find(out.begin(), out.end(), name) != out.end()) throw ConfigError("method '" + name + "' listed twice");
        out.push_back(name);
    }
    if (out.empty()) throw ConfigError("no methods requested");
    return out;
}

bool RunManifest::ok() const
{
    return std::all_of(status.begin(), status.end(), [](const MethodStatus& s) { return s.status == "ok"; });
}

int RunManifest::exit_code() const
{
    for (const auto& s : status)
        if (s.exit_code != 0) return s.exit_code;
    return 0;
}

std::string run_id(const std::string& method, const RunConfig& cfg)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(method + '\n' + config_echo(cfg));
    return os.str();
}

RunManifest run(RunConfig cfg, const std::string& config_path, const std::vector<std::string>& methods,
                const std::string& out_dir, std::optional<std::uint64_t> seed)
{
    if (seed) {
        cfg.davydov.seed = *seed;
        cfg.heom.fit.seed = *seed;
    }
    cfg.validate();
    RunManifest man;
    man.config_path = config_path;
    man.methods = methods;
    man.out_dir = out_dir;
    man.seed = cfg.davydov.seed;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw ConfigError("cannot create output directory '" + out_dir + "'");
    for (const auto& m : methods) {
        fs::create_directories(fs::path(out_dir) / m, ec);
        if (ec) throw ConfigError("cannot create '" + (fs::path(out_dir) / m).string() + "'");
        man.status.push_back({m, run_id(m, cfg), "pending", 0, ""});
    }

    const DiscretizedBath bath = discretize_bath(cfg.model);
    {
        std::ofstream out(fs::path(out_dir) / "bath.csv", std::ios::binary);
        if (!out) throw ConfigError("output directory '" + out_dir + "' is not writable");
        bath.write_csv(out);
    }

    // methods are independent; each writes only into its own directory
    parallel_for(static_cast<long>(methods.size()), [&](long i) {
        MethodStatus& st = man.status[static_cast<std::size_t>(i)];
        const fs::path dir = fs::path(out_dir) / st.method;
        try {
            if (st.method == "davydov") run_davydov(cfg, bath, dir);
            else if (st.method == "tlme") run_master(cfg, Coupling::full, bath, dir);
            else if (st.method == "rwa_tlme") run_master(cfg, Coupling::rwa, bath, dir);
            else run_heom_method(cfg, dir);
            st.status = "ok";
        } catch (const ConfigError& e) {
            st.status = "failed";
            st.exit_code = 2;
            st.message = e.what();
        } catch (const std::exception& e) {
            st.status = "failed";
            st.exit_code = 3;
            st.message = e.what();
        }
    }, static_cast<int>(methods.size()));

    write_manifest(man);
    return man;
}

void write_manifest(const RunManifest& m)
{
    nlohmann::ordered_json j;
    j["config"] = m.config_path;
    j["methods"] = m.methods;
    j["out"] = m.out_dir;
    j["seed"] = m.seed;
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& s : m.status)
        runs.push_back({{"method", s.method}, {"run", s.run_id}, {"status", s.status}, {"exit_code", s.exit_code},
                        {"message", s.message}});
    j["runs"] = runs;
    std::ofstream out(fs::path(m.out_dir) / "manifest.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest in '" + m.out_dir + "'");
    out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& out_dir)
{
    std::ifstream in(fs::path(out_dir) / "manifest.json");
    if (!in) throw ConfigError("no manifest.json in '" + out_dir + "'");
    nlohmann::json j;
    try {
        in >> j;
        RunManifest m;
        m.config_path = j.at("config").get<std::string>();
        m.methods = j.at("methods").get<std::vector<std::string>>();
        m.out_dir = out_dir;
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& r : j.at("runs"))
            m.status.push_back({r.at("method").get<std::string>(), r.at("run").get<std::string>(),
                                r.at("status").get<std::string>(), r.at("exit_code").get<int>(),
                                r.at("message").get<std::string>()});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest in '" + out_dir + "': " + e.what());
    }
}

} // namespace qfluor

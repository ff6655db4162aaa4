#include "qfluor/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qfluor {

namespace {

using nlohmann::json;

// Reads keys of one section, remembering which were consumed so leftovers can be rejected.
class Section {
public:
    Section(const json& root, const char* name) : name_(name)
    {
        if (!root.contains(name)) return;
        node_ = &root.at(name);
        if (!node_->is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
    }

    void number(const char* key, double& out) { read(key, out, [](const json& v) { return v.is_number(); }, "a number"); }
    void integer(const char* key, int& out)
    {
        read(key, out, [](const json& v) { return v.is_number_integer(); }, "an integer");
    }
    void seed(const char* key, std::uint64_t& out)
    {
        read(key, out, [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); },
             "a non-negative integer");
    }
    void flag(const char* key, bool& out) { read(key, out, [](const json& v) { return v.is_boolean(); }, "a boolean"); }
    const json* raw(const char* key)
    {
        if (!node_ || !node_->contains(key)) return nullptr;
        seen_.insert(key);
        return &node_->at(key);
    }

    void finish() const
    {
        if (!node_) return;
        for (auto it = node_->begin(); it != node_->end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
    }

private:
    template <class T, class Check>
    void read(const char* key, T& out, Check ok, const char* what)
    {
        const json* v = raw(key);
        if (!v) return;
        if (!ok(*v)) throw ConfigError("'" + name_ + "." + key + "' must be " + what);
        out = v->get<T>();
    }

    std::string name_;
    const json* node_{nullptr};
    std::set<std::string> seen_;
};

InitialState parse_initial(const json& v)
{
    InitialState s;
    if (v.is_string()) {
        const auto tag = v.get<std::string>();
        if (tag == "ground") s.kind = InitialQubit::ground;
        else if (tag == "excited") s.kind = InitialQubit::excited;
        else throw ConfigError("model.initial: unknown state '" + tag + "'");
        return s;
    }
    if (v.is_object() && v.size() == 1 && v.contains("bloch") && v.at("bloch").is_object()) {
        const json& b = v.at("bloch");
        s.kind = InitialQubit::bloch;
        for (auto it = b.begin(); it != b.end(); ++it) {
            if (!it.value().is_number()) throw ConfigError("model.initial.bloch." + it.key() + " must be a number");
            if (it.key() == "theta") s.theta = it.value().get<double>();
            else if (it.key() == "phi") s.phi = it.value().get<double>();
            else throw ConfigError("unknown key 'model.initial.bloch." + it.key() + "'");
        }
        return s;
    }
    throw ConfigError("model.initial must be \"ground\", \"excited\" or {\"bloch\": {\"theta\": .., \"phi\": ..}}");
}

json initial_json(const InitialState& s)
{
    switch (s.kind) {
    case InitialQubit::ground: return "ground";
    case InitialQubit::excited: return "excited";
    case InitialQubit::bloch: return json{{"bloch", {{"theta", s.theta}, {"phi", s.phi}}}};
    }
    return nullptr;
}

EomSolver parse_solver(const json& v)
{
    if (v.is_string()) {
        if (v == "tikhonov") return EomSolver::tikhonov;
        if (v == "truncated") return EomSolver::truncated;
    }
    throw ConfigError("davydov.solver must be \"tikhonov\" or \"truncated\"");
}

bool is_multiple(double a, double b)
{
    const double r = a / b;
    return r >= 1.0 - 1e-9 && std::abs(r - std::round(r)) < 1e-9;
}

} // namespace

int RunConfig::sample_stride() const
{
    if (!(sample_dt > 0.0) || !is_multiple(sample_dt, model.dt))
        throw ConfigError("output.sample_dt must be a positive multiple of model.dt");
    return static_cast<int>(std::lround(sample_dt / model.dt));
}

void RunConfig::validate() const
{
    model.validate();
    sample_stride();
    if (!(davydov.svd_cutoff > 0.0 && davydov.svd_cutoff < 1.0)) throw ConfigError("davydov.svd_cutoff must lie in (0, 1)");
    if (!(davydov.noise >= 0.0)) throw ConfigError("davydov.noise must be >= 0");
    if (!(davydov.norm_tolerance > 0.0)) throw ConfigError("davydov.norm_tolerance must be > 0");
    if (!(tlme.dt_corr > 0.0) || !is_multiple(tlme.dt_corr, model.dt))
        throw ConfigError("tlme.dt_corr must be a positive multiple of model.dt");
    if (!is_multiple(sample_dt, tlme.dt_corr))
        throw ConfigError("output.sample_dt must be a multiple of tlme.dt_corr");
    if (model.t_final > 0.0 && !is_multiple(model.t_final, sample_dt))
        throw ConfigError("model.t_final must be a multiple of output.sample_dt");
    if (tlme.n_max < 1) throw ConfigError("tlme.n_max must be >= 1");
    if (!(heom.t_fit > 0.0)) throw ConfigError("heom.t_fit must be > 0");
    if (heom.n_real < 1 || heom.n_imag < 1) throw ConfigError("heom.n_real and heom.n_imag must be >= 1");
    if (heom.depth < 0) throw ConfigError("heom.depth must be >= 0");
    if (heom.fit.samples < 4 * std::max(heom.n_real, heom.n_imag)) throw ConfigError("heom.fit_samples too small");
    if (heom.fit.starts < 0) throw ConfigError("heom.fit_starts must be >= 0");
    if (!(heom.fit.threshold > 0.0)) throw ConfigError("heom.fit_threshold must be > 0");
    if (!(heom.divergence_limit > 0.0)) throw ConfigError("heom.divergence_limit must be > 0");
}

RunConfig parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    static const std::set<std::string> sections{"model", "davydov", "tlme", "heom", "output"};
    for (auto it = root.begin(); it != root.end(); ++it)
        if (!sections.count(it.key())) throw ConfigError("unknown section '" + it.key() + "'");

    RunConfig c;
    Section m(root, "model");
    m.number("omega0", c.model.omega0);
    m.number("rabi", c.model.rabi);
    m.number("omega_x", c.model.omega_x);
    m.number("alpha", c.model.alpha);
    m.number("omega_c", c.model.omega_c);
    m.integer("n_modes", c.model.n_modes);
    if (const json* v = m.raw("initial")) c.model.initial = parse_initial(*v);
    m.number("t_final", c.model.t_final);
    m.number("dt", c.model.dt);
    m.integer("multiplicity", c.model.multiplicity);
    m.finish();

    Section d(root, "davydov");
    d.number("svd_cutoff", c.davydov.svd_cutoff);
    if (const json* v = d.raw("solver")) c.davydov.solver = parse_solver(*v);
    d.number("noise", c.davydov.noise);
    d.seed("seed", c.davydov.seed);
    d.number("norm_tolerance", c.davydov.norm_tolerance);
    d.flag("deviation", c.davydov.compute_deviation);
    d.flag("halved_step_check", c.davydov.halved_step_check);
    d.finish();

    Section t(root, "tlme");
    t.number("dt_corr", c.tlme.dt_corr);
    t.integer("n_max", c.tlme.n_max);
    t.flag("inhomogeneous", c.tlme.inhomogeneous);
    t.finish();

    Section h(root, "heom");
    h.number("t_fit", c.heom.t_fit);
    h.integer("n_real", c.heom.n_real);
    h.integer("n_imag", c.heom.n_imag);
    h.integer("depth", c.heom.depth);
    h.flag("depth_check", c.heom.depth_check);
    h.number("divergence_limit", c.heom.divergence_limit);
    h.number("fit_threshold", c.heom.fit.threshold);
    h.integer("fit_starts", c.heom.fit.starts);
    h.integer("fit_samples", c.heom.fit.samples);
    h.seed("fit_seed", c.heom.fit.seed);
    h.finish();

    Section o(root, "output");
    o.number("sample_dt", c.sample_dt);
    o.finish();

    c.validate();
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_echo(const RunConfig& c)
{
    // nlohmann's ordered_json keeps insertion order; doubles are printed round-trip exact
    nlohmann::ordered_json j;
    j["model"] = {{"omega0", c.model.omega0},
                  {"rabi", c.model.rabi},
                  {"omega_x", c.model.omega_x},
                  {"alpha", c.model.alpha},
                  {"omega_c", c.model.omega_c},
                  {"n_modes", c.model.n_modes},
                  {"initial", initial_json(c.model.initial)},
                  {"t_final", c.model.t_final},
                  {"dt", c.model.dt},
                  {"multiplicity", c.model.multiplicity}};
    j["davydov"] = {{"svd_cutoff", c.davydov.svd_cutoff},
                    {"solver", c.davydov.solver == EomSolver::tikhonov ? "tikhonov" : "truncated"},
                    {"noise", c.davydov.noise},
                    {"seed", c.davydov.seed},
                    {"norm_tolerance", c.davydov.norm_tolerance},
                    {"deviation", c.davydov.compute_deviation},
                    {"halved_step_check", c.davydov.halved_step_check}};
    j["tlme"] = {{"dt_corr", c.tlme.dt_corr}, {"n_max", c.tlme.n_max}, {"inhomogeneous", c.tlme.inhomogeneous}};
    j["heom"] = {{"t_fit", c.heom.t_fit},
                 {"n_real", c.heom.n_real},
                 {"n_imag", c.heom.n_imag},
                 {"depth", c.heom.depth},
                 {"depth_check", c.heom.depth_check},
                 {"divergence_limit", c.heom.divergence_limit},
                 {"fit_threshold", c.heom.fit.threshold},
                 {"fit_starts", c.heom.fit.starts},
                 {"fit_samples", c.heom.fit.samples},
                 {"fit_seed", c.heom.fit.seed}};
    j["output"] = {{"sample_dt", c.sample_dt}};
    return j.dump();
}

void apply_desk_scale(RunConfig& cfg)
{
    cfg.model.n_modes = 60;
    cfg.model.multiplicity = 4;
}

} // namespace qfluor

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qfluor/compare.hpp"
#include "qfluor/config.hpp"
#include "qfluor/davydov.hpp"
#include "qfluor/heom.hpp"
#include "qfluor/master_eq.hpp"

namespace py = pybind11;
using namespace qfluor;

namespace {

std::string initial_name(const InitialState& s)
{
    switch (s.kind) {
    case InitialQubit::ground: return "ground";
    case InitialQubit::excited: return "excited";
    default: return "bloch";
    }
}

// "ground", "excited" or a (theta, phi) pair
void set_initial(ModelConfig& c, const py::object& v)
{
    if (py::isinstance<py::str>(v)) {
        const auto s = v.cast<std::string>();
        if (s == "ground") c.initial = {InitialQubit::ground, 0.0, 0.0};
        else if (s == "excited") c.initial = {InitialQubit::excited, 0.0, 0.0};
        else throw ConfigError("initial must be 'ground', 'excited' or (theta, phi)");
        return;
    }
    const auto tp = v.cast<std::pair<double, double>>();
    c.initial = {InitialQubit::bloch, tp.first, tp.second};
}

py::dict davydov_py(const RunConfig& cfg)
{
    cfg.validate();
    const auto bath = discretize_bath(cfg.model);
    DavydovTrajectory tr;
    {
        py::gil_scoped_release nogil;
        tr = evolve(init_state(cfg.model, bath, cfg.davydov), cfg.model, bath,
                    uniform_samples(cfg.model, cfg.sample_stride()), cfg.davydov);
    }
    const auto n = static_cast<Eigen::Index>(tr.samples.size());
    Eigen::VectorXd t(n), pz(n), norm(n), s2(n);
    Eigen::MatrixXd ph(n, static_cast<Eigen::Index>(bath.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = tr.samples[i];
        t(i) = s.t;
        pz(i) = s.pz;
        norm(i) = s.norm;
        s2(i) = s.sigma2;
        ph.row(i) = s.photons.transpose();
    }
    py::dict d;
    d["t"] = t;
    d["pz"] = pz;
    d["norm"] = norm;
    d["sigma2"] = s2;
    d["omegas"] = bath.omegas;
    d["photons"] = ph;
    d["max_norm_error"] = tr.max_norm_error;
    d["warnings"] = tr.warnings;
    return d;
}

py::dict tlme_py(const RunConfig& cfg, bool rwa)
{
    cfg.validate();
    const auto bath = discretize_bath(cfg.model);
    TlmeResult res;
    {
        py::gil_scoped_release nogil;
        res = run_tlme(cfg.model, rwa ? Coupling::rwa : Coupling::full, bath, cfg.tlme);
    }
    const auto steps = static_cast<Eigen::Index>(res.rho.lab.size());
    Eigen::VectorXd t(steps), pz(steps);
    for (Eigen::Index i = 0; i < steps; ++i) {
        t(i) = res.rho.time(i);
        pz(i) = res.rho.pz(i);
    }
    py::dict d;
    d["t"] = t;
    d["pz"] = pz;
    d["spectrum_t"] = res.spectrum.times;
    d["omegas"] = res.spectrum.omegas;
    d["spectrum"] = res.spectrum.values;
    return d;
}

py::dict heom_py(const RunConfig& cfg)
{
    cfg.validate();
    HeomTrajectory tr;
    {
        py::gil_scoped_release nogil;
        tr = run_heom(cfg.model, cfg.heom, cfg.sample_stride());
    }
    py::dict d;
    d["t"] = tr.t;
    d["pz"] = tr.pz;
    d["nodes"] = tr.nodes;
    d["fit_residual"] = tr.fit.residual();
    d["depth_delta"] = tr.depth_delta;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("omega0", &ModelConfig::omega0)
        .def_readwrite("rabi", &ModelConfig::rabi)
        .def_readwrite("omega_x", &ModelConfig::omega_x)
        .def_readwrite("alpha", &ModelConfig::alpha)
        .def_readwrite("omega_c", &ModelConfig::omega_c)
        .def_readwrite("n_modes", &ModelConfig::n_modes)
        .def_readwrite("t_final", &ModelConfig::t_final)
        .def_readwrite("dt", &ModelConfig::dt)
        .def_readwrite("multiplicity", &ModelConfig::multiplicity)
        .def_property(
            "initial", [](const ModelConfig& c) { return initial_name(c.initial); }, &set_initial)
        .def("validate", &ModelConfig::validate);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("model", &RunConfig::model)
        .def_readwrite("sample_dt", &RunConfig::sample_dt)
        .def("validate", &RunConfig::validate)
        .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; })
        .def("__repr__", [](const RunConfig& c) { return "RunConfig(" + config_echo(c) + ")"; });

    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));
    m.def("config_echo", &config_echo, py::arg("config"));

    m.def(
        "discretize_bath",
        [](const ModelConfig& c) {
            const auto b = discretize_bath(c);
            return py::make_tuple(b.omegas, b.couplings);
        },
        py::arg("model"), "(omegas, couplings) of the linear discretization");
    m.def(
        "bath_correlation",
        [](double t, const ModelConfig& c, const std::string& convention) {
            if (convention == "tlme") return bath_correlation_tlme(t, c);
            if (convention == "heom") return bath_correlation_heom(t, c);
            throw ConfigError("convention must be 'tlme' or 'heom'");
        },
        py::arg("t"), py::arg("model"), py::arg("convention") = "tlme");

    m.def("run_davydov", &davydov_py, py::arg("config"));
    m.def("run_tlme", &tlme_py, py::arg("config"), py::arg("rwa") = false);
    m.def("run_heom", &heom_py, py::arg("config"));
    m.def("asymmetry", &asymmetry, py::arg("omegas"), py::arg("n"), py::arg("omega_ref"));
}

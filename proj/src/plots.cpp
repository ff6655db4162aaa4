#include "qfluor/plots.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qfluor/csv.hpp"
#include "qfluor/runner.hpp"

namespace qfluor {

namespace fs = std::filesystem;

namespace {

const char* kPrelude = R"(import os
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
RUN = os.path.dirname(HERE)


def load(method, name):
    # comment lines start with '#', then one header row, then numbers
    with open(os.path.join(RUN, method, name)) as fh:
        lines = [l for l in fh if not l.startswith("#")]
    cols = lines[0].strip().split(",")
    return cols, np.loadtxt(lines[1:], delimiter=",", ndmin=2)

)";

std::string py_list(const std::vector<double>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
    return s + "]";
}

std::string py_strings(const std::vector<std::string>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", \"" : "\"") + v[i] + "\"";
    return s + "]";
}

std::vector<double> omegas_of(const Table& t)
{
    std::vector<double> w;
    for (std::size_t c = 1; c < t.columns.size(); ++c) w.push_back(std::stod(t.columns[c]));
    return w;
}

void write_script(const fs::path& path, const std::string& body, std::vector<std::string>& out)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << kPrelude << body;
    out.push_back(path.string());
}

std::string dynamics_script(const std::vector<std::string>& methods)
{
    std::ostringstream s;
    s << "METHODS = " << py_strings(methods) << "\n\n"
      << "fig, ax = plt.subplots(figsize=(6, 4))\n"
      << "for m in METHODS:\n"
      << "    cols, d = load(m, \"dynamics.csv\")\n"
      << "    ax.plot(d[:, cols.index(\"t\")], d[:, cols.index(\"P_z\")], label=m)\n"
      << "ax.set_xlabel(r\"$\\omega_0 t$\")\n"
      << "ax.set_ylabel(r\"$P_z(t)$\")\n"
      << "ax.legend()\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(os.path.join(HERE, \"" << (methods.size() > 1 ? "pz_overlay" : "dynamics") << ".png\"), dpi=150)\n";
    return s.str();
}

std::string deviation_script()
{
    return "cols, d = load(\"davydov\", \"dynamics.csv\")\n"
           "fig, ax = plt.subplots(figsize=(6, 4))\n"
           "ax.semilogy(d[:, cols.index(\"t\")], np.maximum(d[:, cols.index(\"sigma2\")], 1e-16))\n"
           "ax.set_xlabel(r\"$\\omega_0 t$\")\n"
           "ax.set_ylabel(r\"$\\sigma^2(t)$\")\n"
           "fig.tight_layout()\n"
           "fig.savefig(os.path.join(HERE, \"deviation.png\"), dpi=150)\n";
}

// heatmap N(w, t) plus cuts at four times; OMEGA must match the spectrum.csv header
std::string heatmap_script(const std::string& method, const std::vector<double>& omegas)
{
    std::ostringstream s;
    s << "METHOD = \"" << method << "\"\n"
      << "OMEGA = np.array(" << py_list(omegas) << ")\n\n"
      << "cols, d = load(METHOD, \"spectrum.csv\")\n"
      << "assert cols[0] == \"t\" and np.allclose([float(c) for c in cols[1:]], OMEGA, rtol=1e-12)\n"
      << "t, n = d[:, 0], d[:, 1:]\n"
      << "fig, (ax, bx) = plt.subplots(1, 2, figsize=(11, 4))\n"
      << "im = ax.pcolormesh(OMEGA, t, n, shading=\"nearest\", cmap=\"viridis\")\n"
      << "fig.colorbar(im, ax=ax, label=r\"$N(\\omega, t)$\")\n"
      << "ax.set_xlabel(r\"$\\omega/\\omega_0$\")\n"
      << "ax.set_ylabel(r\"$\\omega_0 t$\")\n"
      << "for frac in (0.25, 0.5, 0.75, 1.0):\n"
      << "    i = int(round(frac * (len(t) - 1)))\n"
      << "    bx.plot(OMEGA, n[i], \"o-\", ms=2, label=\"t = %g\" % t[i])\n"
      << "bx.set_xlabel(r\"$\\omega/\\omega_0$\")\n"
      << "bx.set_ylabel(r\"$N(\\omega, t)$\")\n"
      << "bx.legend()\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(os.path.join(HERE, \"spectrum_" << method << ".png\"), dpi=150)\n";
    return s.str();
}

std::string spectrum_overlay_script(const std::vector<std::string>& methods, const std::vector<double>& omegas)
{
    std::ostringstream s;
    s << "METHODS = " << py_strings(methods) << "\n"
      << "OMEGA = np.array(" << py_list(omegas) << ")\n\n"
      << "fig, axes = plt.subplots(1, 4, figsize=(16, 4), sharey=True)\n"
      << "for m in METHODS:\n"
      << "    cols, d = load(m, \"spectrum.csv\")\n"
      << "    assert np.allclose([float(c) for c in cols[1:]], OMEGA, rtol=1e-12)\n"
      << "    t, n = d[:, 0], d[:, 1:]\n"
      << "    for ax, frac in zip(axes, (0.25, 0.5, 0.75, 1.0)):\n"
      << "        i = int(round(frac * (len(t) - 1)))\n"
      << "        ax.plot(OMEGA, n[i], \"o-\", ms=2, label=m)\n"
      << "        ax.set_title(\"t = %g\" % t[i])\n"
      << "        ax.set_xlabel(r\"$\\omega/\\omega_0$\")\n"
      << "axes[0].set_ylabel(r\"$N(\\omega, t)$\")\n"
      << "axes[0].legend()\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(os.path.join(HERE, \"spectrum_overlay.png\"), dpi=150)\n";
    return s.str();
}

} // namespace

std::vector<std::string> emit_plots(const std::string& run_dir)
{
    const RunManifest man = read_manifest(run_dir);
    std::vector<std::string> methods, spectral;
    std::vector<double> omegas;
    for (const auto& st : man.status) {
        if (st.status != "ok") continue;
        const fs::path dir = fs::path(run_dir) / st.method;
        if (!fs::exists(dir / "dynamics.csv")) throw ConfigError("missing " + (dir / "dynamics.csv").string());
        methods.push_back(st.method);
        if (st.method == "heom") continue;
        if (!fs::exists(dir / "spectrum.csv")) throw ConfigError("missing " + (dir / "spectrum.csv").string());
        const auto w = omegas_of(read_table((dir / "spectrum.csv").string()));
        if (!omegas.empty() && w != omegas) throw ConfigError("spectra use different mode grids");
        omegas = w;
        spectral.push_back(st.method);
    }
    if (methods.empty()) throw ConfigError("run has no completed method outputs");

    const fs::path out = fs::path(run_dir) / "plots";
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create '" + out.string() + "'");

    std::vector<std::string> written;
    const bool has_davydov = std::find(methods.begin(), methods.end(), "davydov") != methods.end();
    if (methods.size() == 1) {
        write_script(out / "dynamics.py", dynamics_script(methods), written);
        if (has_davydov) write_script(out / "deviation.py", deviation_script(), written);
        if (!spectral.empty()) write_script(out / "spectrum.py", heatmap_script(spectral[0], omegas), written);
        return written;
    }
    write_script(out / "pz_overlay.py", dynamics_script(methods), written);
    if (spectral.size() > 1) write_script(out / "spectrum_overlay.py", spectrum_overlay_script(spectral, omegas), written);
    if (has_davydov) {
        write_script(out / "deviation.py", deviation_script(), written);
        write_script(out / "spectrum.py", heatmap_script("davydov", omegas), written);
    }
    return written;
}

} // namespace qfluor

#include "qfluor/compare.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "qfluor/runner.hpp"
#include "qfluor/types.hpp"

namespace qfluor {

namespace fs = std::filesystem;

namespace {

constexpr double kTimeTol = 1e-9;

// pairs of row indices with equal t
std::vector<std::pair<std::size_t, std::size_t>> align(const Table& a, const Table& b)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const double t = a.rows[i][0];
        while (j < b.rows.size() && b.rows[j][0] < t - kTimeTol) ++j;
        if (j < b.rows.size() && std::abs(b.rows[j][0] - t) <= kTimeTol) out.emplace_back(i, j);
    }
    return out;
}

double omega_x_of(const Table& t)
{
    try {
        const auto j = nlohmann::json::parse(t.config);
        return j.at("model").at("omega_x").get<double>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("table for '" + t.method + "' has no usable config echo; pass omega_ref explicitly");
    }
}

std::vector<double> mode_omegas(const Table& t)
{
    std::vector<double> w;
    for (std::size_t c = 1; c < t.columns.size(); ++c) w.push_back(std::stod(t.columns[c]));
    return w;
}

std::string label_of(const Table& t) { return t.method + "@" + t.run_id; }

} // namespace

double asymmetry(const std::vector<double>& w, const std::vector<double>& n, double ref)
{
    if (w.size() != n.size() || w.size() < 2) throw std::invalid_argument("asymmetry: need matching grids of >= 2 modes");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double d = w[k] - ref;
        if (d <= 0.0) continue;
        const double mirror = ref - d;
        if (mirror < w.front()) continue;
        auto it = std::upper_bound(w.begin(), w.end(), mirror);
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - w.begin()), w.size() - 1);
        const std::size_t lo = hi - 1;
        const double x = std::clamp((mirror - w[lo]) / (w[hi] - w[lo]), 0.0, 1.0);
        const double nm = (1.0 - x) * n[lo] + x * n[hi];
        num += std::abs(n[k] - nm);
        den += n[k] + nm;
    }
    if (!(den > 0.0)) return 0.0;
    return num / den;
}

std::string ComparisonReport::to_text() const
{
    std::ostringstream os;
    os.precision(10);
    os << "a = " << label_a << "\nb = " << label_b << "\ncommon_times = " << common_times << '\n';
    os << "pz_linf = " << pz_linf << "\npz_l2 = " << pz_l2 << '\n';
    if (spectrum) {
        os << "spectrum_peak_norm_linf = " << spectrum->aggregate << '\n';
        for (std::size_t k = 0; k < spectrum->omegas.size(); ++k)
            os << "mode " << k + 1 << " omega = " << spectrum->omegas[k] << " peak_norm_linf = " << spectrum->per_mode[k]
               << '\n';
    }
    if (asymmetry_a || asymmetry_b) {
        os << "asymmetry_time = " << asym_time << "\nasymmetry_omega_ref = " << omega_ref << '\n';
        if (asymmetry_a) os << "asymmetry_a = " << *asymmetry_a << '\n';
        if (asymmetry_b) os << "asymmetry_b = " << *asymmetry_b << '\n';
    }
    return os.str();
}

ComparisonReport compare_tables(const Table& dyn_a, const Table* spec_a, const Table& dyn_b, const Table* spec_b,
                                const CompareOptions& opts)
{
    ComparisonReport r;
    r.label_a = label_of(dyn_a);
    r.label_b = label_of(dyn_b);
    const int pa = dyn_a.column("P_z"), pb = dyn_b.column("P_z");
    if (pa < 0 || pb < 0) throw ConfigError("dynamics table without a P_z column");
    const auto pairs = align(dyn_a, dyn_b);
    if (pairs.empty()) throw ConfigError("grid mismatch: no common sample times");
    r.common_times = pairs.size();
    double sq = 0.0;
    for (auto [i, j] : pairs) {
        const double d = std::abs(dyn_a.rows[i][pa] - dyn_b.rows[j][pb]);
        r.pz_linf = std::max(r.pz_linf, d);
        sq += d * d;
    }
    r.pz_l2 = std::sqrt(sq / static_cast<double>(pairs.size()));

    const double ref = opts.omega_ref ? *opts.omega_ref : omega_x_of(dyn_a);
    r.omega_ref = ref;
    auto snapshot = [&](const Table& s, double t) -> std::optional<double> {
        for (const auto& row : s.rows)
            if (std::abs(row[0] - t) <= kTimeTol)
                return asymmetry(mode_omegas(s), std::vector<double>(row.begin() + 1, row.end()), ref);
        return std::nullopt;
    };

    if (spec_a && spec_b) {
        const auto wa = mode_omegas(*spec_a), wb = mode_omegas(*spec_b);
        if (wa.size() != wb.size()) throw ConfigError("grid mismatch: different bath discretizations");
        for (std::size_t k = 0; k < wa.size(); ++k)
            if (std::abs(wa[k] - wb[k]) > 1e-12 * std::max(1.0, std::abs(wa[k])))
                throw ConfigError("grid mismatch: different mode frequencies");
        const auto sp = align(*spec_a, *spec_b);
        if (sp.empty()) throw ConfigError("grid mismatch: spectra share no sample times");
        SpectrumMetrics m;
        m.omegas = wa;
        for (std::size_t k = 0; k < wa.size(); ++k) {
            const std::size_t c = k + 1;
            double peak = 0.0, diff = 0.0;
            for (auto [i, j] : sp) {
                const double x = spec_a->rows[i][c], y = spec_b->rows[j][c];
                peak = std::max({peak, std::abs(x), std::abs(y)});
                diff = std::max(diff, std::abs(x - y));
            }
            m.per_mode.push_back(peak > 0.0 ? diff / peak : 0.0);
        }
        m.aggregate = m.per_mode.empty() ? 0.0 : *std::max_element(m.per_mode.begin(), m.per_mode.end());
        r.spectrum = m;
        r.asym_time = opts.time ? *opts.time : spec_a->rows[sp.back().first][0];
    } else if (spec_a || spec_b) {
        const Table& s = spec_a ? *spec_a : *spec_b;
        r.asym_time = opts.time ? *opts.time : s.rows.back()[0];
    }
    if (spec_a) r.asymmetry_a = snapshot(*spec_a, r.asym_time);
    if (spec_b) r.asymmetry_b = snapshot(*spec_b, r.asym_time);
    return r;
}

std::vector<ComparisonReport> compare_paths(const std::string& a, const std::string& b, const CompareOptions& opts)
{
    auto one = [&](const fs::path& da, const fs::path& db) {
        const Table ta = read_table((da / "dynamics.csv").string());
        const Table tb = read_table((db / "dynamics.csv").string());
        std::optional<Table> sa, sb;
        if (fs::exists(da / "spectrum.csv")) sa = read_table((da / "spectrum.csv").string());
        if (fs::exists(db / "spectrum.csv")) sb = read_table((db / "spectrum.csv").string());
        return compare_tables(ta, sa ? &*sa : nullptr, tb, sb ? &*sb : nullptr, opts);
    };
    const fs::path pa(a), pb(b);
    const bool ma = fs::exists(pa / "dynamics.csv"), mb = fs::exists(pb / "dynamics.csv");
    if (ma && mb) return {one(pa, pb)};
    if (ma || mb) throw ConfigError("compare: mix of a method directory and a run directory");

    const RunManifest ra = read_manifest(a), rb = read_manifest(b);
    std::vector<ComparisonReport> out;
    for (const auto& s : ra.status) {
        if (s.status != "ok") continue;
        for (const auto& t : rb.status)
            if (t.method == s.method && t.status == "ok") out.push_back(one(pa / s.method, pb / t.method));
    }
    if (out.empty()) throw ConfigError("compare: the runs share no successfully completed method");
    return out;
}

} // namespace qfluor

#include "qfluor/heom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "qfluor/parallel.hpp"

namespace qfluor {

namespace {

void enumerate(std::vector<std::uint8_t>& cur, int slot, int left, std::vector<std::vector<std::uint8_t>>& out)
{
    if (slot == static_cast<int>(cur.size())) {
        out.push_back(cur);
        return;
    }
    for (int j = 0; j <= left; ++j) {
        cur[slot] = static_cast<std::uint8_t>(j);
        enumerate(cur, slot + 1, left - j, out);
    }
    cur[slot] = 0;
}

int total(const std::vector<std::uint8_t>& v)
{
    int s = 0;
    for (auto x : v) s += x;
    return s;
}

} // namespace

int Hierarchy::find(const std::vector<std::uint8_t>& idx) const
{
    auto it = std::lower_bound(index.begin(), index.end(), idx);
    if (it == index.end() || *it != idx) return -1;
    return static_cast<int>(it - index.begin());
}

Hierarchy build_hierarchy(const OedfFit& fit, int depth)
{
    if (depth < 0) throw ConfigError("hierarchy depth must be >= 0");
    if (depth > 255) throw ConfigError("hierarchy depth too large");
    Hierarchy h;
    h.slots_real = 2 * fit.real.size();
    h.slots_imag = 2 * fit.imag.size();
    h.depth = depth;
    const int ns = h.slots_real + h.slots_imag;

    std::vector<std::uint8_t> cur(ns, 0);
    enumerate(cur, 0, depth, h.index);
    // lexicographic order puts the physical (all-zero) node first and allows binary search
    std::sort(h.index.begin(), h.index.end());
    const auto n = h.index.size();

    // per-slot data: amplitude, phi(0), partner eta, diagonal eta, scale
    std::vector<double> amp(ns), phi0(ns), eta_diag(ns), eta_partner(ns), scale(ns);
    for (int s = 0; s < ns; ++s) {
        const bool re = s < h.slots_real;
        const OedfTerms& x = re ? fit.real : fit.imag;
        const int local = re ? s : s - h.slots_real;
        const int k = local / 2;
        amp[s] = x.amplitudes[local];
        phi0[s] = local % 2 == 0 ? 1.0 : 0.0;
        eta_diag[s] = -x.gammas[k];
        eta_partner[s] = local % 2 == 0 ? -x.omegas[k] : x.omegas[k];
        scale[s] = std::abs(amp[s]) > 0.0 ? std::sqrt(std::abs(amp[s])) : 1.0;
    }
    // w_n = prod_s c_s^{j_s} / sqrt(j_s!); only ratios between neighbours are needed
    auto ratio_up = [&](int s, int j_after) { return scale[s] / std::sqrt(static_cast<double>(j_after)); };

    h.links.assign(n, {});
    h.damping.assign(n, 0.0);
    for (std::size_t node = 0; node < n; ++node) {
        std::vector<std::uint8_t> idx = h.index[node];
        const int tot = total(idx);
        auto& links = h.links[node];
        for (int s = 0; s < ns; ++s) {
            const bool re = s < h.slots_real;
            const int j = idx[s];
            h.damping[node] += j * eta_diag[s];
            if (j > 0) {
                // lower neighbour: j phi_s(0) V^x (real) or V^o (imaginary), w_n / w_m = c_s / sqrt(j)
                if (phi0[s] != 0.0) {
                    idx[s] -= 1;
                    const int m = h.find(idx);
                    idx[s] += 1;
                    const double coef = j * phi0[s] * ratio_up(s, j);
                    links.push_back({m, coef, re ? Hierarchy::Link::commutator : Hierarchy::Link::anticommutator});
                }
                // eta coupling to the partner slot of the same term
                const int p = (s % 2 == 0) ? s + 1 : s - 1;
                if (eta_partner[s] != 0.0) {
                    idx[s] -= 1;
                    idx[p] += 1;
                    const int m = h.find(idx);
                    const int jp = idx[p];
                    idx[p] -= 1;
                    idx[s] += 1;
                    // w_n / w_m = (c_s / sqrt(j)) / (c_p / sqrt(jp))
                    const double coef = j * eta_partner[s] * ratio_up(s, j) / ratio_up(p, jp);
                    links.push_back({m, coef, Hierarchy::Link::plain});
                }
            }
            if (tot < depth && amp[s] != 0.0) {
                // upper neighbour: -a_R V^x rho, or -i a_I V^x rho; w_n / w_m = sqrt(j + 1) / c_s
                idx[s] += 1;
                const int m = h.find(idx);
                idx[s] -= 1;
                const cplx a = re ? cplx(-amp[s]) : cplx(0.0, -amp[s]);
                links.push_back({m, a / ratio_up(s, j + 1), Hierarchy::Link::commutator});
            }
        }
    }
    for (const auto& ls : h.links)
        for (const auto& l : ls)
            if (l.node < 0) throw std::logic_error("build_hierarchy: neighbour outside the index set");
    return h;
}

HeomTrajectory evolve_heom(const ModelConfig& cfg, const OedfFit& fit, int depth, int stride, double divergence_limit,
                           int threads)
{
    cfg.validate();
    if (stride < 1) throw ConfigError("sample stride must be positive");
    const Hierarchy h = build_hierarchy(fit, depth);
    const std::size_t n = h.size();
    const Mat2 v = 0.5 * pauli::sx();
    const double dt = cfg.dt;
    const long steps = static_cast<long>(std::floor(cfg.t_final / dt + 1e-9));

    std::vector<Mat2> rho(n, Mat2::Zero()), k(n), acc(n), tmp(n);
    const Vec2 c = cfg.initial.amplitudes();
    rho[0] = c * c.adjoint();

    const long chunk = 256;
    const long nchunks = static_cast<long>((n + chunk - 1) / chunk);
    auto rhs = [&](const std::vector<Mat2>& x, double t, std::vector<Mat2>& out) {
        const Mat2 hs = qubit_hamiltonian(t, cfg);
        parallel_for(
            nchunks,
            [&](long ci) {
                const std::size_t lo = static_cast<std::size_t>(ci) * chunk;
                const std::size_t hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) {
                    Mat2 d = -I * (hs * x[i] - x[i] * hs) + h.damping[i] * x[i];
                    for (const auto& l : h.links[i]) {
                        const Mat2& y = x[l.node];
                        switch (l.kind) {
                        case Hierarchy::Link::commutator: d += l.coef * (v * y - y * v); break;
                        case Hierarchy::Link::anticommutator: d += l.coef * (v * y + y * v); break;
                        case Hierarchy::Link::plain: d += l.coef * y; break;
                        }
                    }
                    out[i] = d;
                }
            },
            threads);
    };

    HeomTrajectory traj;
    traj.fit = fit;
    traj.depth = depth;
    traj.nodes = n;
    for (long step = 0;; ++step) {
        const double t = step * dt;
        if (step % stride == 0 || step == steps) {
            const Mat2& r = rho[0];
            traj.t.push_back(t);
            traj.pz.push_back((r(0, 0) - r(1, 1)).real());
            traj.rho.push_back(r);
            traj.max_trace_error = std::max(traj.max_trace_error, std::abs(r.trace() - 1.0));
            traj.max_hermiticity_error = std::max(traj.max_hermiticity_error, (r - r.adjoint()).cwiseAbs().maxCoeff());
        }
        if (step == steps) break;

        rhs(rho, t, k);
        for (std::size_t i = 0; i < n; ++i) {
            acc[i] = k[i];
            tmp[i] = rho[i] + 0.5 * dt * k[i];
        }
        rhs(tmp, t + 0.5 * dt, k);
        for (std::size_t i = 0; i < n; ++i) {
            acc[i] += 2.0 * k[i];
            tmp[i] = rho[i] + 0.5 * dt * k[i];
        }
        rhs(tmp, t + 0.5 * dt, k);
        for (std::size_t i = 0; i < n; ++i) {
            acc[i] += 2.0 * k[i];
            tmp[i] = rho[i] + dt * k[i];
        }
        rhs(tmp, t + dt, k);
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rho[i] += (dt / 6.0) * (acc[i] + k[i]);
            worst = std::max(worst, rho[i].norm());
        }
        if (!(worst <= divergence_limit)) {
            std::ostringstream os;
            os << "HEOM diverged at t=" << t + dt << " (auxiliary norm " << worst << " > " << divergence_limit
               << "); deepen the hierarchy or reduce dt";
            throw NumericalError(os.str());
        }
    }
    return traj;
}

HeomTrajectory run_heom(const ModelConfig& cfg, const HeomOptions& opts, int stride)
{
    const OedfFit fit = fit_correlation(cfg, opts.t_fit, opts.n_real, opts.n_imag, opts.fit);
    HeomTrajectory traj = evolve_heom(cfg, fit, opts.depth, stride, opts.divergence_limit, opts.threads);
    if (opts.depth_check) {
        const HeomTrajectory deeper = evolve_heom(cfg, fit, opts.depth + 1, stride, opts.divergence_limit, opts.threads);
        double d = 0.0;
        for (std::size_t i = 0; i < traj.pz.size(); ++i) d = std::max(d, std::abs(traj.pz[i] - deeper.pz[i]));
        traj.depth_delta = d;
    }
    return traj;
}

} // namespace qfluor

#include "qfluor/master_eq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qfluor/parallel.hpp"

namespace qfluor {

namespace {

// O(t) = sum_k O_k exp(i k wx t)
Mat2 evaluate(const FloquetOperator& op, double t)
{
    Mat2 out = Mat2::Zero();
    const cplx step = std::polar(1.0, op.omega_x * t);
    // e^{i k wx t} by recurrence from k = 0 outwards
    cplx up = 1.0, down = 1.0;
    out += op.at_harmonic(0);
    for (int k = 1; k <= op.k_max; ++k) {
        up *= step;
        down = std::conj(up);
        out += up * op.at_harmonic(k) + down * op.at_harmonic(-k);
    }
    return out;
}

FloquetOperator trimmed(FloquetOperator op, double threshold = 1e-13)
{
    int kmax = 0;
    for (int k = -op.k_max; k <= op.k_max; ++k)
        if (op.at_harmonic(k).cwiseAbs().maxCoeff() > threshold) kmax = std::max(kmax, std::abs(k));
    std::vector<Mat2> h(2 * kmax + 1);
    for (int k = -kmax; k <= kmax; ++k) h[k + kmax] = op.at_harmonic(k);
    op.harmonics = std::move(h);
    op.k_max = kmax;
    return op;
}

Mat2 phase_factor(const std::array<double, 2>& eps, double tau)
{
    Mat2 p;
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu) p(mu, nu) = std::polar(1.0, -(eps[mu] - eps[nu]) * tau);
    return p;
}

Mat2 comm(const Mat2& a, const Mat2& b) { return a * b - b * a; }

double min_eigenvalue(const Mat2& h)
{
    const double a = h(0, 0).real(), d = h(1, 1).real();
    const double off = std::abs(h(0, 1));
    return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + off * off);
}

long stride_of(const TlmeContext& ctx)
{
    const double r = ctx.opts.dt_corr / ctx.cfg.dt;
    const long s = std::lround(r);
    if (s < 1 || std::abs(r - s) > 1e-9 * r) throw ConfigError("dt_corr must be a positive multiple of dt");
    return s;
}

} // namespace

const char* coupling_name(Coupling c) { return c == Coupling::full ? "tlme" : "rwa_tlme"; }

long TlmeContext::steps() const
{
    return static_cast<long>(std::floor(cfg.t_final / cfg.dt + 1e-9));
}

TlmeContext make_tlme_context(const ModelConfig& cfg, Coupling coupling, const TlmeOptions& opts)
{
    cfg.validate();
    if (!(opts.dt_corr > 0.0)) throw ConfigError("dt_corr must be positive");
    TlmeContext ctx;
    ctx.cfg = cfg;
    ctx.coupling = coupling;
    ctx.opts = opts;
    stride_of(ctx);
    ctx.basis = compute_floquet_basis(cfg, opts.n_max);
    const Mat2 sx = pauli::sx(), sp = pauli::sp(), sm = pauli::sm();
    const bool full = coupling == Coupling::full;
    ctx.left_op = trimmed(operator_elements(ctx.basis, full ? sx : sp));
    ctx.right_op = trimmed(operator_elements(ctx.basis, full ? sx : sm));
    ctx.kernel_op = trimmed(operator_elements(ctx.basis, full ? sx : sm));
    ctx.readout = trimmed(operator_elements(ctx.basis, full ? sx : sp));
    ctx.source = ctx.kernel_op;
    ctx.harmonics = ctx.kernel_op.significant(1e-13);

    // one Gamma column per distinct Delta_{mu nu} + k wx
    std::vector<double> omegas;
    auto register_omega = [&](double w) {
        for (std::size_t i = 0; i < omegas.size(); ++i)
            if (std::abs(omegas[i] - w) <= 1e-12 * std::max(1.0, std::abs(w))) return static_cast<int>(i);
        omegas.push_back(w);
        return static_cast<int>(omegas.size() - 1);
    };
    for (int k : ctx.harmonics) {
        std::array<int, 4> idx{};
        for (int mu = 0; mu < 2; ++mu)
            for (int nu = 0; nu < 2; ++nu) idx[2 * mu + nu] = register_omega(ctx.kernel_op.delta_shift(mu, nu, k));
        ctx.gamma_index.push_back(idx);
    }
    ctx.gamma = GammaKernel(cfg, 0.5 * cfg.dt, std::max(cfg.t_final, cfg.dt), omegas);
    return ctx;
}

Mat2 memory_integral(const TlmeContext& ctx, double t, double a, double b)
{
    const long ja = ctx.gamma.grid_index(a), jb = ctx.gamma.grid_index(b);
    Mat2 y = Mat2::Zero();
    if (ja == jb) return y;
    const double wx = ctx.kernel_op.omega_x;
    for (std::size_t i = 0; i < ctx.harmonics.size(); ++i) {
        const int k = ctx.harmonics[i];
        const Mat2& o = ctx.kernel_op.at_harmonic(k);
        const cplx ph = std::polar(1.0, k * wx * t);
        for (int mu = 0; mu < 2; ++mu)
            for (int nu = 0; nu < 2; ++nu) {
                const cplx om = o(mu, nu);
                if (om == cplx(0.0)) continue;
                const int w = ctx.gamma_index[i][2 * mu + nu];
                y(mu, nu) += ph * om * (ctx.gamma.cumulative(w, jb) - ctx.gamma.cumulative(w, ja));
            }
    }
    return y;
}

RhoTrajectory evolve_rho(const TlmeContext& ctx)
{
    const double dt = ctx.cfg.dt;
    const long n = ctx.steps();
    const auto& eps = ctx.basis.quasienergies;
    Mat2 delta;
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu) delta(mu, nu) = -I * (eps[mu] - eps[nu]);

    auto rhs = [&](const Mat2& r, double t) -> Mat2 {
        const Mat2 y = memory_integral(ctx, t, 0.0, t);
        const Mat2 l = evaluate(ctx.left_op, t), rr = evaluate(ctx.right_op, t);
        return delta.cwiseProduct(r) - comm(l, y * r) + comm(rr, r * y.adjoint());
    };

    const Vec2 c = ctx.cfg.initial.amplitudes();
    const Mat2 rho0 = c * c.adjoint();

    RhoTrajectory out;
    out.dt = dt;
    out.floquet.reserve(n + 1);
    out.lab.reserve(n + 1);
    Mat2 r = ctx.basis.to_floquet(rho0, 0.0);
    bool pos_warned = false;
    for (long i = 0;; ++i) {
        const double t = i * dt;
        const Mat2 lab = ctx.basis.from_floquet(r, t);
        out.floquet.push_back(r);
        out.lab.push_back(lab);
        out.max_trace_error = std::max(out.max_trace_error, std::abs(lab.trace() - 1.0));
        out.max_hermiticity_error = std::max(out.max_hermiticity_error, (lab - lab.adjoint()).cwiseAbs().maxCoeff());
        const double ev = min_eigenvalue(lab);
        out.min_eigenvalue = std::min(out.min_eigenvalue, ev);
        if (ev < -1e-6 && !pos_warned) {
            std::ostringstream os;
            os << "t=" << t << ": reduced density matrix eigenvalue " << ev << " below zero";
            out.warnings.push_back(os.str());
            pos_warned = true;
        }
        if (!lab.allFinite()) throw NumericalError("evolve_rho: non-finite density matrix");
        if (i == n) break;
        const Mat2 k1 = rhs(r, t);
        const Mat2 k2 = rhs(r + 0.5 * dt * k1, t + 0.5 * dt);
        const Mat2 k3 = rhs(r + 0.5 * dt * k2, t + 0.5 * dt);
        const Mat2 k4 = rhs(r + dt * k3, t + dt);
        r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

std::vector<Mat2> evolve_lambda(const TlmeContext& ctx, const RhoTrajectory& rho, long anchor_step, long stride)
{
    const double dt = ctx.cfg.dt;
    const long n = ctx.steps();
    if (anchor_step < 0 || anchor_step > n) throw std::out_of_range("evolve_lambda: anchor outside the horizon");
    if (static_cast<long>(rho.floquet.size()) <= anchor_step)
        throw std::invalid_argument("evolve_lambda: rho trajectory does not reach the anchor");
    if (stride < 1) throw std::invalid_argument("evolve_lambda: stride must be positive");

    const auto& eps = ctx.basis.quasienergies;
    const double t0 = anchor_step * dt;
    Mat2 delta;
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu) delta(mu, nu) = -I * (eps[mu] - eps[nu]);
    const Mat2& rho_anchor = rho.floquet[anchor_step];
    const Mat2 src_anchor = evaluate(ctx.source, t0);

    auto rhs = [&](const Mat2& lam, double t) -> Mat2 {
        const double tau0 = t - t0;
        const Mat2 l = evaluate(ctx.left_op, t), rr = evaluate(ctx.right_op, t);
        const Mat2 y = memory_integral(ctx, t, 0.0, tau0);
        Mat2 d = delta.cwiseProduct(lam) - comm(l, y * lam) + comm(rr, lam * y.adjoint());
        if (ctx.opts.inhomogeneous) {
            const Mat2 yp = memory_integral(ctx, t, tau0, t);
            const Mat2 ph = phase_factor(eps, tau0);
            const Mat2 s = src_anchor.cwiseProduct(ph);
            const Mat2 r = rho_anchor.cwiseProduct(ph);
            d += -comm(l, s * yp * r) + comm(rr, s * r * yp.adjoint());
        }
        return d;
    };

    std::vector<Mat2> out;
    out.reserve((n - anchor_step) / stride + 1);
    Mat2 lam = src_anchor * rho_anchor;
    const long last = anchor_step + ((n - anchor_step) / stride) * stride;
    for (long i = anchor_step;; ++i) {
        if ((i - anchor_step) % stride == 0) out.push_back(lam);
        if (i == last) break;
        const double t = i * dt;
        const Mat2 k1 = rhs(lam, t);
        const Mat2 k2 = rhs(lam + 0.5 * dt * k1, t + 0.5 * dt);
        const Mat2 k3 = rhs(lam + 0.5 * dt * k2, t + 0.5 * dt);
        const Mat2 k4 = rhs(lam + dt * k3, t + dt);
        lam += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!lam.allFinite()) throw NumericalError("evolve_lambda: non-finite effective density");
    }
    return out;
}

CorrelatorGrid correlator_grid(const TlmeContext& ctx, const RhoTrajectory& rho)
{
    const long stride = stride_of(ctx);
    const long n = ctx.steps();
    CorrelatorGrid grid;
    grid.dt_corr = ctx.opts.dt_corr;
    grid.size = n / stride + 1;
    grid.lower.assign(static_cast<std::size_t>(grid.size * (grid.size + 1) / 2), 0.0);
    const double dt = ctx.cfg.dt;

    parallel_for(
        grid.size,
        [&](long j) {
            const std::vector<Mat2> lam = evolve_lambda(ctx, rho, j * stride, stride);
            for (long i = j; i < grid.size; ++i) {
                const double t = i * stride * dt;
                const Mat2 ro = evaluate(ctx.readout, t);
                grid.lower[static_cast<std::size_t>(i * (i + 1) / 2 + j)] = (ro * lam[i - j]).trace();
            }
        },
        ctx.opts.threads);
    return grid;
}

int SpectrumFrame::mode_index(double w) const
{
    if (omegas.empty()) throw std::out_of_range("SpectrumFrame: no modes");
    int best = 0;
    for (std::size_t k = 1; k < omegas.size(); ++k)
        if (std::abs(omegas[k] - w) < std::abs(omegas[best] - w)) best = static_cast<int>(k);
    return best;
}

SpectrumFrame spectrum_from_correlator(const CorrelatorGrid& grid, const DiscretizedBath& bath,
                                       const std::vector<double>& times, const std::string& method)
{
    const double h = grid.dt_corr;
    std::vector<long> idx;
    for (double t : times) {
        const double x = t / h;
        const long j = std::lround(x);
        if (std::abs(x - j) > 1e-6 || j < 0) throw std::invalid_argument("spectrum: time not on the correlator grid");
        if (j >= grid.size) throw std::out_of_range("spectrum: time beyond the correlator grid");
        idx.push_back(j);
    }
    const long jmax = idx.empty() ? 0 : *std::max_element(idx.begin(), idx.end());

    SpectrumFrame out;
    out.method = method;
    out.omegas = bath.omegas;
    out.times = times;
    const int nm = static_cast<int>(bath.size());
    out.values.setZero(static_cast<Eigen::Index>(times.size()), nm);
    std::vector<double> imag(nm, 0.0);

    parallel_for(nm, [&](long k) {
        const double w = bath.omegas[k];
        const double pref = 0.25 * bath.couplings[k] * bath.couplings[k];
        std::vector<cplx> a(jmax + 1);
        for (long i = 0; i <= jmax; ++i) a[i] = h * std::polar(1.0, -w * i * h);
        // S: full-weight sum over [0, J]^2; r0: row 0 of K a*
        cplx s = 0.0, r0 = 0.0;
        std::vector<cplx> tj(jmax + 1, 0.0);
        for (long jj = 0; jj <= jmax; ++jj) {
            cplx r = 0.0; // sum_{j < J} K_Jj a_j*
            for (long j = 0; j < jj; ++j) r += grid.at(jj, j) * std::conj(a[j]);
            const cplx kjj = grid.at(jj, jj);
            s += 2.0 * (a[jj] * r).real() + std::norm(a[jj]) * kjj;
            r0 += grid.at(0, jj) * std::conj(a[jj]);
            if (jj == 0) continue;
            const cplx d0 = 0.5 * a[0], dj = 0.5 * a[jj];
            const cplx rj = r + kjj * std::conj(a[jj]);
            const cplx dd = std::norm(d0) * grid.at(0, 0) + std::norm(dj) * kjj +
                            2.0 * (d0 * std::conj(dj) * grid.at(0, jj)).real();
            tj[jj] = s - 2.0 * (d0 * r0 + dj * rj).real() + dd;
        }
        for (std::size_t q = 0; q < idx.size(); ++q) {
            const cplx v = pref * tj[idx[q]];
            out.values(static_cast<Eigen::Index>(q), k) = v.real();
            imag[k] = std::max(imag[k], std::abs(v.imag()));
        }
    });
    out.max_imag = nm ? *std::max_element(imag.begin(), imag.end()) : 0.0;
    out.min_value = out.values.size() ? out.values.minCoeff() : 0.0;
    return out;
}

TlmeResult run_tlme(const ModelConfig& cfg, Coupling coupling, const DiscretizedBath& bath, const TlmeOptions& opts)
{
    const TlmeContext ctx = make_tlme_context(cfg, coupling, opts);
    TlmeResult res;
    res.rho = evolve_rho(ctx);
    res.grid = correlator_grid(ctx, res.rho);
    std::vector<double> times(res.grid.size);
    for (long i = 0; i < res.grid.size; ++i) times[i] = res.grid.time(i);
    res.spectrum = spectrum_from_correlator(res.grid, bath, times, coupling_name(coupling));
    return res;
}

} // namespace qfluor

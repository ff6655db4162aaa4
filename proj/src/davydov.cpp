#include "qfluor/davydov.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace qfluor {

namespace {

// Uniform double in [0, 1) from the top 53 bits; fixed so seeds reproduce across libraries.
double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_bath(const DavydovState& s, const DiscretizedBath& bath)
{
    if (static_cast<std::size_t>(s.n_modes()) != bath.size())
        throw std::invalid_argument("davydov: state and bath mode counts differ");
}

// One decoupled block of the EOM. amp/disp belong to the block's own branch, other_* to the
// opposite branch; sign is +1 for (A,f) and -1 for (B,g) since sx = +-1 on |+->.
linalg::LinearBlock assemble_block(const Eigen::VectorXcd& amp, const Eigen::MatrixXcd& disp,
                                   const Eigen::VectorXcd& other_amp,
                                   const Eigen::MatrixXcd& other_disp, double sign, double t,
                                   const DiscretizedBath& bath, const ModelConfig& cfg)
{
    const int m = static_cast<int>(amp.size());
    const int nb = static_cast<int>(disp.cols());
    const int dim = m * (nb + 1);
    const Eigen::Map<const Eigen::VectorXd> w(bath.omegas.data(), nb);
    const Eigen::Map<const Eigen::VectorXd> lam(bath.couplings.data(), nb);
    const double drive = cfg.rabi * std::cos(cfg.omega_x * t);

    const Eigen::MatrixXcd s_same = overlap_matrix(disp, disp);
    const Eigen::MatrixXcd s_cross = overlap_matrix(disp, other_disp);
    const Eigen::MatrixXcd w_same = disp.conjugate() * w.asDiagonal() * disp.transpose();
    const Eigen::VectorXcd c = disp * (0.5 * lam); // sum_k lambda_k/2 f_nk

    // E_ln = sign*drive + sum_k w_k f*_lk f_nk + sign*sum_k lambda_k/2 (f*_lk + f_nk)
    Eigen::MatrixXcd e = w_same;
    for (int l = 0; l < m; ++l)
        for (int n = 0; n < m; ++n) e(l, n) += sign * (drive + std::conj(c(l)) + c(n));

    linalg::LinearBlock blk;
    blk.matrix.setZero(dim, dim);
    blk.rhs.setZero(dim);

    for (int l = 0; l < m; ++l) {
        for (int n = 0; n < m; ++n) {
            const cplx sln = s_same(l, n);
            const cplx an_s = amp(n) * sln;
            blk.matrix(l, n) = sln;
            // A-row, fdot columns: A_n f*_lk S_ln
            blk.matrix.block(l, m + n * nb, 1, nb) = an_s * disp.row(l).conjugate();
            // F-rows, Adot column: f_np S_ln
            blk.matrix.block(m + l * nb, n, nb, 1) = sln * disp.row(n).transpose();
            // F-rows, fdot columns: A_n (delta_pk + f*_lk f_np) S_ln
            auto ff = blk.matrix.block(m + l * nb, m + n * nb, nb, nb);
            ff.noalias() = an_s * disp.row(n).transpose() * disp.row(l).conjugate();
            ff.diagonal().array() += an_s;
        }
    }

    const double half_w0 = 0.5 * cfg.omega0;
    // Right-hand side R, with M ydot = -i R.
    const Eigen::MatrixXcd se = s_same.cwiseProduct(e);
    const Eigen::VectorXcd r_a = half_w0 * s_cross * other_amp + se * amp;
    const Eigen::MatrixXcd s_a = s_same * amp.asDiagonal();   // S_ln A_n
    const Eigen::MatrixXcd sc_b = s_cross * other_amp.asDiagonal();
    const Eigen::MatrixXcd se_a = se * amp.asDiagonal();
    Eigen::MatrixXcd r_f = half_w0 * sc_b * other_disp + s_a * (disp * w.asDiagonal()) + se_a * disp;
    const Eigen::VectorXcd row_sum = s_a.rowwise().sum();
    r_f += (sign * 0.5) * row_sum * lam.transpose().cast<cplx>();

    blk.rhs.head(m) = -I * r_a;
    for (int l = 0; l < m; ++l) blk.rhs.segment(m + l * nb, nb) = -I * r_f.row(l).transpose();
    return blk;
}

} // namespace

bool DavydovState::all_finite() const
{
    return amp_plus.allFinite() && amp_minus.allFinite() && disp_plus.allFinite() &&
           disp_minus.allFinite();
}

DavydovState DavydovState::axpy(cplx c, const DavydovState& b) const
{
    DavydovState r = *this;
    r.amp_plus += c * b.amp_plus;
    r.amp_minus += c * b.amp_minus;
    r.disp_plus += c * b.disp_plus;
    r.disp_minus += c * b.disp_minus;
    return r;
}

Eigen::MatrixXcd EomSystem::full_matrix() const
{
    const int dim = dimension();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const int bd = m * (n_modes + 1);
    for (int b = 0; b < 2; ++b) {
        auto map = [&](int local) {
            if (local < m) return b == 0 ? index_a(local) : index_b(local);
            const int n = (local - m) / n_modes, k = (local - m) % n_modes;
            return b == 0 ? index_f(n, k) : index_g(n, k);
        };
        for (int i = 0; i < bd; ++i)
            for (int j = 0; j < bd; ++j) out(map(i), map(j)) = blocks[b].matrix(i, j);
    }
    return out;
}

Eigen::VectorXcd EomSystem::full_rhs() const
{
    Eigen::VectorXcd out(dimension());
    const int mn = m * n_modes;
    out.segment(0, m) = blocks[0].rhs.head(m);
    out.segment(m, m) = blocks[1].rhs.head(m);
    out.segment(2 * m, mn) = blocks[0].rhs.tail(mn);
    out.segment(2 * m + mn, mn) = blocks[1].rhs.tail(mn);
    return out;
}

DavydovState init_state(const ModelConfig& cfg, const DiscretizedBath& bath,
                        const DavydovOptions& opts)
{
    cfg.validate();
    const int m = cfg.multiplicity;
    const int nb = static_cast<int>(bath.size());
    DavydovState s;
    s.m = m;
    s.amp_plus.setZero(m);
    s.amp_minus.setZero(m);
    s.disp_plus.setZero(m, nb);
    s.disp_minus.setZero(m, nb);

    // (c_e, c_g) -> A = (c_e + c_g)/sqrt2, B = (c_e - c_g)/sqrt2
    const Vec2 c = cfg.initial.amplitudes();
    s.amp_plus(0) = (c(0) + c(1)) / std::sqrt(2.0);
    s.amp_minus(0) = (c(0) - c(1)) / std::sqrt(2.0);

    std::mt19937_64 rng(opts.seed);
    auto noise = [&] {
        const double re = (2.0 * unit_uniform(rng) - 1.0) * opts.noise;
        const double im = (2.0 * unit_uniform(rng) - 1.0) * opts.noise;
        return cplx(re, im);
    };
    for (int n = 1; n < m; ++n)
        for (int k = 0; k < nb; ++k) {
            s.disp_plus(n, k) = noise();
            s.disp_minus(n, k) = noise();
        }
    return s;
}

cplx coherent_overlap(const Eigen::VectorXcd& left, const Eigen::VectorXcd& right)
{
    if (left.size() != right.size()) throw std::invalid_argument("coherent_overlap: length mismatch");
    return std::exp(left.dot(right)); // Eigen dot conjugates the first argument
}

Eigen::MatrixXcd overlap_matrix(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    if (a.cols() != b.cols()) throw std::invalid_argument("overlap_matrix: mode count mismatch");
    return (a.conjugate() * b.transpose()).array().exp().matrix();
}

EomSystem assemble_eom(const DavydovState& state, double t, const DiscretizedBath& bath,
                       const ModelConfig& cfg)
{
    check_bath(state, bath);
    if (!state.all_finite()) throw NumericalError("assemble_eom: non-finite state entries");
    EomSystem sys;
    sys.m = state.m;
    sys.n_modes = state.n_modes();
    sys.blocks[0] = assemble_block(state.amp_plus, state.disp_plus, state.amp_minus,
                                   state.disp_minus, +1.0, t, bath, cfg);
    sys.blocks[1] = assemble_block(state.amp_minus, state.disp_minus, state.amp_plus,
                                   state.disp_plus, -1.0, t, bath, cfg);
    const int m = state.m, nb = state.n_modes();
    for (int b = 0; b < 2; ++b) {
        const Eigen::VectorXcd& amp = b == 0 ? state.amp_plus : state.amp_minus;
        Eigen::VectorXcd w(m + m * nb);
        w.head(m).setOnes();
        for (int l = 0; l < m; ++l) w.segment(m + l * nb, nb).setConstant(std::conj(amp(l)));
        sys.row_weights[b] = std::move(w);
    }
    return sys;
}

Eigen::VectorXcd solve_eom(const EomSystem& system, double svd_cutoff, EomSolver solver,
                           linalg::LstsqInfo* info)
{
    Eigen::VectorXcd x;
    if (solver == EomSolver::truncated) {
        const std::vector<linalg::LinearBlock> blocks(system.blocks.begin(), system.blocks.end());
        x = linalg::lstsq_blocks(blocks, svd_cutoff, info);
    } else {
        std::vector<linalg::LinearBlock> blocks(2);
        for (int b = 0; b < 2; ++b) {
            const auto& w = system.row_weights[b];
            if (w.size() != system.blocks[b].rhs.size())
                throw std::invalid_argument("solve_eom: row weights missing");
            blocks[b].matrix = w.asDiagonal() * system.blocks[b].matrix;
            blocks[b].rhs = w.cwiseProduct(system.blocks[b].rhs);
            // exact Hermitian up to rounding; symmetrize so the Cholesky sees one triangle
            blocks[b].matrix = 0.5 * (blocks[b].matrix + blocks[b].matrix.adjoint()).eval();
        }
        x = linalg::tikhonov_blocks(blocks, svd_cutoff, info);
    }
    // block layout -> full layout
    const int m = system.m, mn = system.m * system.n_modes, bd = m + mn;
    Eigen::VectorXcd out(system.dimension());
    out.segment(0, m) = x.segment(0, m);
    out.segment(m, m) = x.segment(bd, m);
    out.segment(2 * m, mn) = x.segment(m, mn);
    out.segment(2 * m + mn, mn) = x.segment(bd + m, mn);
    return out;
}

DavydovRates unpack_rates(const EomSystem& system, const Eigen::VectorXcd& ydot)
{
    if (ydot.size() != system.dimension()) throw std::invalid_argument("unpack_rates: size mismatch");
    const int m = system.m, nb = system.n_modes;
    DavydovRates r;
    r.m = m;
    r.amp_plus = ydot.segment(0, m);
    r.amp_minus = ydot.segment(m, m);
    r.disp_plus.resize(m, nb);
    r.disp_minus.resize(m, nb);
    for (int n = 0; n < m; ++n)
        for (int k = 0; k < nb; ++k) {
            r.disp_plus(n, k) = ydot(system.index_f(n, k));
            r.disp_minus(n, k) = ydot(system.index_g(n, k));
        }
    return r;
}

DavydovRates compute_rates(const DavydovState& state, double t, const DiscretizedBath& bath,
                           const ModelConfig& cfg, double svd_cutoff, EomSolver solver)
{
    const EomSystem sys = assemble_eom(state, t, bath, cfg);
    return unpack_rates(sys, solve_eom(sys, svd_cutoff, solver));
}

DavydovState step_rk4(const DavydovState& state, double t, double dt, const DiscretizedBath& bath,
                      const ModelConfig& cfg, double svd_cutoff, const DavydovRates* k1_in,
                      EomSolver solver)
{
    if (!(dt > 0.0)) throw ConfigError("step_rk4: dt must be positive");
    auto rates = [&](const DavydovState& s, double ts) {
        return compute_rates(s, ts, bath, cfg, svd_cutoff, solver);
    };
    const DavydovRates k1 = k1_in ? *k1_in : rates(state, t);
    const DavydovRates k2 = rates(state.axpy(0.5 * dt, k1), t + 0.5 * dt);
    const DavydovRates k3 = rates(state.axpy(0.5 * dt, k2), t + 0.5 * dt);
    const DavydovRates k4 = rates(state.axpy(dt, k3), t + dt);
    DavydovState next = state.axpy(dt / 6.0, k1).axpy(dt / 3.0, k2).axpy(dt / 3.0, k3).axpy(dt / 6.0, k4);
    next.time = t + dt;
    if (!next.all_finite()) throw NumericalError("step_rk4: state became non-finite");
    return next;
}

Eigen::VectorXcd photon_numbers_complex(const DavydovState& s)
{
    const Eigen::MatrixXcd sff = overlap_matrix(s.disp_plus, s.disp_plus);
    const Eigen::MatrixXcd sgg = overlap_matrix(s.disp_minus, s.disp_minus);
    // x_lk = A_l f_lk; N_k = sum_ln conj(x_lk) S_ln x_nk
    const Eigen::MatrixXcd x = s.amp_plus.asDiagonal() * s.disp_plus;
    const Eigen::MatrixXcd y = s.amp_minus.asDiagonal() * s.disp_minus;
    return (x.conjugate().cwiseProduct(sff * x)).colwise().sum().transpose() +
           (y.conjugate().cwiseProduct(sgg * y)).colwise().sum().transpose();
}

Eigen::VectorXd photon_numbers(const DavydovState& s) { return photon_numbers_complex(s).real(); }

double photon_number(const DavydovState& s, int k)
{
    if (k < 0 || k >= s.n_modes()) throw std::out_of_range("photon_number: mode index out of range");
    return photon_numbers_complex(s)(k).real();
}

cplx population_difference_complex(const DavydovState& s)
{
    const Eigen::MatrixXcd sfg = overlap_matrix(s.disp_plus, s.disp_minus);
    const cplx a = s.amp_plus.dot(sfg * s.amp_minus);
    const cplx b = s.amp_minus.dot(sfg.adjoint() * s.amp_plus);
    return a + b;
}

double population_difference(const DavydovState& s) { return population_difference_complex(s).real(); }

double norm(const DavydovState& s)
{
    const Eigen::MatrixXcd sff = overlap_matrix(s.disp_plus, s.disp_plus);
    const Eigen::MatrixXcd sgg = overlap_matrix(s.disp_minus, s.disp_minus);
    const double n2 = (s.amp_plus.dot(sff * s.amp_plus) + s.amp_minus.dot(sgg * s.amp_minus)).real();
    return std::sqrt(std::max(n2, 0.0));
}

std::vector<double> uniform_samples(const ModelConfig& cfg, int stride)
{
    if (stride < 1) throw ConfigError("sample stride must be >= 1");
    const long long nsteps = std::llround(cfg.t_final / cfg.dt);
    std::vector<double> out;
    for (long long i = 0; i <= nsteps; i += stride) out.push_back(i * cfg.dt);
    if (nsteps % stride != 0) out.push_back(nsteps * cfg.dt);
    return out;
}

DavydovTrajectory evolve(const DavydovState& initial, const ModelConfig& cfg,
                         const DiscretizedBath& bath, const std::vector<double>& sample_times,
                         const DavydovOptions& opts)
{
    cfg.validate();
    check_bath(initial, bath);
    const double dt = cfg.dt;
    const double t0 = initial.time;
    const long long nsteps = std::llround((cfg.t_final - t0) / dt);
    if (nsteps < 0 || std::abs(t0 + nsteps * dt - cfg.t_final) > 1e-9 * std::max(1.0, cfg.t_final))
        throw ConfigError("t_final must be reachable from the initial time in whole steps of dt");

    std::vector<long long> sample_steps;
    for (double ts : sample_times) {
        const double x = (ts - t0) / dt;
        const long long i = std::llround(x);
        if (std::abs(x - i) > 1e-6 || i < 0 || i > nsteps)
            throw ConfigError("sample time " + std::to_string(ts) + " is not on the step grid");
        if (!sample_steps.empty() && i <= sample_steps.back())
            throw ConfigError("sample times must be strictly increasing");
        sample_steps.push_back(i);
    }

    DavydovTrajectory traj;
    traj.seed = opts.seed;
    bool norm_warned = false, photon_warned = false, imag_warned = false;

    DavydovState state = initial;
    std::size_t next = 0;
    for (long long i = 0; i <= nsteps; ++i) {
        const double t = t0 + i * dt;
        const bool sample = next < sample_steps.size() && sample_steps[next] == i;
        if (!sample && i == nsteps) break;

        DavydovRates k1 = compute_rates(state, t, bath, cfg, opts.svd_cutoff, opts.solver);
        if (sample) {
            DavydovSample smp;
            smp.t = t;
            const cplx pz = population_difference_complex(state);
            const Eigen::VectorXcd nk = photon_numbers_complex(state);
            smp.pz = pz.real();
            smp.norm = norm(state);
            smp.photons = nk.real();
            smp.sigma2 = opts.compute_deviation ? deviation(state, k1, t, cfg, bath).sigma2 : 0.0;

            const double imag = std::max(std::abs(pz.imag()),
                                         nk.size() ? nk.imag().cwiseAbs().maxCoeff() : 0.0);
            traj.max_imag = std::max(traj.max_imag, imag);
            if (imag > 1e-10 && !imag_warned) {
                std::ostringstream os;
                os << "t=" << t << ": observable imaginary residue " << imag << " exceeds 1e-10";
                traj.warnings.push_back(os.str());
                imag_warned = true;
            }
            const double nerr = std::abs(smp.norm - 1.0);
            traj.max_norm_error = std::max(traj.max_norm_error, nerr);
            if (nerr > opts.norm_tolerance && !norm_warned) {
                std::ostringstream os;
                os << "t=" << t << ": norm deviates from 1 by " << nerr;
                traj.warnings.push_back(os.str());
                norm_warned = true;
            }
            if (smp.photons.size()) {
                const double mn = smp.photons.minCoeff();
                traj.min_photon = std::min(traj.min_photon, mn);
                if (mn < -1e-10 && !photon_warned) {
                    std::ostringstream os;
                    os << "t=" << t << ": negative photon number " << mn;
                    traj.warnings.push_back(os.str());
                    photon_warned = true;
                }
            }
            traj.samples.push_back(std::move(smp));
            ++next;
        }
        if (i == nsteps) break;
        state = step_rk4(state, t, dt, bath, cfg, opts.svd_cutoff, &k1, opts.solver);
    }

    if (opts.halved_step_check) {
        ModelConfig half = cfg;
        half.dt = 0.5 * dt;
        DavydovOptions sub = opts;
        sub.halved_step_check = false;
        sub.compute_deviation = false;
        const DavydovTrajectory fine = evolve(initial, half, bath, sample_times, sub);
        double delta = 0.0;
        for (std::size_t j = 0; j < traj.samples.size(); ++j)
            delta = std::max(delta, std::abs(traj.samples[j].pz - fine.samples[j].pz));
        traj.halved_step_delta = delta;
    }
    return traj;
}

} // namespace qfluor

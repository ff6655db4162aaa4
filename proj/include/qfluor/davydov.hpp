// davydov.hpp: multi-D1 variational dynamics (Dirac-Frenkel), observables and deviation

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qfluor/linalg.hpp"
#include "qfluor/model.hpp"

namespace qfluor {

// |D_M> = sum_n A_n |+>|f_n> + B_n |->|g_n>, Bargmann coherent states, |+-> eigenstates of sx.
// The same layout is used for time derivatives (time is then ignored).
struct DavydovState {
    int m{0};
    Eigen::VectorXcd amp_plus;   // A_n
    Eigen::VectorXcd amp_minus;  // B_n
    Eigen::MatrixXcd disp_plus;  // f_nk, M x N_b
    Eigen::MatrixXcd disp_minus; // g_nk, M x N_b
    double time{0.0};

    int n_modes() const { return static_cast<int>(disp_plus.cols()); }
    bool all_finite() const;
    // In-place a += c * b for parameters (used by RK4 stages).
    DavydovState axpy(cplx c, const DavydovState& b) const;
};

using DavydovRates = DavydovState;

// M dy/dt = rhs. The (A,f) and (B,g) unknowns decouple exactly, so the system is kept as two
// blocks of size M(N_b+1): block 0 is (A_1..A_M, f_11..f_MNb), block 1 is (B.., g..).
// full_matrix()/full_rhs() give the combined 2M(N_b+1) system in the order
// (A_1..A_M, B_1..B_M, f_11..f_MNb, g_11..g_MNb), displacements row-major.
struct EomSystem {
    int m{0};
    int n_modes{0};
    std::array<linalg::LinearBlock, 2> blocks;
    // Multiplying block rows by these weights (1 on amplitude rows, conj(A_l) resp. conj(B_l) on
    // the displacement rows of copy l) turns each block into the Hermitian Gram matrix.
    std::array<Eigen::VectorXcd, 2> row_weights;

    int dimension() const { return 2 * m * (n_modes + 1); }
    int index_a(int n) const { return n; }
    int index_b(int n) const { return m + n; }
    int index_f(int n, int k) const { return 2 * m + n * n_modes + k; }
    int index_g(int n, int k) const { return 2 * m + m * n_modes + n * n_modes + k; }
    Eigen::MatrixXcd full_matrix() const;
    Eigen::VectorXcd full_rhs() const;
};

struct DeviationReport {
    double sigma2{0.0};
    double dd{0.0};    // <Ddot|Ddot>
    double dh2d{0.0};  // <D|H^2|D>
    double im_dhd{0.0}; // Im <Ddot|H|D>
};

enum class EomSolver {
    tikhonov,  // (G + eps I) x = w.b on the Gram form, eps = cutoff * lambda_max(G)
    truncated, // SVD least squares discarding sigma < cutoff * sigma_max
};

struct DavydovOptions {
    double svd_cutoff{1e-10};
    EomSolver solver{EomSolver::tikhonov};
    double noise{1e-8};       // displacement seed on copies n > 1
    std::uint64_t seed{20240101};
    double norm_tolerance{1e-6};
    bool compute_deviation{true};
    bool halved_step_check{false}; // rerun at dt/2 and report the P_z difference

    bool operator==(const DavydovOptions&) const = default;
};

struct DavydovSample {
    double t{0.0};
    double pz{0.0};
    double norm{0.0};
    double sigma2{0.0};
    Eigen::VectorXd photons;
};

struct DavydovTrajectory {
    std::vector<DavydovSample> samples;
    std::vector<std::string> warnings;
    double max_norm_error{0.0};
    double min_photon{0.0};
    double max_imag{0.0};            // largest imaginary residue of a real observable
    double halved_step_delta{-1.0};  // max |P_z(dt) - P_z(dt/2)|, -1 when not run
    std::uint64_t seed{0};
};

// Initial factorized state with the reservoir in vacuum; copies n > 1 carry zero amplitude and
// uniform displacement noise of size opts.noise in each real/imaginary component.
DavydovState init_state(const ModelConfig& cfg, const DiscretizedBath& bath,
                        const DavydovOptions& opts = {});

// exp(sum_k conj(left_k) right_k)
cplx coherent_overlap(const Eigen::VectorXcd& left, const Eigen::VectorXcd& right);

// S_ln = exp(sum_k conj(a_lk) b_nk) for all l, n.
Eigen::MatrixXcd overlap_matrix(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

EomSystem assemble_eom(const DavydovState& state, double t, const DiscretizedBath& bath,
                       const ModelConfig& cfg);

// Regularized least-squares solution in the full_matrix() ordering. The truncated variant is the
// plain minimum-norm SVD solve. Tikhonov filters small singular directions smoothly, so RK4
// stages stay consistent when a singular value drifts across the cutoff.
Eigen::VectorXcd solve_eom(const EomSystem& system, double svd_cutoff,
                           EomSolver solver = EomSolver::tikhonov,
                           linalg::LstsqInfo* info = nullptr);

// Unpacks a full-ordering vector into parameter rates.
DavydovRates unpack_rates(const EomSystem& system, const Eigen::VectorXcd& ydot);

// assemble + solve + unpack
DavydovRates compute_rates(const DavydovState& state, double t, const DiscretizedBath& bath,
                           const ModelConfig& cfg, double svd_cutoff,
                           EomSolver solver = EomSolver::tikhonov);

// Classical RK4. k1 may be supplied when the rates at (state, t) are already known.
DavydovState step_rk4(const DavydovState& state, double t, double dt, const DiscretizedBath& bath,
                      const ModelConfig& cfg, double svd_cutoff,
                      const DavydovRates* k1 = nullptr, EomSolver solver = EomSolver::tikhonov);

double photon_number(const DavydovState& state, int k);
Eigen::VectorXd photon_numbers(const DavydovState& state);
double population_difference(const DavydovState& state);
double norm(const DavydovState& state);

// Complex-valued variants used for the hermiticity checks.
Eigen::VectorXcd photon_numbers_complex(const DavydovState& state);
cplx population_difference_complex(const DavydovState& state);

DeviationReport deviation(const DavydovState& state, const DavydovRates& rates, double t,
                          const ModelConfig& cfg, const DiscretizedBath& bath);

// Fixed-step RK4 from the state's time to cfg.t_final; sample_times must lie on the step grid.
DavydovTrajectory evolve(const DavydovState& initial, const ModelConfig& cfg,
                         const DiscretizedBath& bath, const std::vector<double>& sample_times,
                         const DavydovOptions& opts = {});

// Uniform sample grid 0, stride*dt, ... up to t_final (t_final always included).
std::vector<double> uniform_samples(const ModelConfig& cfg, int stride);

} // namespace qfluor

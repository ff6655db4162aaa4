// master_eq.hpp: second-order time-local master equations (full coupling and RWA) in the Floquet
// frame, non-Markovian regression for the two-time correlator, and the photon-number double integral

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qfluor/floquet.hpp"

namespace qfluor {

enum class Coupling {
    full, // sx coupling, correlator <sx(t1) sx(t2)>
    rwa,  // rotating-wave coupling, correlator <s+(t1) s-(t2)>
};

const char* coupling_name(Coupling c);

struct TlmeOptions {
    double dt_corr{0.1};
    int n_max{40};
    bool inhomogeneous{true}; // ablation switch for the regression source term
    int threads{0};           // 0: thread_count()

    bool operator==(const TlmeOptions&) const = default;
};

// Everything shared read-only between the rho propagation and the anchors: Floquet basis,
// operator harmonics and the Gamma table on the dt/2 grid.
struct TlmeContext {
    ModelConfig cfg;
    Coupling coupling{Coupling::full};
    TlmeOptions opts;
    FloquetBasis basis;
    FloquetOperator left_op;  // sx (full) or s+ (rwa): outer operator of the first commutator
    FloquetOperator right_op; // sx or s-: outer operator of the second commutator
    FloquetOperator kernel_op; // sx or s-: operator carried along the memory integral
    FloquetOperator readout;  // sx or s+: correlator = Tr[readout Lambda]
    FloquetOperator source;   // sx or s-: Lambda(t', t') = source rho(t')
    std::vector<int> harmonics; // kernel_op harmonics above 1e-13
    GammaKernel gamma;
    // omega index of Delta_{mu nu} + k wx for harmonics[i]: gamma_index[i][2 mu + nu]
    std::vector<std::array<int, 4>> gamma_index;

    long steps() const;
    double dt() const { return cfg.dt; }
};

TlmeContext make_tlme_context(const ModelConfig& cfg, Coupling coupling, const TlmeOptions& opts = {});

// Y(t; a, b)_{mu nu} = int_a^b C(tau) <u_mu(t)| O(t, t - tau) |u_nu(t)> dtau with O = kernel_op,
// a and b on the dt/2 grid.
Mat2 memory_integral(const TlmeContext& ctx, double t, double a, double b);

struct RhoTrajectory {
    double dt{0.0};
    std::vector<Mat2> floquet; // rho_{mu nu}(i dt)
    std::vector<Mat2> lab;     // same in the sigma_z basis
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
    double min_eigenvalue{1.0};
    std::vector<std::string> warnings;

    double time(std::size_t i) const { return dt * static_cast<double>(i); }
    double pz(std::size_t i) const { return (lab[i](0, 0) - lab[i](1, 1)).real(); }
};

RhoTrajectory evolve_rho(const TlmeContext& ctx);

// Lambda_{mu nu}(t, t') for t' = anchor_step dt, sampled every `stride` steps from t' up to
// t_final (the first sample is the initial condition).
std::vector<Mat2> evolve_lambda(const TlmeContext& ctx, const RhoTrajectory& rho, long anchor_step,
                                long stride);

// Correlator on the dt_corr grid; only t1 >= t2 is stored, the rest follows by conjugation.
struct CorrelatorGrid {
    double dt_corr{0.0};
    long size{0};
    std::vector<cplx> lower; // (i, j), i >= j, at i (i + 1) / 2 + j

    cplx at(long i, long j) const
    {
        return i >= j ? lower[static_cast<std::size_t>(i * (i + 1) / 2 + j)]
                      : std::conj(lower[static_cast<std::size_t>(j * (j + 1) / 2 + i)]);
    }
    double time(long i) const { return dt_corr * static_cast<double>(i); }
};

CorrelatorGrid correlator_grid(const TlmeContext& ctx, const RhoTrajectory& rho);

// N(w_k, t) over (times x modes).
struct SpectrumFrame {
    std::string method;
    std::vector<double> omegas;
    std::vector<double> times;
    Eigen::MatrixXd values;
    double max_imag{0.0};
    double min_value{0.0};

    // index of the mode nearest to w
    int mode_index(double w) const;
};

// Trapezoid on the correlator grid, accumulated incrementally in t. Requested times must be grid
// points.
SpectrumFrame spectrum_from_correlator(const CorrelatorGrid& grid, const DiscretizedBath& bath,
                                       const std::vector<double>& times, const std::string& method);

struct TlmeResult {
    RhoTrajectory rho;
    CorrelatorGrid grid;
    SpectrumFrame spectrum;
};

// rho + correlator + spectrum for either coupling; spectrum at every correlator grid point.
TlmeResult run_tlme(const ModelConfig& cfg, Coupling coupling, const DiscretizedBath& bath,
                    const TlmeOptions& opts = {});

// RWA variant of run_tlme.
inline TlmeResult evolve_rwa(const ModelConfig& cfg, const DiscretizedBath& bath, const TlmeOptions& opts = {})
{
    return run_tlme(cfg, Coupling::rwa, bath, opts);
}

} // namespace qfluor

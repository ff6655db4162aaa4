// heom.hpp: zero-temperature hierarchical equations of motion with an OEDF fit of the bath
// correlation function (cos / sin times exp(-gamma t) terms, separate for real and imaginary part)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfluor/model.hpp"

namespace qfluor {

// sum_n a_{2n-1} cos(w_n t) e^{-g_n t} + a_{2n} sin(w_n t) e^{-g_n t}
struct OedfTerms {
    std::vector<double> amplitudes; // 2N, interleaved cos / sin
    std::vector<double> omegas;     // N
    std::vector<double> gammas;     // N, > 0
    double residual{0.0};           // relative L2 over the fit window

    int size() const { return static_cast<int>(omegas.size()); }
    double operator()(double t) const;
    // phi_s(t) for slot s in [0, 2N)
    double basis(int s, double t) const;
};

struct OedfFit {
    OedfTerms real; // C_R
    OedfTerms imag; // C_I
    double t_fit{0.0};
    std::uint64_t seed{0};

    cplx operator()(double t) const { return {real(t), imag(t)}; }
    double residual() const { return std::max(real.residual, imag.residual); }
    std::string describe() const; // structured text dump
};

struct FitOptions {
    int samples{3001};
    int starts{12};            // random restarts per ladder rung on top of the warm start
    double threshold{2e-2};    // acceptable relative residual
    std::uint64_t seed{7};
    bool require_threshold{true};

    bool operator==(const FitOptions&) const = default;
};

// Least-squares OEDF fits of bath_correlation_heom on [0, t_fit]. Each part is refined along the
// ladder 1, 2, ..., N terms, every rung warm-started from the previous one, so a larger N never
// yields a larger residual. Throws NumericalError when the residual stays above the threshold.
OedfFit fit_correlation(const ModelConfig& cfg, double t_fit, int n_real, int n_imag, const FitOptions& opts = {});

// One auxiliary index vector per node; slots [0, 2N_R) are real-part terms, the rest imaginary.
struct Hierarchy {
    int slots_real{0};
    int slots_imag{0};
    int depth{0};
    std::vector<std::vector<std::uint8_t>> index; // node -> occupation vector
    // couplings in the rescaled representation rho~_n = rho_n prod_s c_s^{j_s} / sqrt(j_s!)
    struct Link {
        int node;
        cplx coef;
        enum Kind : std::uint8_t { commutator, anticommutator, plain } kind;
    };
    std::vector<std::vector<Link>> links; // node -> terms on its right-hand side
    std::vector<double> damping;          // node -> sum_s j_s eta_ss (diagonal eta part)

    std::size_t size() const { return index.size(); }
    int find(const std::vector<std::uint8_t>& idx) const;
};

Hierarchy build_hierarchy(const OedfFit& fit, int depth);

struct HeomOptions {
    double t_fit{30.0};
    int n_real{4};
    int n_imag{4};
    int depth{6};
    bool depth_check{true}; // rerun at depth + 1 and report the P_z change
    double divergence_limit{1e6};
    FitOptions fit;
    int threads{0};

    bool operator==(const HeomOptions&) const = default;
};

struct HeomTrajectory {
    std::vector<double> t;
    std::vector<double> pz;
    std::vector<Mat2> rho;
    OedfFit fit;
    int depth{0};
    std::size_t nodes{0};
    double depth_delta{-1.0}; // max |P_z(depth) - P_z(depth + 1)|, -1 if not checked
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
};

// RK4 at cfg.dt, physical state sampled every `stride` steps.
HeomTrajectory evolve_heom(const ModelConfig& cfg, const OedfFit& fit, int depth, int stride = 1,
                           double divergence_limit = 1e6, int threads = 0);

// fit + evolve (+ depth check) with the given options
HeomTrajectory run_heom(const ModelConfig& cfg, const HeomOptions& opts, int stride = 1);

} // namespace qfluor

// floquet.hpp: Floquet states of the driven qubit, operator Fourier elements, Gamma kernel

#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "qfluor/model.hpp"

namespace qfluor {

// u_g(t) = sum_n exp(i n wx t) u_g^(n), quasienergies folded into [-wx/2, wx/2).
struct FloquetBasis {
    double omega_x{1.0};
    int n_max{0};
    std::array<double, 2> quasienergies{};
    // fourier[g] is 2 x (2 n_max + 1); column j holds u_g^(j - n_max) in the sigma_z basis.
    std::array<Eigen::MatrixXcd, 2> fourier;

    Vec2 state(int g, double t) const;
    // Columns are u_1(t), u_2(t) in the sigma_z basis.
    Mat2 frame(double t) const;
    // U_S(t) = sum_g |u_g(t)><u_g(0)| exp(-i eps_g t)
    Mat2 propagator(double t) const;
    double delta(int mu, int nu) const { return quasienergies[mu] - quasienergies[nu]; }

    // sigma_z-basis operator <-> Floquet components at time t
    Mat2 to_floquet(const Mat2& op, double t) const;
    Mat2 from_floquet(const Mat2& op, double t) const;
};

// O_{mu nu}(t) = <u_mu(t)|O|u_nu(t)> = sum_k O_{mu nu,k} exp(i k wx t)
struct FloquetOperator {
    double omega_x{1.0};
    int k_max{0};
    std::vector<Mat2> harmonics; // index k + k_max
    std::array<double, 2> quasienergies{};

    const Mat2& at_harmonic(int k) const { return harmonics[k + k_max]; }
    Mat2 at(double t) const;
    double delta(int mu, int nu) const { return quasienergies[mu] - quasienergies[nu]; }
    // Delta_{mu nu,k} = Delta_{mu nu} + k wx
    double delta_shift(int mu, int nu, int k) const { return delta(mu, nu) + k * omega_x; }
    // Harmonics with any entry above the threshold; the rest are skipped in kernel sums.
    std::vector<int> significant(double threshold = 1e-13) const;
    void write_csv(std::ostream& os) const;
};

using SigmaXElements = FloquetOperator;

// Sambe-space diagonalization. Throws NumericalError when the quasienergies move by more than
// 1e-8 max(wx, |eps|) under n_max -> n_max + 4.
FloquetBasis compute_floquet_basis(const ModelConfig& cfg, int n_max = 40);

// Reorders next so each label has maximal overlap with the same label of prev.
FloquetBasis track_labels(const FloquetBasis& prev, const FloquetBasis& next);

FloquetOperator operator_elements(const FloquetBasis& basis, const Mat2& op);
FloquetOperator sigma_x_elements(const FloquetBasis& basis);

// G_w(tau_j) = int_0^{tau_j} C(tau) exp(-i w tau) dtau on a uniform grid tau_j = j h, for a
// fixed set of frequencies. Trapezoid with the h^2/12 endpoint-derivative correction; the
// cumulative table makes Gamma(w, t, t') = G_w(t) - G_w(t') additive by construction.
class GammaKernel {
public:
    GammaKernel() = default;
    GammaKernel(const ModelConfig& cfg, double h, double tau_max, std::vector<double> omegas);

    double step() const { return h_; }
    double tau_max() const { return h_ * (n_ - 1); }
    const std::vector<double>& omegas() const { return omegas_; }
    // Index of a registered frequency (exact match up to 1e-12).
    int index_of(double omega) const;
    // Cumulative integral at grid point j.
    cplx cumulative(int w_index, long j) const { return table_[static_cast<std::size_t>(w_index) * n_ + j]; }
    // Gamma(w, t, t') with t, t' on the grid (t >= t').
    cplx gamma(int w_index, double t, double t_prime) const;
    long grid_index(double t) const;

private:
    double h_{0.0};
    long n_{0};
    std::vector<double> omegas_;
    std::vector<cplx> table_;
};

// Standalone Gamma(w, t, t') = int_{t'}^{t} C(tau) exp(-i w tau) dtau using the corrected
// trapezoid with spacing close to h.
cplx gamma(double omega, double t, double t_prime, const ModelConfig& cfg, double h);

} // namespace qfluor

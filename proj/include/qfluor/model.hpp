// model.hpp: driven qubit + Ohmic reservoir, bath discretization, correlation functions

#pragma once

#include <iosfwd>
#include <vector>

#include "qfluor/types.hpp"

namespace qfluor {

enum class InitialQubit { ground, excited, bloch };

struct InitialState {
    InitialQubit kind{InitialQubit::ground};
    double theta{0.0}; // polar angle from the excited state (bloch only)
    double phi{0.0};   // azimuth (bloch only)

    // Amplitudes (c_e, c_g) in the sigma_z basis ordered (|e>, |g>).
    Vec2 amplitudes() const;
    bool operator==(const InitialState&) const = default;
};

// Physical and basic numerical parameters. Frequencies are in units of omega0.
struct ModelConfig {
    double omega0{1.0};   // qubit transition frequency
    double rabi{0.5};     // drive amplitude Omega
    double omega_x{1.0};  // drive frequency
    double alpha{0.01};   // dimensionless Ohmic coupling
    double omega_c{5.0};  // hard cutoff
    int n_modes{60};      // N_b
    InitialState initial{};
    double t_final{20.0};
    double dt{0.01};
    int multiplicity{4};  // M

    // Throws ConfigError when an invariant is violated.
    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

struct DiscretizedBath {
    std::vector<double> omegas;
    std::vector<double> couplings;

    std::size_t size() const { return omegas.size(); }
    // Two-column CSV dump: omega,lambda
    void write_csv(std::ostream& os) const;
};

// J(w) = 2 alpha w Theta(w_c - w), closed at w = w_c.
double spectral_density(double omega, const ModelConfig& cfg);

// Linear discretization of [0, w_c] into n_modes bins; closed-form moments.
DiscretizedBath discretize_bath(const ModelConfig& cfg);

// (1/4) int_0^inf J(w) exp(-i w tau) dw
cplx bath_correlation_tlme(double tau, const ModelConfig& cfg);

// int_0^inf J(w) exp(-i w t) dw  (zero temperature), equals 4x the above.
cplx bath_correlation_heom(double t, const ModelConfig& cfg);

// d/dtau of bath_correlation_tlme.
cplx bath_correlation_tlme_derivative(double tau, const ModelConfig& cfg);

// H_S(t) = (w0/2) sz + Omega cos(wx t) sx, sigma_z basis (|e>, |g>).
Mat2 qubit_hamiltonian(double t, const ModelConfig& cfg);

// Pauli matrices and the two basis conventions.
//   sigma_z basis: (|e>, |g>), sz = diag(1, -1)
//   sigma_x basis: (|+>, |->), the eigenbasis used by the Davydov ansatz
namespace pauli {
Mat2 identity();
Mat2 sx();
Mat2 sy();
Mat2 sz();
Mat2 sp(); // sigma_+ = |e><g|
Mat2 sm(); // sigma_- = |g><e|
// Columns are |+> and |-> expressed in the sigma_z basis.
Mat2 z_to_x_basis();
} // namespace pauli

} // namespace qfluor

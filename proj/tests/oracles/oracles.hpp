// Independent reference solutions used by the unit and acceptance tests. None of these go
// through the library's integrators, Floquet machinery or quadrature tables.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "qfluor/model.hpp"

namespace oracle {

using qfluor::cplx;
using qfluor::Mat2;
using qfluor::Vec2;

// Dense 2x2 propagator U(t) of H_S, adaptive Dormand-Prince at tight tolerance. State is kept
// as 8 reals (column-major U).
class TwoLevel {
public:
    explicit TwoLevel(const qfluor::ModelConfig& cfg) : cfg_(cfg) {}

    Mat2 propagator(double t) const
    {
        using namespace boost::numeric::odeint;
        std::vector<double> y{1, 0, 0, 0, 0, 0, 1, 0};
        if (t <= 0.0) return unpack(y);
        auto rhs = [&](const std::vector<double>& x, std::vector<double>& dx, double s) {
            const Mat2 u = unpack(x);
            const Mat2 h = qfluor::qubit_hamiltonian(s, cfg_);
            pack(Mat2(cplx(0, -1) * h * u), dx);
        };
        integrate_adaptive(make_controlled<runge_kutta_dopri5<std::vector<double>>>(1e-13, 1e-13), rhs, y, 0.0, t,
                           1e-3);
        return unpack(y);
    }

    // P_z(t) for the configured initial state
    double pz(double t) const
    {
        const Vec2 c = cfg_.initial.amplitudes();
        const Vec2 psi = propagator(t) * c;
        return std::norm(psi(0)) - std::norm(psi(1));
    }

    // <sx(t1) sx(t2)> in the Heisenberg picture for the initial state, t1 >= t2
    cplx sxsx(double t1, double t2) const
    {
        const Mat2 u1 = propagator(t1), u2 = propagator(t2);
        const Mat2 sx = qfluor::pauli::sx();
        const Vec2 c = cfg_.initial.amplitudes();
        const Mat2 a = u1.adjoint() * sx * u1, b = u2.adjoint() * sx * u2;
        return (c.adjoint() * a * b * c)(0, 0);
    }

private:
    static Mat2 unpack(const std::vector<double>& x)
    {
        Mat2 u;
        for (int i = 0; i < 4; ++i) u(i % 2, i / 2) = cplx(x[2 * i], x[2 * i + 1]);
        return u;
    }
    static void pack(const Mat2& u, std::vector<double>& x)
    {
        x.resize(8);
        for (int i = 0; i < 4; ++i) {
            x[2 * i] = u(i % 2, i / 2).real();
            x[2 * i + 1] = u(i % 2, i / 2).imag();
        }
    }
    qfluor::ModelConfig cfg_;
};

// Adaptive Gauss-Kronrod of f over [a, b], subdividing into unit pieces so oscillations are resolved.
inline cplx integrate(const std::function<cplx(double)>& f, double a, double b)
{
    using boost::math::quadrature::gauss_kronrod;
    cplx acc = 0.0;
    const int pieces = std::max(1, static_cast<int>(std::ceil(b - a)));
    const double w = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double lo = a + p * w, hi = lo + w;
        const double re = gauss_kronrod<double, 31>::integrate([&](double x) { return f(x).real(); }, lo, hi, 15, 1e-14);
        const double im = gauss_kronrod<double, 31>::integrate([&](double x) { return f(x).imag(); }, lo, hi, 15, 1e-14);
        acc += cplx(re, im);
    }
    return acc;
}

// Gamma(w, t, t') by adaptive quadrature of the closed-form C(tau)
inline cplx gamma(double w, double t, double tp, const qfluor::ModelConfig& cfg)
{
    return integrate([&](double tau) { return qfluor::bath_correlation_tlme(tau, cfg) * std::polar(1.0, -w * tau); }, tp, t);
}

// Quasienergies from the eigenphases of the one-period propagator, folded to [-wx/2, wx/2)
inline std::vector<double> monodromy_quasienergies(const qfluor::ModelConfig& cfg)
{
    const double period = 2.0 * M_PI / cfg.omega_x;
    const Mat2 u = TwoLevel(cfg).propagator(period);
    Eigen::ComplexEigenSolver<Mat2> es(u);
    std::vector<double> out;
    for (int i = 0; i < 2; ++i) {
        double e = -std::arg(es.eigenvalues()(i)) / period;
        e -= cfg.omega_x * std::floor(e / cfg.omega_x + 0.5);
        out.push_back(e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Second-order time-local master equation written directly in the sigma_z basis:
//   drho/dt = -i[H_S, rho] - [sx, Y rho] + [sx, rho Y^dag],
//   Y(t) = int_0^t C(tau) U(t, t - tau) sx U(t, t - tau)^dag dtau,
// with U(t, s) = U(t) U(s)^dag from the dense propagator, memory integral by trapezoid on a
// fine grid. RK4 at step dt. Returns P_z at every step.
inline std::vector<double> tcl_pz(const qfluor::ModelConfig& cfg, double dt, int quad_per_step = 4)
{
    const long steps = std::lround(cfg.t_final / dt);
    const double h = dt / (2 * quad_per_step); // memory grid resolves the half steps
    const long ngrid = 2 * quad_per_step * steps + 1;
    // propagators on the memory grid, stepped with the dense integrator from grid point to grid point
    std::vector<Mat2> u(ngrid);
    u[0] = Mat2::Identity();
    {
        using namespace boost::numeric::odeint;
        std::vector<double> y{1, 0, 0, 0, 0, 0, 1, 0};
        auto rhs = [&](const std::vector<double>& x, std::vector<double>& dx, double s) {
            Mat2 m;
            for (int i = 0; i < 4; ++i) m(i % 2, i / 2) = cplx(x[2 * i], x[2 * i + 1]);
            const Mat2 d = cplx(0, -1) * qfluor::qubit_hamiltonian(s, cfg) * m;
            dx.resize(8);
            for (int i = 0; i < 4; ++i) {
                dx[2 * i] = d(i % 2, i / 2).real();
                dx[2 * i + 1] = d(i % 2, i / 2).imag();
            }
        };
        auto stepper = make_controlled<runge_kutta_dopri5<std::vector<double>>>(1e-13, 1e-13);
        for (long g = 1; g < ngrid; ++g) {
            integrate_adaptive(stepper, rhs, y, (g - 1) * h, g * h, h);
            for (int i = 0; i < 4; ++i) u[g](i % 2, i / 2) = cplx(y[2 * i], y[2 * i + 1]);
        }
    }
    std::vector<cplx> corr(ngrid);
    for (long g = 0; g < ngrid; ++g) corr[g] = qfluor::bath_correlation_tlme(g * h, cfg);
    const Mat2 sx = qfluor::pauli::sx();

    auto memory = [&](long g) {
        Mat2 y = Mat2::Zero();
        for (long j = 0; j <= g; ++j) {
            const Mat2 uts = u[g] * u[g - j].adjoint();
            const double w = (j == 0 || j == g) ? 0.5 : 1.0;
            y += w * h * corr[j] * (uts * sx * uts.adjoint());
        }
        return y;
    };
    auto rhs = [&](const Mat2& rho, long g) {
        const Mat2 hs = qfluor::qubit_hamiltonian(g * h, cfg);
        const Mat2 y = memory(g);
        const Mat2 yr = y * rho, ry = rho * y.adjoint();
        return Mat2(cplx(0, -1) * (hs * rho - rho * hs) - (sx * yr - yr * sx) + (sx * ry - ry * sx));
    };

    const Vec2 c = cfg.initial.amplitudes();
    Mat2 rho = c * c.adjoint();
    std::vector<double> pz{(rho(0, 0) - rho(1, 1)).real()};
    const long half = quad_per_step;
    for (long s = 0; s < steps; ++s) {
        const long g = 2 * half * s;
        const Mat2 k1 = rhs(rho, g);
        const Mat2 k2 = rhs(rho + 0.5 * dt * k1, g + half);
        const Mat2 k3 = rhs(rho + 0.5 * dt * k2, g + half);
        const Mat2 k4 = rhs(rho + dt * k3, g + 2 * half);
        rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        pz.push_back((rho(0, 0) - rho(1, 1)).real());
    }
    return pz;
}

// Exact dynamics of the qubit coupled to a few modes in a truncated Fock space (sigma_z basis,
// H = H_S(t) + sum_k w_k b_k^dag b_k + sx sum_k lambda_k / 2 (b_k + b_k^dag)). Returns P_z and
// photon numbers at t_final.
struct FockResult {
    double pz{0.0};
    std::vector<double> photons;
};

inline FockResult fock_dynamics(const qfluor::ModelConfig& cfg, const qfluor::DiscretizedBath& bath, int n_fock,
                                double t_final)
{
    const int nb = static_cast<int>(bath.size());
    long dim_b = 1;
    for (int k = 0; k < nb; ++k) dim_b *= n_fock;
    const long dim = 2 * dim_b;
    auto occ = [&](long s, int k) {
        for (int i = 0; i < k; ++i) s /= n_fock;
        return static_cast<int>(s % n_fock);
    };
    auto stride = [&](int k) {
        long p = 1;
        for (int i = 0; i < k; ++i) p *= n_fock;
        return p;
    };
    Eigen::MatrixXcd hb = Eigen::MatrixXcd::Zero(dim_b, dim_b), xb = Eigen::MatrixXcd::Zero(dim_b, dim_b);
    for (long s = 0; s < dim_b; ++s)
        for (int k = 0; k < nb; ++k) {
            const int n = occ(s, k);
            hb(s, s) += bath.omegas[k] * n;
            if (n + 1 < n_fock) {
                const long up = s + stride(k);
                const double a = 0.5 * bath.couplings[k] * std::sqrt(n + 1.0);
                xb(up, s) += a;
                xb(s, up) += a;
            }
        }
    const Eigen::MatrixXcd id_b = Eigen::MatrixXcd::Identity(dim_b, dim_b);
    auto kron = [&](const Mat2& q, const Eigen::MatrixXcd& b) {
        Eigen::MatrixXcd out(dim, dim);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.block(i * dim_b, j * dim_b, dim_b, dim_b) = q(i, j) * b;
        return out;
    };
    const Eigen::MatrixXcd h_static = kron(Mat2::Identity(), hb) + kron(qfluor::pauli::sx(), xb) +
                                      kron(0.5 * cfg.omega0 * qfluor::pauli::sz(), id_b);
    const Eigen::MatrixXcd h_drive = kron(qfluor::pauli::sx(), id_b);

    using State = std::vector<double>;
    State y(2 * dim, 0.0);
    const Vec2 c = cfg.initial.amplitudes();
    y[0] = c(0).real();
    y[1] = c(0).imag();
    y[2 * dim_b] = c(1).real();
    y[2 * dim_b + 1] = c(1).imag();
    auto rhs = [&](const State& x, State& dx, double t) {
        Eigen::Map<const Eigen::VectorXcd> psi(reinterpret_cast<const cplx*>(x.data()), dim);
        dx.resize(x.size());
        Eigen::Map<Eigen::VectorXcd> d(reinterpret_cast<cplx*>(dx.data()), dim);
        d = cplx(0, -1) * (h_static * psi + cfg.rabi * std::cos(cfg.omega_x * t) * (h_drive * psi));
    };
    using namespace boost::numeric::odeint;
    integrate_adaptive(make_controlled<runge_kutta_dopri5<State>>(1e-11, 1e-11), rhs, y, 0.0, t_final, 1e-3);

    Eigen::Map<const Eigen::VectorXcd> psi(reinterpret_cast<const cplx*>(y.data()), dim);
    FockResult r;
    r.pz = psi.head(dim_b).squaredNorm() - psi.tail(dim_b).squaredNorm();
    r.photons.assign(nb, 0.0);
    for (long q = 0; q < dim; ++q)
        for (int k = 0; k < nb; ++k) r.photons[k] += std::norm(psi(q)) * occ(q % dim_b, k);
    return r;
}

} // namespace oracle

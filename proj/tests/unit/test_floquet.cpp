#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qfluor/floquet.hpp"

using namespace qfluor;

namespace {

ModelConfig drive(double wx, double rabi)
{
    ModelConfig c;
    c.omega_x = wx;
    c.rabi = rabi;
    c.n_modes = 20;
    return c;
}

double fold(double e, double wx)
{
    double f = std::fmod(e + 0.5 * wx, wx);
    if (f < 0) f += wx;
    return f - 0.5 * wx;
}

} // namespace

TEST_CASE("propagator and quasienergies against direct time stepping")
{
    for (auto [wx, rabi] : {std::pair{1.0, 0.5}, std::pair{0.56, 1.0}, std::pair{1.0, 1.5}, std::pair{1.3, 0.2}}) {
        const auto cfg = drive(wx, rabi);
        const auto basis = compute_floquet_basis(cfg);
        const oracle::TwoLevel ref(cfg);
        for (double t : {0.0, 0.37, 2.0, 7.5, 19.9})
            CHECK((basis.propagator(t) - ref.propagator(t)).cwiseAbs().maxCoeff() < 1e-8);
        const auto eps = oracle::monodromy_quasienergies(cfg);
        std::vector<double> mine{basis.quasienergies[0], basis.quasienergies[1]};
        std::sort(mine.begin(), mine.end());
        for (int g = 0; g < 2; ++g) {
            // compare on the circle of circumference wx
            const double d = std::abs(fold(mine[g] - eps[g], wx));
            CHECK(d < 1e-8);
            CHECK(mine[g] >= -0.5 * wx);
            CHECK(mine[g] < 0.5 * wx);
        }
    }
}

TEST_CASE("Floquet modes are orthonormal and periodic")
{
    const auto cfg = drive(0.56, 1.0);
    const auto basis = compute_floquet_basis(cfg);
    const double period = 2 * M_PI / cfg.omega_x;
    for (double t : {0.0, 1.1, 3.3, 8.0}) {
        const Mat2 f = basis.frame(t);
        CHECK((f.adjoint() * f - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((basis.frame(t + period) - f).cwiseAbs().maxCoeff() < 1e-10);
        // each column solves the Floquet equation (H - i d/dt) u = eps u
        const double h = 1e-5;
        for (int g = 0; g < 2; ++g) {
            const Vec2 du = (basis.state(g, t + h) - basis.state(g, t - h)) / (2 * h);
            const Vec2 res = qubit_hamiltonian(t, cfg) * basis.state(g, t) - cplx(0, 1) * du -
                             basis.quasienergies[g] * basis.state(g, t);
            CHECK(res.norm() < 1e-7);
        }
    }
}

TEST_CASE("undriven qubit: quasienergies are +-w0/2")
{
    auto cfg = drive(1.5, 0.0);
    const auto basis = compute_floquet_basis(cfg);
    std::vector<double> e{basis.quasienergies[0], basis.quasienergies[1]};
    std::sort(e.begin(), e.end());
    CHECK(e[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(e[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sigma_x elements: hermitian and reconstruct the frame transform")
{
    const auto cfg = drive(1.0, 1.5);
    const auto basis = compute_floquet_basis(cfg);
    const auto x = sigma_x_elements(basis);
    CHECK(x.k_max >= 1);
    for (int k = -x.k_max; k <= x.k_max; ++k)
        CHECK((x.at_harmonic(k).adjoint() - x.at_harmonic(-k)).cwiseAbs().maxCoeff() < 1e-12);
    for (double t : {0.0, 0.9, 4.2}) {
        const Mat2 direct = basis.frame(t).adjoint() * pauli::sx() * basis.frame(t);
        CHECK((x.at(t) - direct).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((x.at(t) - x.at(t).adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((basis.to_floquet(pauli::sx(), t) - direct).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((basis.from_floquet(direct, t) - pauli::sx()).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto sig = x.significant();
    CHECK(!sig.empty());
    for (int k : sig) CHECK(std::abs(k) <= x.k_max);
}

TEST_CASE("label tracking restores the ordering of a swapped basis")
{
    const auto basis = compute_floquet_basis(drive(1.0, 0.5));
    FloquetBasis swapped = basis;
    std::swap(swapped.quasienergies[0], swapped.quasienergies[1]);
    std::swap(swapped.fourier[0], swapped.fourier[1]);
    const auto back = track_labels(basis, swapped);
    CHECK(back.quasienergies[0] == basis.quasienergies[0]);
    CHECK(back.quasienergies[1] == basis.quasienergies[1]);
}

TEST_CASE("Gamma kernel against adaptive quadrature")
{
    ModelConfig cfg = drive(1.0, 0.5);
    cfg.alpha = 0.1;
    const std::vector<double> ws{-1.3, 0.0, 0.5, 1.0, 2.7};
    const GammaKernel kern(cfg, 0.005, 12.0, ws);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const int wi = kern.index_of(ws[i]);
        REQUIRE(wi >= 0);
        for (auto [t, tp] : {std::pair{2.0, 0.0}, std::pair{7.5, 3.25}, std::pair{12.0, 0.5}}) {
            const cplx ref = oracle::gamma(ws[i], t, tp, cfg);
            CHECK(std::abs(kern.gamma(wi, t, tp) - ref) < 1e-6);
            CHECK(std::abs(gamma(ws[i], t, tp, cfg, 0.005) - ref) < 1e-6);
        }
        // additivity over an intermediate point
        const cplx whole = kern.gamma(wi, 9.0, 1.0);
        CHECK(std::abs(whole - kern.gamma(wi, 9.0, 4.0) - kern.gamma(wi, 4.0, 1.0)) < 1e-14);
        CHECK(std::abs(kern.gamma(wi, 3.0, 3.0)) == 0.0);
    }
}

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qfluor/davydov.hpp"

using namespace qfluor;

namespace {

ModelConfig small(double alpha, double rabi, int nb, int m, double t_final)
{
    ModelConfig c;
    c.alpha = alpha;
    c.rabi = rabi;
    c.n_modes = nb;
    c.multiplicity = m;
    c.t_final = t_final;
    return c;
}

DavydovTrajectory run(const ModelConfig& c, int stride = 10, DavydovOptions o = {})
{
    const auto bath = discretize_bath(c);
    return evolve(init_state(c, bath, o), c, bath, uniform_samples(c, stride), o);
}

} // namespace

TEST_CASE("initial states")
{
    ModelConfig c = small(0.1, 0.5, 5, 1, 1.0);
    const auto bath = discretize_bath(c);
    c.initial.kind = InitialQubit::excited;
    auto s = init_state(c, bath);
    CHECK(std::abs(s.amp_plus(0) - M_SQRT1_2) < 1e-15);
    CHECK(std::abs(s.amp_minus(0) - M_SQRT1_2) < 1e-15);
    CHECK(population_difference(s) == doctest::Approx(1.0).epsilon(1e-14));
    c.initial.kind = InitialQubit::ground;
    s = init_state(c, bath);
    CHECK(std::abs(s.amp_minus(0) + M_SQRT1_2) < 1e-15);
    CHECK(population_difference(s) == doctest::Approx(-1.0).epsilon(1e-14));
    for (int m : {1, 2, 4, 8}) {
        c.multiplicity = m;
        s = init_state(c, bath);
        CHECK(std::abs(norm(s) - 1.0) < 1e-10);
        CHECK(photon_numbers(s).cwiseAbs().maxCoeff() < 1e-14);
        if (m > 1) CHECK(s.disp_plus.row(1).cwiseAbs().maxCoeff() > 0.0);
    }
    DavydovState z = s;
    z.amp_plus.setZero();
    z.amp_minus.setZero();
    CHECK(norm(z) == 0.0);
}

TEST_CASE("coherent overlap")
{
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(3), b = Eigen::VectorXcd::Zero(3);
    CHECK(std::abs(coherent_overlap(a, b) - 1.0) < 1e-15);
    Eigen::VectorXcd c(1);
    c << cplx(0.3, -0.4);
    CHECK(std::abs(coherent_overlap(c, c) - std::exp(0.25)) < 1e-14);
    a << cplx(0.1, 0.2), cplx(-0.3, 0.05), cplx(0.0, 0.7);
    b << cplx(0.4, -0.1), cplx(0.2, 0.2), cplx(-0.5, 0.1);
    CHECK(std::abs(coherent_overlap(a, b) - std::conj(coherent_overlap(b, a))) < 1e-15);
    CHECK_THROWS(coherent_overlap(a, c));
}

TEST_CASE("equations of motion at t = 0")
{
    ModelConfig c = small(0.1, 0.5, 6, 1, 1.0);
    c.initial.kind = InitialQubit::excited;
    const auto bath = discretize_bath(c);
    const auto s = init_state(c, bath);
    const auto sys = assemble_eom(s, 0.0, bath, c);
    CHECK(sys.dimension() == 2 * 1 * (6 + 1));
    const auto r = unpack_rates(sys, solve_eom(sys, 1e-10, EomSolver::truncated));
    const cplx a = s.amp_plus(0), b = s.amp_minus(0);
    CHECK(std::abs(r.amp_plus(0) - (-I) * (0.5 * b + 0.5 * a)) < 1e-12);
    for (int p = 0; p < 6; ++p) {
        CHECK(std::abs(r.disp_plus(0, p) - (-I) * 0.5 * bath.couplings[p]) < 1e-12);
        CHECK(std::abs(r.disp_minus(0, p) - I * 0.5 * bath.couplings[p]) < 1e-12);
    }
    CHECK(sys.full_matrix().rows() == sys.dimension());
}

TEST_CASE("free precession rates")
{
    ModelConfig c = small(0.0, 0.0, 4, 1, 1.0);
    c.initial.kind = InitialQubit::bloch;
    c.initial.theta = 0.7;
    c.initial.phi = 0.3;
    const auto bath = discretize_bath(c);
    const auto s = init_state(c, bath);
    for (auto solver : {EomSolver::tikhonov, EomSolver::truncated}) {
        const auto r = compute_rates(s, 0.4, bath, c, 1e-10, solver);
        // the Tikhonov shift biases rates at the level of the cutoff
        CHECK(std::abs(r.amp_plus(0) + I * 0.5 * s.amp_minus(0)) < 1e-9);
        CHECK(std::abs(r.amp_minus(0) + I * 0.5 * s.amp_plus(0)) < 1e-9);
        CHECK(r.disp_plus.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(r.disp_minus.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("solve_eom on hand-built systems")
{
    EomSystem sys;
    sys.m = 1;
    sys.n_modes = 1;
    for (int b = 0; b < 2; ++b) {
        sys.blocks[b].matrix = Eigen::MatrixXcd::Identity(2, 2);
        sys.blocks[b].rhs = Eigen::VectorXcd::Random(2);
        sys.row_weights[b] = Eigen::VectorXcd::Ones(2);
    }
    for (auto solver : {EomSolver::tikhonov, EomSolver::truncated})
        CHECK((solve_eom(sys, 1e-12, solver) - sys.full_rhs()).norm() < 1e-10);

    // well-conditioned 2x2 against the closed-form inverse
    Eigen::Matrix2cd a;
    a << cplx(2, 1), cplx(0.5, -0.3), cplx(-0.2, 0.1), cplx(1.5, 0.4);
    Eigen::Vector2cd rhs(cplx(1, 2), cplx(-0.5, 0.3));
    const cplx det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    Eigen::Matrix2cd inv;
    inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
    inv /= det;
    const Eigen::Vector2cd x = linalg::lstsq(a, rhs, 1e-10);
    CHECK((x - inv * rhs).norm() < 1e-12);
    sys.blocks[0].matrix = a;
    sys.blocks[0].rhs = rhs;
    const auto full = solve_eom(sys, 1e-10, EomSolver::truncated);
    CHECK(std::abs(full(0) - (inv * rhs)(0)) < 1e-12); // A slot
    CHECK(std::abs(full(2) - (inv * rhs)(1)) < 1e-12); // f slot

    // Hermitian positive definite: the regularized solve agrees to cond * rcond
    Eigen::Matrix2cd g;
    g << 3.0, cplx(0.5, 0.2), cplx(0.5, -0.2), 2.0;
    const Eigen::Vector2cd xg = linalg::tikhonov_blocks({{g, rhs}}, 1e-12);
    CHECK((xg - g.inverse() * rhs).norm() < 1e-10);
}

TEST_CASE("rank-deficient system gives the minimum-norm least-squares solution")
{
    Eigen::MatrixXcd a(3, 3);
    a << 1.0, 2.0, cplx(0, 1), 1.0, 2.0, cplx(0, 1), cplx(0.5, 0.5), 0.0, 1.0; // duplicated row
    Eigen::VectorXcd b(3);
    b << 1.0, 2.0, cplx(0.0, 1.0);
    Eigen::VectorXcd x;
    CHECK_NOTHROW(x = linalg::lstsq(a, b, 1e-10));
    // brute-force normal equations: residual is minimal and x is orthogonal to the null space
    const Eigen::VectorXcd r = a * x - b;
    CHECK((a.adjoint() * r).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a);
    for (int i = 0; i < 3; ++i)
        if (std::abs(es.eigenvalues()(i)) < 1e-10) CHECK(std::abs(es.eigenvectors().col(i).dot(x)) < 1e-10);
    CHECK_THROWS(linalg::lstsq(Eigen::MatrixXcd::Zero(3, 3), b, 1e-10));
}

TEST_CASE("one RK4 step of free precession")
{
    ModelConfig c = small(0.0, 0.0, 3, 1, 1.0);
    c.initial.kind = InitialQubit::excited;
    const auto bath = discretize_bath(c);
    const auto s = init_state(c, bath);
    const double dt = 0.05;
    const auto s1 = step_rk4(s, 0.0, dt, bath, c, 1e-10);
    // A +- B rotate with exp(-+ i w0 dt / 2)
    const cplx sum = s1.amp_plus(0) + s1.amp_minus(0), diff = s1.amp_plus(0) - s1.amp_minus(0);
    CHECK(std::abs(sum - std::sqrt(2.0) * std::polar(1.0, -0.5 * dt)) < 1e-9);
    CHECK(std::abs(diff) < 1e-15);
}

TEST_CASE("zero-coupling dynamics match the dense two-level oracle for every M")
{
    for (auto [wx, rabi] : {std::pair{1.0, 0.5}, std::pair{0.56, 1.0}}) {
        for (int m : {1, 2, 3}) {
            ModelConfig c = small(0.0, rabi, 4, m, 10.0);
            c.omega_x = wx;
            const auto tr = run(c, 50);
            const oracle::TwoLevel ref(c);
            double err = 0.0;
            for (const auto& s : tr.samples) err = std::max(err, std::abs(s.pz - ref.pz(s.t)));
            CHECK(err < 1e-6);
        }
    }
}

TEST_CASE("RK4 global error scales as dt^4")
{
    ModelConfig c = small(0.0, 0.5, 2, 1, 10.0);
    const oracle::TwoLevel ref(c);
    const double exact = ref.pz(10.0);
    std::vector<double> err;
    for (double dt : {0.2, 0.1, 0.05}) {
        c.dt = dt;
        const auto tr = run(c, 1);
        err.push_back(std::abs(tr.samples.back().pz - exact));
    }
    for (int i = 0; i < 2; ++i) {
        const double ratio = err[i] / err[i + 1];
        CHECK(ratio > 8.0);
        CHECK(ratio < 32.0);
    }
}

TEST_CASE("undriven free qubit keeps P_z; t_final = 0 gives one sample")
{
    ModelConfig c = small(0.0, 0.0, 3, 2, 2.0);
    c.initial.kind = InitialQubit::excited;
    const auto tr = run(c, 20);
    for (const auto& s : tr.samples) {
        CHECK(std::abs(s.pz - 1.0) < 1e-10);
        CHECK(s.sigma2 < 1e-10);
        CHECK(s.sigma2 > -1e-12);
    }
    c.t_final = 0.0;
    const auto one = run(c, 20);
    REQUIRE(one.samples.size() == 1);
    CHECK(one.samples[0].pz == doctest::Approx(1.0));
    CHECK(one.samples[0].photons.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("weak coupling: invariants and agreement with the exact few-mode solution")
{
    ModelConfig c = small(0.02, 0.5, 2, 4, 6.0);
    const auto bath = discretize_bath(c);
    const auto tr = run(c, 20);
    // four copies over two modes is an overcomplete ansatz; the regularized solve drifts slightly
    CHECK(tr.max_norm_error < 1e-5);
    CHECK(tr.min_photon > -1e-10);
    CHECK(tr.max_imag < 1e-10);
    for (const auto& s : tr.samples) CHECK(s.sigma2 > -1e-12);
    const auto ex = oracle::fock_dynamics(c, bath, 6, c.t_final);
    CHECK(std::abs(tr.samples.back().pz - ex.pz) < 1e-4);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(tr.samples.back().photons(k) - ex.photons[k]) < 1e-4);
}

TEST_CASE("spontaneous decay from the excited state")
{
    // 30 modes keep the recurrence time 2 pi / d omega beyond t_final
    ModelConfig c = small(0.05, 0.0, 30, 2, 15.0);
    c.initial.kind = InitialQubit::excited;
    c.dt = 0.02;
    const auto tr = run(c, 125);
    // envelope: samples every 2.5 time units decrease and stay above -1
    for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].pz < tr.samples[i - 1].pz);
    CHECK(tr.samples.back().pz < 0.0);
    CHECK(tr.samples.back().pz > -1.0);
}

TEST_CASE("convergence in M at fixed N_b")
{
    ModelConfig c = small(0.01, 0.5, 10, 2, 5.0);
    const auto a = run(c, 50);
    c.multiplicity = 3;
    const auto b = run(c, 50);
    double d = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) d = std::max(d, std::abs(a.samples[i].pz - b.samples[i].pz));
    CHECK(d < 1e-3);
}

TEST_CASE("halved-step self-check and determinism")
{
    ModelConfig c = small(0.05, 0.5, 6, 2, 2.0);
    DavydovOptions o;
    o.halved_step_check = true;
    const auto a = run(c, 20, o);
    CHECK(a.halved_step_delta >= 0.0);
    CHECK(a.halved_step_delta < 1e-6);
    const auto b = run(c, 20, o);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].pz == b.samples[i].pz);
        CHECK((a.samples[i].photons - b.samples[i].photons).norm() == 0.0);
    }
}

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qfluor/heom.hpp"
#include "qfluor/master_eq.hpp"

using namespace qfluor;

namespace {

ModelConfig small(double alpha, double rabi, double t_final)
{
    ModelConfig c;
    c.alpha = alpha;
    c.rabi = rabi;
    c.n_modes = 20;
    c.t_final = t_final;
    c.dt = 0.01;
    return c;
}

FitOptions quick_fit()
{
    FitOptions o;
    o.samples = 1201;
    o.starts = 4;
    o.require_threshold = false;
    return o;
}

long binomial(int n, int k)
{
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

TEST_CASE("hierarchy size and index lookups")
{
    const auto cfg = small(0.1, 0.5, 1.0);
    const auto fit = fit_correlation(cfg, 12.0, 1, 1, quick_fit());
    CHECK(build_hierarchy(fit, 0).size() == 1);
    CHECK(build_hierarchy(fit, 1).size() == 5);
    for (int depth : {2, 3, 4}) {
        const auto h = build_hierarchy(fit, depth);
        CHECK(static_cast<long>(h.size()) == binomial(4 + depth, depth));
        for (std::size_t n = 0; n < h.size(); ++n) {
            CHECK(h.find(h.index[n]) == static_cast<int>(n));
            int tier = 0;
            for (auto j : h.index[n]) tier += j;
            CHECK(tier <= depth);
            // links reach at most one tier up or down
            for (const auto& l : h.links[n]) {
                int lt = 0;
                for (auto j : h.index[l.node]) lt += j;
                CHECK(std::abs(lt - tier) <= 1);
            }
        }
    }
    CHECK_THROWS_AS(build_hierarchy(fit, -1), ConfigError);
}

TEST_CASE("raising then lowering returns to the same node")
{
    const auto cfg = small(0.1, 0.5, 1.0);
    const auto h = build_hierarchy(fit_correlation(cfg, 12.0, 2, 1, quick_fit()), 3);
    for (std::size_t n = 0; n < h.size(); ++n)
        for (std::size_t s = 0; s < h.index[n].size(); ++s) {
            auto up = h.index[n];
            ++up[s];
            const int u = h.find(up);
            int tier = 0;
            for (auto j : up) tier += j;
            if (tier > h.depth) {
                CHECK(u < 0);
                continue;
            }
            REQUIRE(u >= 0);
            auto down = h.index[u];
            --down[s];
            CHECK(h.find(down) == static_cast<int>(n));
        }
}

TEST_CASE("fit quality: monotone in the term count and exact at t = 0")
{
    const auto cfg = small(0.1, 0.5, 1.0);
    double prev_r = 1e9, prev_i = 1e9;
    for (int n = 1; n <= 4; ++n) {
        const auto fit = fit_correlation(cfg, 30.0, n, n, quick_fit());
        CHECK(fit.real.residual <= prev_r * (1 + 1e-9));
        CHECK(fit.imag.residual <= prev_i * (1 + 1e-9));
        prev_r = fit.real.residual;
        prev_i = fit.imag.residual;
        for (double g : fit.real.gammas) CHECK(g > 0.0);
        for (double w : fit.real.omegas) CHECK(w >= 0.0);
        if (n == 4) {
            // C_R(0) = int J = alpha wc^2, C_I(0) = 0
            CHECK(fit(0.0).real() == doctest::Approx(cfg.alpha * 25.0).epsilon(0.03));
            CHECK(std::abs(fit(0.0).imag()) < 0.05 * cfg.alpha * 25.0);
            CHECK(fit.residual() < 2e-2);
        }
    }
    // linear in alpha
    const auto a = fit_correlation(cfg, 30.0, 3, 3, quick_fit());
    auto c2 = cfg;
    c2.alpha = 0.05;
    const auto b = fit_correlation(c2, 30.0, 3, 3, quick_fit());
    for (double t : {0.0, 0.4, 3.0, 11.0}) CHECK(std::abs(a(t) - 2.0 * b(t)) < 1e-10 * (1 + std::abs(a(t))));
    CHECK_THROWS_AS(fit_correlation(cfg, 0.0, 2, 2), ConfigError);
    FitOptions strict = quick_fit();
    strict.require_threshold = true;
    strict.threshold = 1e-8;
    CHECK_THROWS_AS(fit_correlation(cfg, 30.0, 1, 1, strict), NumericalError);
}

TEST_CASE("zero coupling: hierarchy reduces to the closed two-level dynamics")
{
    auto cfg = small(0.0, 0.5, 8.0);
    HeomOptions o;
    o.t_fit = 12.0;
    o.n_real = o.n_imag = 2;
    o.depth = 2;
    o.depth_check = false;
    o.fit = quick_fit();
    const auto tr = run_heom(cfg, o, 10);
    const oracle::TwoLevel ref(cfg);
    for (std::size_t i = 0; i < tr.t.size(); ++i) CHECK(std::abs(tr.pz[i] - ref.pz(tr.t[i])) < 1e-8);
}

TEST_CASE("weak coupling agrees with the time-local master equation; invariants hold")
{
    auto cfg = small(0.01, 0.5, 10.0);
    HeomOptions o;
    o.depth = 2;
    o.depth_check = true;
    const auto tr = run_heom(cfg, o, 100);
    CHECK(tr.max_trace_error < 1e-10);
    CHECK(tr.max_hermiticity_error < 1e-10);
    CHECK(tr.depth_delta >= 0.0);
    CHECK(tr.depth_delta < 1e-3);
    for (const auto& r : tr.rho) CHECK(Eigen::SelfAdjointEigenSolver<Mat2>(0.5 * (r + r.adjoint())).eigenvalues().minCoeff() > -1e-4);
    const auto bath = discretize_bath(cfg);
    const auto rho = evolve_rho(make_tlme_context(cfg, Coupling::full));
    for (std::size_t i = 0; i < tr.t.size(); ++i) CHECK(std::abs(tr.pz[i] - rho.pz(i * 100)) < 2e-3);
    (void)bath;
}

TEST_CASE("divergence guard")
{
    auto cfg = small(0.1, 0.5, 2.0);
    const auto fit = fit_correlation(cfg, 12.0, 2, 2, quick_fit());
    CHECK_THROWS_AS(evolve_heom(cfg, fit, 2, 1, 1e-6), NumericalError);
    CHECK_THROWS_AS(evolve_heom(cfg, fit, 2, 0), ConfigError);
}

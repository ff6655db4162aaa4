// OEDF fit by variable projection: amplitudes are eliminated by linear least squares, the
// frequencies and log-rates go through Levenberg-Marquardt.

#include "qfluor/heom.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <tuple>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace qfluor {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double rate_of(double q) { return std::exp(std::clamp(q, -10.0, 5.0)); }

MatrixXd design(const VectorXd& p, const VectorXd& t)
{
    const int n = static_cast<int>(p.size() / 2);
    MatrixXd b(t.size(), 2 * n);
    for (int k = 0; k < n; ++k) {
        const double w = p(k), g = rate_of(p(n + k));
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double e = std::exp(-g * t(i));
            b(i, 2 * k) = std::cos(w * t(i)) * e;
            b(i, 2 * k + 1) = std::sin(w * t(i)) * e;
        }
    }
    return b;
}

VectorXd amplitudes(const MatrixXd& b, const VectorXd& y) { return b.colPivHouseholderQr().solve(y); }

struct Projected {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = VectorXd;
    using ValueType = VectorXd;
    using JacobianType = MatrixXd;

    const VectorXd* t;
    const VectorXd* y;
    int n_params;

    int inputs() const { return n_params; }
    int values() const { return static_cast<int>(t->size()); }
    int operator()(const VectorXd& p, VectorXd& r) const
    {
        const MatrixXd b = design(p, *t);
        r = b * amplitudes(b, *y) - *y;
        if (!r.allFinite()) r.setConstant(1e3 * y->norm() + 1.0);
        return 0;
    }
};

double objective(const VectorXd& p, const VectorXd& t, const VectorXd& y)
{
    Projected f{&t, &y, static_cast<int>(p.size())};
    VectorXd r;
    f(p, r);
    return r.norm();
}

VectorXd refine(VectorXd p, const VectorXd& t, const VectorXd& y)
{
    Projected f{&t, &y, static_cast<int>(p.size())};
    Eigen::NumericalDiff<Projected> nd(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Projected>> lm(nd);
    lm.parameters.maxfev = 400 * static_cast<int>(p.size());
    lm.parameters.xtol = 1e-10;
    lm.parameters.ftol = 1e-12;
    const VectorXd start = p;
    lm.minimize(p);
    // LM never accepts an uphill step, but guard against non-finite exits
    if (!p.allFinite() || objective(p, t, y) > objective(start, t, y)) return start;
    return p;
}

OedfTerms fit_part(const VectorXd& t, const VectorXd& y, int n_terms, double omega_c, double t_fit,
                   const FitOptions& opts, std::uint64_t stream)
{
    OedfTerms out;
    const double ynorm = y.norm();
    if (ynorm == 0.0) {
        out.amplitudes.assign(2 * n_terms, 0.0);
        for (int k = 0; k < n_terms; ++k) {
            out.omegas.push_back(omega_c * (k + 1) / n_terms);
            out.gammas.push_back(1.0);
        }
        return out;
    }
    std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ULL * stream);
    std::uniform_real_distribution<double> uw(0.0, 1.2 * omega_c), ug(std::log(0.05), std::log(3.0));
    const double g0 = std::log(std::max(omega_c / t_fit, 1e-3));

    VectorXd best; // params for the current rung, layout (w_1..w_n, q_1..q_n)
    for (int n = 1; n <= n_terms; ++n) {
        std::vector<VectorXd> starts;
        // warm start: previous rung plus one term near the next harmonic of the cutoff scale
        VectorXd warm(2 * n);
        for (int k = 0; k < n - 1; ++k) {
            warm(k) = best(k);
            warm(n + k) = best(n - 1 + k);
        }
        warm(n - 1) = omega_c * (n % 2 ? 1.0 : 0.5) * (1.0 + 0.1 * (n / 2));
        warm(2 * n - 1) = g0;
        starts.push_back(warm);
        for (int s = 0; s < opts.starts; ++s) {
            VectorXd p(2 * n);
            for (int k = 0; k < n; ++k) {
                p(k) = uw(rng);
                p(n + k) = ug(rng);
            }
            starts.push_back(p);
        }
        double best_val = std::numeric_limits<double>::infinity();
        VectorXd rung;
        for (const auto& s0 : starts) {
            const VectorXd p = refine(s0, t, y);
            const double v = objective(p, t, y);
            if (v < best_val) {
                best_val = v;
                rung = p;
            }
        }
        best = rung;
    }

    const MatrixXd b = design(best, t);
    const VectorXd c = amplitudes(b, y);
    out.residual = (b * c - y).norm() / ynorm;
    for (int k = 0; k < n_terms; ++k) {
        // cos is even and sin odd in omega, so the sign can be folded into the sin amplitude
        const double sign = best(k) < 0.0 ? -1.0 : 1.0;
        out.omegas.push_back(sign * best(k));
        out.gammas.push_back(rate_of(best(n_terms + k)));
        out.amplitudes.push_back(c(2 * k));
        out.amplitudes.push_back(sign * c(2 * k + 1));
    }
    return out;
}

// Fits depend on (omega_c, t_fit, N, options) only; amplitudes scale with alpha.
using CacheKey = std::tuple<double, double, int, int, int, int, std::uint64_t>;
std::mutex cache_mu;
std::map<CacheKey, std::pair<OedfTerms, OedfTerms>> cache;

} // namespace

double OedfTerms::basis(int s, double t) const
{
    const int k = s / 2;
    const double e = std::exp(-gammas[k] * t);
    return (s % 2 == 0 ? std::cos(omegas[k] * t) : std::sin(omegas[k] * t)) * e;
}

double OedfTerms::operator()(double t) const
{
    double acc = 0.0;
    for (int s = 0; s < 2 * size(); ++s) acc += amplitudes[s] * basis(s, t);
    return acc;
}

std::string OedfFit::describe() const
{
    std::ostringstream os;
    os << std::setprecision(12);
    os << "t_fit = " << t_fit << "\nseed = " << seed << '\n';
    for (int part = 0; part < 2; ++part) {
        const OedfTerms& x = part == 0 ? real : imag;
        const char* tag = part == 0 ? "R" : "I";
        os << "[" << tag << "]\nresidual = " << x.residual << "\nterms = " << x.size() << '\n';
        for (int k = 0; k < x.size(); ++k)
            os << "term " << k + 1 << ": a_cos = " << x.amplitudes[2 * k] << " a_sin = " << x.amplitudes[2 * k + 1]
               << " omega = " << x.omegas[k] << " gamma = " << x.gammas[k] << '\n';
    }
    return os.str();
}

OedfFit fit_correlation(const ModelConfig& cfg, double t_fit, int n_real, int n_imag, const FitOptions& opts)
{
    cfg.validate();
    if (!(t_fit > 0.0)) throw ConfigError("fit window must be positive");
    if (n_real < 1 || n_imag < 1) throw ConfigError("OEDF term counts must be >= 1");
    if (opts.samples < 4 * std::max(n_real, n_imag)) throw ConfigError("too few fit samples for the term count");

    OedfFit fit;
    fit.t_fit = t_fit;
    fit.seed = opts.seed;

    const CacheKey key{cfg.omega_c, t_fit, n_real, n_imag, opts.samples, opts.starts, opts.seed};
    std::pair<OedfTerms, OedfTerms> shape;
    bool hit = false;
    {
        std::lock_guard<std::mutex> lock(cache_mu);
        auto it = cache.find(key);
        if (it != cache.end()) {
            shape = it->second;
            hit = true;
        }
    }
    if (!hit) {
        // unit-alpha shape
        ModelConfig unit = cfg;
        unit.alpha = 1.0;
        VectorXd t(opts.samples), yr(opts.samples), yi(opts.samples);
        for (int i = 0; i < opts.samples; ++i) {
            t(i) = t_fit * i / (opts.samples - 1);
            const cplx c = bath_correlation_heom(t(i), unit);
            yr(i) = c.real();
            yi(i) = c.imag();
        }
        shape.first = fit_part(t, yr, n_real, cfg.omega_c, t_fit, opts, 1);
        shape.second = fit_part(t, yi, n_imag, cfg.omega_c, t_fit, opts, 2);
        std::lock_guard<std::mutex> lock(cache_mu);
        cache.emplace(key, shape);
    }
    fit.real = shape.first;
    fit.imag = shape.second;
    for (auto* x : {&fit.real, &fit.imag})
        for (double& a : x->amplitudes) a *= cfg.alpha;
    if (cfg.alpha == 0.0) fit.real.residual = fit.imag.residual = 0.0;

    if (opts.require_threshold && fit.residual() > opts.threshold) {
        std::ostringstream os;
        os << "OEDF fit residual " << fit.residual() << " (real " << fit.real.residual << ", imaginary "
           << fit.imag.residual << ") exceeds " << opts.threshold << " with N_R=" << n_real << ", N_I=" << n_imag
           << "; increase the term counts or shorten the fit window";
        throw NumericalError(os.str());
    }
    return fit;
}

} // namespace qfluor

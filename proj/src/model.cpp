#include "qfluor/model.hpp"

#include <cmath>
#include <ostream>
#include <iomanip>

namespace qfluor {

namespace {

constexpr double kSeriesThreshold = 1e-3;

// int_0^wc w^p exp(-i w tau) dw for p = 1 via Taylor series in (-i tau).
cplx first_moment_series(double tau, double wc)
{
    cplx sum{0.0, 0.0};
    cplx term{1.0, 0.0}; // (-i tau)^n / n!
    double wpow = wc * wc;
    for (int n = 0; n < 10; ++n) {
        sum += term * wpow / double(n + 2);
        term *= cplx(0.0, -tau) / double(n + 1);
        wpow *= wc;
    }
    return sum;
}

// Same for p = 2.
cplx second_moment_series(double tau, double wc)
{
    cplx sum{0.0, 0.0};
    cplx term{1.0, 0.0};
    double wpow = wc * wc * wc;
    for (int n = 0; n < 40; ++n) {
        sum += term * wpow / double(n + 3);
        term *= cplx(0.0, -tau) / double(n + 1);
        wpow *= wc;
    }
    return sum;
}

// int_0^wc w exp(-i w tau) dw
cplx first_moment(double tau, double wc)
{
    const double x = wc * tau;
    if (std::abs(x) < kSeriesThreshold) return first_moment_series(tau, wc);
    // real: (cos x + x sin x - 1)/tau^2, imag: (x cos x - sin x)/tau^2
    const double s = std::sin(x), c = std::cos(x), sh = std::sin(0.5 * x);
    const double re = x * s - 2.0 * sh * sh;
    const double im = x * c - s;
    return cplx(re, im) / (tau * tau);
}

// int_0^wc w^2 exp(-i w tau) dw
cplx second_moment(double tau, double wc)
{
    const double x = wc * tau;
    if (std::abs(x) < 1.0) return second_moment_series(tau, wc);
    // e^{s w}(w^2/s - 2w/s^2 + 2/s^3) |_0^wc with s = -i tau
    const cplx s(0.0, -tau);
    const cplx e = std::exp(s * wc);
    return e * (wc * wc / s - 2.0 * wc / (s * s) + 2.0 / (s * s * s)) - 2.0 / (s * s * s);
}

} // namespace

Vec2 InitialState::amplitudes() const
{
    switch (kind) {
    case InitialQubit::excited: return Vec2(1.0, 0.0);
    case InitialQubit::ground: return Vec2(0.0, 1.0);
    case InitialQubit::bloch:
        return Vec2(std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), phi));
    }
    throw ConfigError("unknown initial qubit state");
}

void ModelConfig::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be a positive finite number");
    };
    positive(omega0, "omega0");
    positive(omega_x, "omega_x");
    positive(omega_c, "omega_c");
    positive(dt, "dt");
    if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw ConfigError("rabi must be >= 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
    if (n_modes < 1) throw ConfigError("n_modes must be >= 1");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be >= 0");
    if (multiplicity < 1) throw ConfigError("multiplicity must be >= 1");
    if (initial.kind == InitialQubit::bloch &&
        (!std::isfinite(initial.theta) || !std::isfinite(initial.phi)))
        throw ConfigError("bloch angles must be finite");
}

void DiscretizedBath::write_csv(std::ostream& os) const
{
    os << "omega,lambda\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < size(); ++k) os << omegas[k] << ',' << couplings[k] << '\n';
}

double spectral_density(double omega, const ModelConfig& cfg)
{
    if (omega < 0.0) throw std::domain_error("spectral_density: negative frequency");
    return omega <= cfg.omega_c ? 2.0 * cfg.alpha * omega : 0.0;
}

DiscretizedBath discretize_bath(const ModelConfig& cfg)
{
    cfg.validate();
    const int nb = cfg.n_modes;
    DiscretizedBath bath;
    bath.omegas.resize(nb);
    bath.couplings.resize(nb);
    const double width = cfg.omega_c / nb;
    for (int k = 1; k <= nb; ++k) {
        const double lo = (k - 1) * width;
        const double hi = k * width;
        // x_k^2 - x_{k-1}^2 and x_k^3 - x_{k-1}^3 without cancellation
        const double d2 = (hi - lo) * (hi + lo);
        const double d3 = (hi - lo) * (hi * hi + hi * lo + lo * lo);
        bath.couplings[k - 1] = std::sqrt(cfg.alpha * d2);
        bath.omegas[k - 1] = (2.0 / 3.0) * d3 / d2;
    }
    return bath;
}

cplx bath_correlation_tlme(double tau, const ModelConfig& cfg)
{
    return 0.5 * cfg.alpha * first_moment(tau, cfg.omega_c);
}

cplx bath_correlation_heom(double t, const ModelConfig& cfg)
{
    return 2.0 * cfg.alpha * first_moment(t, cfg.omega_c);
}

cplx bath_correlation_tlme_derivative(double tau, const ModelConfig& cfg)
{
    return cplx(0.0, -0.5 * cfg.alpha) * second_moment(tau, cfg.omega_c);
}

Mat2 qubit_hamiltonian(double t, const ModelConfig& cfg)
{
    return 0.5 * cfg.omega0 * pauli::sz() + cfg.rabi * std::cos(cfg.omega_x * t) * pauli::sx();
}

namespace pauli {

Mat2 identity() { return Mat2::Identity(); }

Mat2 sx()
{
    Mat2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Mat2 sy()
{
    Mat2 m;
    m << 0.0, -I, I, 0.0;
    return m;
}

Mat2 sz()
{
    Mat2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

Mat2 sp()
{
    Mat2 m;
    m << 0.0, 1.0, 0.0, 0.0;
    return m;
}

Mat2 sm()
{
    Mat2 m;
    m << 0.0, 0.0, 1.0, 0.0;
    return m;
}

Mat2 z_to_x_basis()
{
    const double r = 1.0 / std::sqrt(2.0);
    Mat2 m;
    m << r, r, r, -r;
    return m;
}

} // namespace pauli

} // namespace qfluor

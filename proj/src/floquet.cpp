#include "qfluor/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

namespace qfluor {

namespace {

struct RawState {
    double eps;
    Eigen::MatrixXcd comps; // 2 x (2N+1)
};

Eigen::MatrixXcd to_components(const Eigen::VectorXd& v, int nmax)
{
    const int nb = 2 * nmax + 1;
    Eigen::MatrixXcd c(2, nb);
    for (int j = 0; j < nb; ++j) {
        c(0, j) = v(2 * j);
        c(1, j) = v(2 * j + 1);
    }
    return c;
}

double centroid(const Eigen::MatrixXcd& c, int nmax)
{
    double acc = 0.0;
    for (int j = 0; j < c.cols(); ++j) acc += (j - nmax) * c.col(j).squaredNorm();
    return acc;
}

// <shift_k(a)|b> where shift_k(a)^(n) = a^(n-k)
cplx shifted_overlap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, int k)
{
    cplx acc = 0.0;
    const int nb = static_cast<int>(a.cols());
    for (int j = 0; j < nb; ++j) {
        const int src = j - k;
        if (src < 0 || src >= nb) continue;
        acc += a.col(src).dot(b.col(j));
    }
    return acc;
}

// u'^(n) = u^(n+k), i.e. eps' = eps - k wx
Eigen::MatrixXcd shift_components(const Eigen::MatrixXcd& c, int k)
{
    const int nb = static_cast<int>(c.cols());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2, nb);
    for (int j = 0; j < nb; ++j) {
        const int src = j + k;
        if (src >= 0 && src < nb) out.col(j) = c.col(src);
    }
    return out;
}

FloquetBasis diagonalize(const ModelConfig& cfg, int nmax)
{
    const int nb = 2 * nmax + 1;
    const int dim = 2 * nb;
    const double wx = cfg.omega_x;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
    for (int j = 0; j < nb; ++j) {
        const int n = j - nmax;
        k(2 * j, 2 * j) = 0.5 * cfg.omega0 + n * wx;
        k(2 * j + 1, 2 * j + 1) = -0.5 * cfg.omega0 + n * wx;
        if (j + 1 < nb) {
            // (Omega/2) sx couples neighbouring Fourier blocks
            const double v = 0.5 * cfg.rabi;
            k(2 * j, 2 * (j + 1) + 1) = v;
            k(2 * j + 1, 2 * (j + 1)) = v;
            k(2 * (j + 1) + 1, 2 * j) = v;
            k(2 * (j + 1), 2 * j + 1) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    if (es.info() != Eigen::Success) throw NumericalError("Sambe diagonalization failed");
    Eigen::VectorXd evals = es.eigenvalues();
    Eigen::MatrixXd evecs = es.eigenvectors();

    // Inside exactly degenerate clusters pick states of definite Fourier index.
    const double tol = 1e-9 * std::max(1.0, wx);
    for (int i = 0; i < dim;) {
        int j = i + 1;
        while (j < dim && evals(j) - evals(i) < tol) ++j;
        if (j - i > 1) {
            Eigen::MatrixXd sub = evecs.middleCols(i, j - i);
            Eigen::VectorXd nvec(dim);
            for (int r = 0; r < dim; ++r) nvec(r) = (r / 2) - nmax;
            const Eigen::MatrixXd p = sub.transpose() * nvec.asDiagonal() * sub;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(p);
            evecs.middleCols(i, j - i) = sub * ps.eigenvectors();
        }
        i = j;
    }

    std::vector<RawState> states(dim);
    std::vector<double> cent(dim);
    for (int i = 0; i < dim; ++i) {
        states[i] = {evals(i), to_components(evecs.col(i), nmax)};
        cent[i] = std::abs(centroid(states[i].comps, nmax));
    }
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cent[a] < cent[b]; });

    const int first = order[0];
    int second = -1;
    for (int idx = 1; idx < dim && second < 0; ++idx) {
        const int cand = order[idx];
        double best = 0.0;
        for (int kk = -2 * nmax; kk <= 2 * nmax; ++kk)
            best = std::max(best, std::abs(shifted_overlap(states[first].comps, states[cand].comps, kk)));
        if (best < 0.5) second = cand;
    }
    if (second < 0) throw NumericalError("Floquet: could not identify two independent states");

    FloquetBasis basis;
    basis.omega_x = wx;
    basis.n_max = nmax;
    std::array<RawState, 2> picked{states[first], states[second]};
    for (auto& s : picked) {
        const int kk = static_cast<int>(std::floor((s.eps + 0.5 * wx) / wx));
        s.eps -= kk * wx;
        s.comps = shift_components(s.comps, kk);
        s.comps /= s.comps.norm();
        // deterministic phase: largest component real positive
        Eigen::Index r, c;
        s.comps.cwiseAbs().maxCoeff(&r, &c);
        s.comps *= std::conj(s.comps(r, c)) / std::abs(s.comps(r, c));
    }
    auto ground_weight = [&](const RawState& s) { return std::abs(s.comps.row(1).sum()); };
    const double etol = 1e-10 * std::max(1.0, wx);
    bool swap = picked[1].eps < picked[0].eps - etol;
    if (std::abs(picked[1].eps - picked[0].eps) <= etol)
        swap = ground_weight(picked[1]) > ground_weight(picked[0]);
    if (swap) std::swap(picked[0], picked[1]);
    for (int g = 0; g < 2; ++g) {
        basis.quasienergies[g] = picked[g].eps;
        basis.fourier[g] = picked[g].comps;
    }
    return basis;
}

} // namespace

Vec2 FloquetBasis::state(int g, double t) const
{
    Vec2 out = Vec2::Zero();
    const auto& c = fourier[g];
    for (int j = 0; j < c.cols(); ++j) out += std::polar(1.0, (j - n_max) * omega_x * t) * c.col(j);
    return out;
}

Mat2 FloquetBasis::frame(double t) const
{
    Mat2 b;
    b.col(0) = state(0, t);
    b.col(1) = state(1, t);
    return b;
}

Mat2 FloquetBasis::propagator(double t) const
{
    const Mat2 bt = frame(t), b0 = frame(0.0);
    Mat2 ph = Mat2::Zero();
    ph(0, 0) = std::polar(1.0, -quasienergies[0] * t);
    ph(1, 1) = std::polar(1.0, -quasienergies[1] * t);
    return bt * ph * b0.adjoint();
}

Mat2 FloquetBasis::to_floquet(const Mat2& op, double t) const
{
    const Mat2 b = frame(t);
    return b.adjoint() * op * b;
}

Mat2 FloquetBasis::from_floquet(const Mat2& op, double t) const
{
    const Mat2 b = frame(t);
    return b * op * b.adjoint();
}

Mat2 FloquetOperator::at(double t) const
{
    Mat2 out = Mat2::Zero();
    for (int k = -k_max; k <= k_max; ++k) out += std::polar(1.0, k * omega_x * t) * at_harmonic(k);
    return out;
}

std::vector<int> FloquetOperator::significant(double threshold) const
{
    std::vector<int> out;
    for (int k = -k_max; k <= k_max; ++k)
        if (at_harmonic(k).cwiseAbs().maxCoeff() > threshold) out.push_back(k);
    return out;
}

void FloquetOperator::write_csv(std::ostream& os) const
{
    os << "# eps1=" << std::setprecision(17) << quasienergies[0] << " eps2=" << quasienergies[1] << '\n';
    os << "k,mu,nu,re,im\n";
    for (int k = -k_max; k <= k_max; ++k)
        for (int mu = 0; mu < 2; ++mu)
            for (int nu = 0; nu < 2; ++nu) {
                const cplx v = at_harmonic(k)(mu, nu);
                os << k << ',' << mu + 1 << ',' << nu + 1 << ',' << v.real() << ',' << v.imag() << '\n';
            }
}

FloquetBasis compute_floquet_basis(const ModelConfig& cfg, int n_max)
{
    cfg.validate();
    if (n_max < 1) throw ConfigError("n_max must be >= 1");
    FloquetBasis basis = diagonalize(cfg, n_max);
    const FloquetBasis wider = diagonalize(cfg, n_max + 4);
    for (int g = 0; g < 2; ++g) {
        const double eps = basis.quasienergies[g];
        const double tol = 1e-8 * std::max(cfg.omega_x, std::abs(eps));
        if (std::abs(wider.quasienergies[g] - eps) > tol) {
            std::ostringstream os;
            os << "Floquet truncation not converged at n_max=" << n_max << ": eps_" << g + 1 << " moved from "
               << eps << " to " << wider.quasienergies[g] << " at n_max+4; increase n_max";
            throw NumericalError(os.str());
        }
    }
    return basis;
}

FloquetBasis track_labels(const FloquetBasis& prev, const FloquetBasis& next)
{
    if (prev.fourier[0].cols() != next.fourier[0].cols()) return next;
    auto ov = [&](int a, int b) { return std::abs(prev.fourier[a].cwiseProduct(next.fourier[b].conjugate()).sum()); };
    if (ov(0, 1) + ov(1, 0) > ov(0, 0) + ov(1, 1)) {
        FloquetBasis out = next;
        std::swap(out.quasienergies[0], out.quasienergies[1]);
        std::swap(out.fourier[0], out.fourier[1]);
        return out;
    }
    return next;
}

FloquetOperator operator_elements(const FloquetBasis& basis, const Mat2& op)
{
    FloquetOperator out;
    out.omega_x = basis.omega_x;
    out.quasienergies = basis.quasienergies;
    const int nb = static_cast<int>(basis.fourier[0].cols());
    out.k_max = nb - 1;
    out.harmonics.assign(2 * out.k_max + 1, Mat2::Zero());
    // O_{mu nu,k} = sum_n u_mu^(n)^dagger O u_nu^(n+k)
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu) {
            const Eigen::MatrixXcd lhs = basis.fourier[mu].adjoint() * op * basis.fourier[nu]; // nb x nb
            for (int j = 0; j < nb; ++j)
                for (int i = 0; i < nb; ++i) out.harmonics[(i - j) + out.k_max](mu, nu) += lhs(j, i);
        }
    return out;
}

FloquetOperator sigma_x_elements(const FloquetBasis& basis) { return operator_elements(basis, pauli::sx()); }

GammaKernel::GammaKernel(const ModelConfig& cfg, double h, double tau_max, std::vector<double> omegas)
    : h_(h), omegas_(std::move(omegas))
{
    if (!(h > 0.0)) throw ConfigError("Gamma grid spacing must be positive");
    if (!(tau_max >= 0.0)) throw ConfigError("Gamma grid length must be non-negative");
    n_ = static_cast<long>(std::ceil(tau_max / h - 1e-9)) + 1;
    std::vector<cplx> c(n_), dc(n_);
    for (long j = 0; j < n_; ++j) {
        c[j] = bath_correlation_tlme(j * h, cfg);
        dc[j] = bath_correlation_tlme_derivative(j * h, cfg);
    }
    table_.resize(omegas_.size() * static_cast<std::size_t>(n_));
    for (std::size_t w = 0; w < omegas_.size(); ++w) {
        const double om = omegas_[w];
        cplx* g = &table_[w * n_];
        auto f = [&](long j) { return c[j] * std::polar(1.0, -om * j * h); };
        auto df = [&](long j) { return (dc[j] - I * om * c[j]) * std::polar(1.0, -om * j * h); };
        const cplx df0 = df(0);
        cplx trap = 0.0;
        cplx fprev = f(0);
        g[0] = 0.0;
        for (long j = 1; j < n_; ++j) {
            const cplx fj = f(j);
            trap += 0.5 * h * (fprev + fj);
            g[j] = trap - (h * h / 12.0) * (df(j) - df0);
            fprev = fj;
        }
    }
}

int GammaKernel::index_of(double omega) const
{
    for (std::size_t i = 0; i < omegas_.size(); ++i)
        if (std::abs(omegas_[i] - omega) <= 1e-12 * std::max(1.0, std::abs(omega))) return static_cast<int>(i);
    throw std::invalid_argument("GammaKernel: frequency not registered");
}

long GammaKernel::grid_index(double t) const
{
    const double x = t / h_;
    const long j = std::lround(x);
    if (std::abs(x - j) > 1e-6) throw std::invalid_argument("GammaKernel: time not on the grid");
    if (j < 0 || j >= n_) throw std::out_of_range("GammaKernel: time beyond the cached grid");
    return j;
}

cplx GammaKernel::gamma(int w_index, double t, double t_prime) const
{
    if (t < t_prime - 1e-12) throw std::invalid_argument("gamma: requires t >= t'");
    return cumulative(w_index, grid_index(t)) - cumulative(w_index, grid_index(t_prime));
}

cplx gamma(double omega, double t, double t_prime, const ModelConfig& cfg, double h)
{
    if (t < t_prime) throw std::invalid_argument("gamma: requires t >= t'");
    if (!(h > 0.0)) throw ConfigError("gamma: step must be positive");
    if (t == t_prime) return 0.0;
    const long n = std::max(1L, static_cast<long>(std::ceil((t - t_prime) / h - 1e-9)));
    const double hh = (t - t_prime) / n;
    auto f = [&](double tau) { return bath_correlation_tlme(tau, cfg) * std::polar(1.0, -omega * tau); };
    auto df = [&](double tau) {
        return (bath_correlation_tlme_derivative(tau, cfg) - I * omega * bath_correlation_tlme(tau, cfg)) *
               std::polar(1.0, -omega * tau);
    };
    cplx acc = 0.5 * (f(t_prime) + f(t));
    for (long j = 1; j < n; ++j) acc += f(t_prime + j * hh);
    return hh * acc - (hh * hh / 12.0) * (df(t) - df(t_prime));
}

} // namespace qfluor

// Ansatz deviation sigma^2 = [<Dd|Dd> + <D|H^2|D> - 2 Im <Dd|H|D>] / w0^2.
// Every k,q double sum factorizes into products of single sums, so each term is O(M^2 N_b).

#include "qfluor/davydov.hpp"

#include <cmath>

namespace qfluor {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

struct Branch {
    const VectorXcd& amp;
    const MatrixXcd& disp;
    const VectorXcd& damp;
    const MatrixXcd& ddisp;
    double sign;
};

// sum_ln conj(x_l) y_n K_ln
cplx bilinear(const VectorXcd& x, const MatrixXcd& k, const VectorXcd& y) { return x.dot(k * y); }

cplx dot_dot(const Branch& b)
{
    const MatrixXcd s = overlap_matrix(b.disp, b.disp);
    const MatrixXcd f_df = b.disp.conjugate() * b.ddisp.transpose();  // sum_k f*_lk fd_nk
    const MatrixXcd df_f = b.ddisp.conjugate() * b.disp.transpose();  // sum_k fd*_lk f_nk
    const MatrixXcd df_df = b.ddisp.conjugate() * b.ddisp.transpose();
    const MatrixXcd inner = df_df + df_f.cwiseProduct(f_df);
    return bilinear(b.damp, s, b.damp) + bilinear(b.damp, s.cwiseProduct(f_df), b.amp) +
           bilinear(b.amp, s.cwiseProduct(df_f), b.damp) + bilinear(b.amp, s.cwiseProduct(inner), b.amp);
}

// E_ln = sign*drive + W_ln + sign*L_ln
MatrixXcd energy(const MatrixXcd& disp, double sign, double drive, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& lam, MatrixXcd* w_out = nullptr, MatrixXcd* l_out = nullptr)
{
    const int m = static_cast<int>(disp.rows());
    const MatrixXcd wm = disp.conjugate() * w.asDiagonal() * disp.transpose();
    const VectorXcd c = disp * (0.5 * lam);
    MatrixXcd l(m, m);
    for (int i = 0; i < m; ++i)
        for (int n = 0; n < m; ++n) l(i, n) = std::conj(c(i)) + c(n);
    if (w_out) *w_out = wm;
    if (l_out) *l_out = l;
    return wm + sign * l + MatrixXcd::Constant(m, m, sign * drive);
}

// Contribution of the left branch b (bra) to <Dd|H|D>; o is the opposite branch (ket side of
// the sz flip).
cplx dot_h(const Branch& b, const Branch& o, double drive, double half_w0, const Eigen::VectorXd& w,
           const Eigen::VectorXd& lam)
{
    const MatrixXcd s = overlap_matrix(b.disp, b.disp);
    const MatrixXcd sx = overlap_matrix(b.disp, o.disp);
    const MatrixXcd e = energy(b.disp, b.sign, drive, w, lam);
    const MatrixXcd df_f = b.ddisp.conjugate() * b.disp.transpose();
    const MatrixXcd df_o = b.ddisp.conjugate() * o.disp.transpose();
    const MatrixXcd df_w_f = b.ddisp.conjugate() * w.asDiagonal() * b.disp.transpose();
    const VectorXcd dl = b.ddisp * (0.5 * lam); // sum_k lambda_k/2 fd_lk
    const int m = static_cast<int>(b.amp.size());
    MatrixXcd lam_term(m, m);
    for (int l = 0; l < m; ++l) lam_term.row(l).setConstant(b.sign * std::conj(dl(l)));

    cplx out = half_w0 * bilinear(b.damp, sx, o.amp) + bilinear(b.damp, s.cwiseProduct(e), b.amp);
    out += half_w0 * bilinear(b.amp, sx.cwiseProduct(df_o), o.amp);
    out += bilinear(b.amp, s.cwiseProduct(e.cwiseProduct(df_f) + df_w_f + lam_term), b.amp);
    return out;
}

} // namespace

DeviationReport deviation(const DavydovState& state, const DavydovRates& rates, double t,
                          const ModelConfig& cfg, const DiscretizedBath& bath)
{
    if (rates.m != state.m || rates.disp_plus.rows() != state.disp_plus.rows() ||
        rates.disp_plus.cols() != state.disp_plus.cols() ||
        rates.disp_minus.cols() != state.disp_minus.cols())
        throw std::invalid_argument("deviation: state and rates dimensions differ");
    if (static_cast<std::size_t>(state.n_modes()) != bath.size())
        throw std::invalid_argument("deviation: state and bath mode counts differ");

    const int nb = state.n_modes();
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(bath.omegas.data(), nb);
    const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(bath.couplings.data(), nb);
    const double drive = cfg.rabi * std::cos(cfg.omega_x * t);
    const double half_w0 = 0.5 * cfg.omega0;

    const Branch p{state.amp_plus, state.disp_plus, rates.amp_plus, rates.disp_plus, +1.0};
    const Branch q{state.amp_minus, state.disp_minus, rates.amp_minus, rates.disp_minus, -1.0};

    DeviationReport rep;
    rep.dd = (dot_dot(p) + dot_dot(q)).real();
    rep.im_dhd = (dot_h(p, q, drive, half_w0, w, lam) + dot_h(q, p, drive, half_w0, w, lam)).imag();

    // <D|H^2|D>, with H = (w0/2) sz + sx (drive + Lambda) + H_R and Lambda = sum lambda/2 (b + b+):
    // H^2 = w0^2/4 + drive^2 + 2 drive Lambda + Lambda^2 + H_R^2 + w0 sz H_R
    //       + sx (2 drive H_R + {Lambda, H_R})
    const double lam2 = 0.25 * lam.squaredNorm();
    cplx h2 = 0.0;
    for (const Branch* b : {&p, &q}) {
        MatrixXcd wm, lm;
        energy(b->disp, b->sign, drive, w, lam, &wm, &lm);
        const MatrixXcd s = overlap_matrix(b->disp, b->disp);
        const MatrixXcd w2 = b->disp.conjugate() * w.cwiseAbs2().asDiagonal() * b->disp.transpose();
        const VectorXcd cw = b->disp * (0.5 * w.cwiseProduct(lam)); // sum_k w_k lambda_k/2 f_nk
        const int m = static_cast<int>(b->amp.size());
        MatrixXcd lw(m, m);
        for (int l = 0; l < m; ++l)
            for (int n = 0; n < m; ++n) lw(l, n) = std::conj(cw(l)) + cw(n);
        const MatrixXcd ones = MatrixXcd::Ones(m, m);
        MatrixXcd k = (half_w0 * half_w0 + drive * drive + lam2) * ones;
        k += 2.0 * drive * (b->sign * wm + lm);
        k += w2 + wm.cwiseProduct(wm) + lm.cwiseProduct(lm);
        k += b->sign * (lw + 2.0 * wm.cwiseProduct(lm));
        h2 += bilinear(b->amp, s.cwiseProduct(k), b->amp);
    }
    // cross-branch w0 sz H_R terms
    for (int side = 0; side < 2; ++side) {
        const Branch& b = side == 0 ? p : q;
        const Branch& o = side == 0 ? q : p;
        const MatrixXcd sx = overlap_matrix(b.disp, o.disp);
        const MatrixXcd wx = b.disp.conjugate() * w.asDiagonal() * o.disp.transpose();
        h2 += cfg.omega0 * bilinear(b.amp, sx.cwiseProduct(wx), o.amp);
    }
    rep.dh2d = h2.real();
    rep.sigma2 = (rep.dd + rep.dh2d - 2.0 * rep.im_dhd) / (cfg.omega0 * cfg.omega0);
    return rep;
}

} // namespace qfluor

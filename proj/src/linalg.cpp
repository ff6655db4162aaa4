#include "qfluor/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

extern "C" {
void zgelsd_(const int* m, const int* n, const int* nrhs, std::complex<double>* a, const int* lda,
             std::complex<double>* b, const int* ldb, double* s, const double* rcond, int* rank,
             std::complex<double>* work, const int* lwork, double* rwork, int* iwork, int* info);
}

namespace qfluor::linalg {

namespace {

struct BlockSolve {
    Eigen::VectorXcd x;
    Eigen::VectorXd sv; // descending
    int rank{0};
};

BlockSolve zgelsd_square(Eigen::MatrixXcd a, Eigen::VectorXcd b, double rcond)
{
    const int n = static_cast<int>(a.rows());
    const int nrhs = 1;
    BlockSolve out;
    out.sv.resize(n);
    int rank = 0, info = 0;

    int lwork = -1;
    cplx wq;
    double rq;
    int iq;
    zgelsd_(&n, &n, &nrhs, a.data(), &n, b.data(), &n, out.sv.data(), &rcond, &rank, &wq, &lwork,
            &rq, &iq, &info);
    if (info != 0) throw NumericalError("zgelsd workspace query failed");
    lwork = static_cast<int>(wq.real());
    std::vector<cplx> work(std::max(lwork, 1));
    std::vector<double> rwork(std::max(static_cast<int>(rq), 1));
    std::vector<int> iwork(std::max(iq, 1));
    zgelsd_(&n, &n, &nrhs, a.data(), &n, b.data(), &n, out.sv.data(), &rcond, &rank, work.data(),
            &lwork, rwork.data(), iwork.data(), &info);
    if (info > 0) throw NumericalError("zgelsd: SVD failed to converge");
    if (info < 0) throw NumericalError("zgelsd: illegal argument");
    out.x = std::move(b);
    out.rank = rank;
    return out;
}

} // namespace

Eigen::VectorXcd lstsq_blocks(const std::vector<LinearBlock>& blocks, double rcond, LstsqInfo* info)
{
    if (!(rcond > 0.0 && rcond < 1.0)) throw ConfigError("svd cutoff must lie in (0, 1)");
    Eigen::Index total = 0;
    bool any_nonzero = false;
    for (const auto& blk : blocks) {
        if (blk.matrix.rows() != blk.matrix.cols() || blk.matrix.rows() != blk.rhs.size())
            throw std::invalid_argument("lstsq_blocks: block shape mismatch");
        if (!blk.matrix.allFinite() || !blk.rhs.allFinite())
            throw NumericalError("lstsq_blocks: non-finite entries");
        total += blk.rhs.size();
        any_nonzero = any_nonzero || blk.matrix.cwiseAbs().maxCoeff() > 0.0;
    }
    if (!any_nonzero) throw NumericalError("lstsq_blocks: coefficient matrix is all zero");

    // Each block first uses its own relative cutoff; a block whose singular values straddle
    // the global threshold is solved again with the cutoff rescaled to the global maximum.
    std::vector<BlockSolve> sols;
    sols.reserve(blocks.size());
    double smax = 0.0;
    for (const auto& blk : blocks) {
        if (blk.rhs.size() == 0) {
            sols.push_back({});
            continue;
        }
        sols.push_back(zgelsd_square(blk.matrix, blk.rhs, rcond));
        smax = std::max(smax, sols.back().sv(0));
    }
    const double threshold = rcond * smax;
    LstsqInfo summary;
    summary.sigma_max = smax;
    summary.sigma_min_kept = smax;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        auto& s = sols[i];
        if (s.sv.size() == 0) continue;
        const int keep = static_cast<int>((s.sv.array() > threshold).count());
        if (keep != s.rank) {
            if (keep == 0) {
                s.x.setZero();
                s.rank = 0;
            } else {
                s = zgelsd_square(blocks[i].matrix, blocks[i].rhs, threshold / s.sv(0));
            }
        }
        summary.rank += s.rank;
        if (s.rank > 0) summary.sigma_min_kept = std::min(summary.sigma_min_kept, s.sv(s.rank - 1));
    }
    if (info) *info = summary;

    Eigen::VectorXcd x(total);
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto n = blocks[i].rhs.size();
        if (n == 0) continue;
        x.segment(off, n) = sols[i].x;
        off += n;
    }
    return x;
}

double largest_eigenvalue(const Eigen::MatrixXcd& g, int iterations)
{
    const auto n = g.rows();
    if (n == 0) return 0.0;
    // Start with column norms so the vector has weight on the dominant directions.
    Eigen::VectorXcd v = g.colwise().norm().transpose().cast<cplx>();
    if (v.norm() == 0.0) return 0.0;
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXcd w = g * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        const double next = v.dot(w).real();
        v = w / nw;
        if (std::abs(next - lam) <= 1e-6 * std::abs(next)) return next;
        lam = next;
    }
    return lam;
}

Eigen::VectorXcd tikhonov_blocks(const std::vector<LinearBlock>& blocks, double rcond, LstsqInfo* info)
{
    if (!(rcond > 0.0 && rcond < 1.0)) throw ConfigError("svd cutoff must lie in (0, 1)");
    Eigen::Index total = 0;
    double lmax = 0.0;
    for (const auto& blk : blocks) {
        if (blk.matrix.rows() != blk.matrix.cols() || blk.matrix.rows() != blk.rhs.size())
            throw std::invalid_argument("tikhonov_blocks: block shape mismatch");
        if (!blk.matrix.allFinite() || !blk.rhs.allFinite())
            throw NumericalError("tikhonov_blocks: non-finite entries");
        total += blk.rhs.size();
        lmax = std::max(lmax, largest_eigenvalue(blk.matrix));
    }
    if (!(lmax > 0.0)) throw NumericalError("tikhonov_blocks: coefficient matrix is zero");
    const double eps = rcond * lmax;

    Eigen::VectorXcd x(total);
    Eigen::Index off = 0;
    for (const auto& blk : blocks) {
        const auto n = blk.rhs.size();
        if (n == 0) continue;
        Eigen::MatrixXcd g = blk.matrix;
        g.diagonal().array() += eps;
        Eigen::LLT<Eigen::MatrixXcd> llt(g);
        if (llt.info() != Eigen::Success) return lstsq_blocks(blocks, rcond, info);
        x.segment(off, n) = llt.solve(blk.rhs);
        off += n;
    }
    if (info) {
        info->rank = static_cast<int>(total);
        info->sigma_max = lmax;
        info->sigma_min_kept = eps;
    }
    return x;
}

Eigen::VectorXcd lstsq(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b, double rcond,
                       LstsqInfo* info)
{
    return lstsq_blocks({LinearBlock{a, b}}, rcond, info);
}

} // namespace qfluor::linalg

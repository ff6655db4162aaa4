// linalg.hpp: regularized least squares on block-diagonal complex systems

#pragma once

#include <vector>

#include "qfluor/types.hpp"

namespace qfluor::linalg {

struct LinearBlock {
    Eigen::MatrixXcd matrix;
    Eigen::VectorXcd rhs;
};

struct LstsqInfo {
    int rank{0};
    double sigma_max{0.0};
    double sigma_min_kept{0.0};
};

// Minimum-norm least-squares solution of the block-diagonal system. Singular values
// below rcond * (largest singular value over all blocks) are treated as zero.
// Solutions are concatenated in block order.
Eigen::VectorXcd lstsq_blocks(const std::vector<LinearBlock>& blocks, double rcond,
                              LstsqInfo* info = nullptr);

// Solves (G + eps I) x = b block by block for Hermitian positive semidefinite G, with
// eps = rcond * (largest eigenvalue over all blocks). Falls back to lstsq_blocks on the same
// system if a Cholesky factorization breaks down.
Eigen::VectorXcd tikhonov_blocks(const std::vector<LinearBlock>& blocks, double rcond,
                                 LstsqInfo* info = nullptr);

// Largest eigenvalue of a Hermitian PSD matrix by power iteration from a fixed start vector.
double largest_eigenvalue(const Eigen::MatrixXcd& g, int iterations = 40);

// Dense single-matrix convenience wrapper.
Eigen::VectorXcd lstsq(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b, double rcond,
                       LstsqInfo* info = nullptr);

} // namespace qfluor::linalg

#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spectral_ends {

using SpMat = Eigen::SparseMatrix<double>;

struct EigenPairs {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< B-orthonormal columns
  std::string method;       ///< "dense" or "shift-invert"
};

/// Number of eigenvalues of A x = lambda B x strictly below `lambda`, from the inertia of
/// an LDL^T factorization of A - lambda B (A symmetric, B symmetric positive definite).
std::size_t count_eigs_below(const SpMat& A, const SpMat& B, double lambda);

/// Every eigenpair with eigenvalue <= lambda_max. Small problems use a dense solver; larger
/// ones use implicitly restarted Lanczos in shift-invert mode with the number of wanted
/// pairs fixed in advance by the inertia count, then cross-checked against it.
EigenPairs eigs_below(const SpMat& A, const SpMat& B, double lambda_max, bool want_vectors = true);

/// Full spectrum by dense reduction; intended for small problems and as a test oracle.
EigenPairs dense_eigs(const SpMat& A, const SpMat& B);

/// Problem size up to which eigs_below uses the dense path.
constexpr Eigen::Index kDenseEigenLimit = 1200;

}  // namespace spectral_ends

#include "spectral_ends/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/SparseCholesky>
#include <arpack/arpack.h>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

using Ldlt = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

void factor(Ldlt& f, const SpMat& A, const SpMat& B, double shift) {
  const SpMat C = A - shift * B;
  f.compute(C);
  if (f.info() != Eigen::Success) {
    throw NumericalError("eigensolve", "LDL^T factorization failed at shift " + std::to_string(shift));
  }
}

std::size_t negative_pivots(const Ldlt& f) {
  const Eigen::VectorXd d = f.vectorD();
  return static_cast<std::size_t>((d.array() < 0).count());
}

EigenPairs sort_and_truncate(Eigen::VectorXd values, Eigen::MatrixXd vectors, double lambda_max, bool want_vectors) {
  std::vector<Eigen::Index> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::size_t keep = 0;
  while (keep < idx.size() && values[idx[keep]] <= lambda_max) ++keep;
  EigenPairs out;
  out.values.resize(static_cast<Eigen::Index>(keep));
  if (want_vectors) out.vectors.resize(vectors.rows(), static_cast<Eigen::Index>(keep));
  for (std::size_t i = 0; i < keep; ++i) {
    out.values[i] = values[idx[i]];
    if (want_vectors) out.vectors.col(i) = vectors.col(idx[i]);
  }
  return out;
}

}  // namespace

std::size_t count_eigs_below(const SpMat& A, const SpMat& B, double lambda) {
  Ldlt f;
  factor(f, A, B, lambda);
  return negative_pivots(f);
}

EigenPairs dense_eigs(const SpMat& A, const SpMat& B) {
  const Eigen::MatrixXd a(A), b(B);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolve", "dense generalized eigensolver failed");
  return EigenPairs{es.eigenvalues(), es.eigenvectors(), "dense"};
}

EigenPairs eigs_below(const SpMat& A, const SpMat& B, double lambda_max, bool want_vectors) {
  const Eigen::Index n = A.rows();
  if (n == 0) return EigenPairs{Eigen::VectorXd(), Eigen::MatrixXd(0, 0), "empty"};
  if (n <= kDenseEigenLimit) {
    auto all = dense_eigs(A, B);
    auto out = sort_and_truncate(all.values, all.vectors, lambda_max, want_vectors);
    out.method = "dense";
    return out;
  }

  const std::size_t wanted = count_eigs_below(A, B, lambda_max);
  if (wanted == 0) return EigenPairs{Eigen::VectorXd(), Eigen::MatrixXd(n, 0), "shift-invert"};

  // Shift below the whole spectrum so the largest eigenvalues of (A - sigma B)^{-1} B are
  // exactly the lowest eigenvalues of the pencil.
  double sigma = -1.0;
  Ldlt f;
  for (int attempt = 0;; ++attempt) {
    factor(f, A, B, sigma);
    if (negative_pivots(f) == 0) break;
    if (attempt > 60) throw NumericalError("eigensolve", "could not find a shift below the spectrum");
    sigma = 2.0 * sigma - 1.0;
  }

  const a_int nn = static_cast<a_int>(n);
  const a_int nev = static_cast<a_int>(std::min<Eigen::Index>(static_cast<Eigen::Index>(wanted) + 2, n - 1));
  const a_int ncv = static_cast<a_int>(std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * nev + 1, nev + 20)));
  const a_int lworkl = ncv * (ncv + 8);
  std::vector<double> resid(n, 0.0), v(static_cast<std::size_t>(n) * ncv), workd(3 * n), workl(lworkl);
  a_int iparam[11] = {}, ipntr[14] = {};
  iparam[0] = 1;
  iparam[2] = 3000;
  iparam[6] = 3;
  // ARPACK's own random start vector depends on state kept between calls, so seed our own.
  // A random vector also keeps every symmetry class of modes in the Krylov space.
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double& r : resid) r = unit(rng);
  a_int ido = 0, info = 1;
  const double tol = 0.0;

  Eigen::VectorXd tmp(n);
  while (true) {
    dsaupd_c(&ido, "G", nn, "LM", nev, tol, resid.data(), ncv, v.data(), nn, iparam, ipntr, workd.data(),
             workl.data(), lworkl, &info);
    if (ido == -1 || ido == 1 || ido == 2) {
      Eigen::Map<const Eigen::VectorXd> x(&workd[ipntr[0] - 1], n);
      Eigen::Map<Eigen::VectorXd> y(&workd[ipntr[1] - 1], n);
      if (ido == -1) {
        tmp = B * x;
        y = f.solve(tmp);
      } else if (ido == 1) {
        Eigen::Map<const Eigen::VectorXd> bx(&workd[ipntr[2] - 1], n);
        y = f.solve(bx);
      } else {
        y = B * x;
      }
    } else {
      break;
    }
  }
  if (info < 0 || info == 1) {
    throw NumericalError("eigensolve", "Lanczos iteration failed (info " + std::to_string(info) + ", subspace " +
                                           std::to_string(ncv) + ", converged " + std::to_string(iparam[4]) + ")");
  }

  std::vector<a_int> select(ncv, 1);
  std::vector<double> d(nev), z(static_cast<std::size_t>(n) * nev);
  a_int info2 = 0;
  dseupd_c(1, "A", select.data(), d.data(), z.data(), nn, sigma, "G", nn, "LM", nev, tol, resid.data(), ncv,
           v.data(), nn, iparam, ipntr, workd.data(), workl.data(), lworkl, &info2);
  if (info2 != 0) throw NumericalError("eigensolve", "eigenvector extraction failed (info " + std::to_string(info2) + ")");

  const a_int got = iparam[4];
  Eigen::VectorXd values = Eigen::Map<Eigen::VectorXd>(d.data(), got);
  Eigen::MatrixXd vectors = Eigen::Map<Eigen::MatrixXd>(z.data(), n, got);
  auto out = sort_and_truncate(values, vectors, lambda_max, want_vectors);
  if (static_cast<std::size_t>(out.values.size()) != wanted) {
    throw NumericalError("eigensolve", "found " + std::to_string(out.values.size()) + " eigenvalues below " +
                                           std::to_string(lambda_max) + " but the inertia count is " +
                                           std::to_string(wanted) + " (subspace " + std::to_string(ncv) + ")");
  }
  out.method = "shift-invert";
  return out;
}

}  // namespace spectral_ends

#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral_ends/ntd.hpp"

namespace spectral_ends {

/// Finite sigma-eigenvalues of the pencil sigma R - T, largest first.
struct PencilSpectrum {
  std::vector<double> sigma;
  Eigen::MatrixXd vectors;  ///< columns c_j with ||c_j|| = 1
  double lambda = 0.0;
};

/// sigma = 1 / eta where eta runs over the eigenvalues of T^{-1/2} R T^{-1/2}; eta = 0 is
/// dropped as an infinite sigma. Returns the min(K, #finite) largest.
PencilSpectrum pencil_sigmas(const Eigen::MatrixXd& R, const Eigen::VectorXd& T, int K);

struct CountBound {
  int K = 0;
  int mu_below = 0;
  int nu_below = 0;
  bool clamped = false;  ///< raw difference was negative
};

/// K = #{mu < L2} - #{nu < L2}, clamped at 0.
CountBound count_bound(std::span<const double> mu, std::span<const double> nu, double L2, double lambda_max);

struct EigenFinding {
  double lambda = 0.0;
  double bracket_lo = 0.0;   ///< count drops across [bracket_lo, bracket_hi]
  double bracket_hi = 0.0;
  int multiplicity = 1;
  int sigma_index = 0;       ///< 1-based position of the crossing sigma in descending order
  Eigen::VectorXd c;         ///< coefficients on the modes J+1..M
  bool has_orth = false;
  double orth_residual = 0.0;
  bool embedded_flag = false;
  double window_lo = -std::numeric_limits<double>::infinity();
  double window_hi = 0.0;
};

struct SearchOptions {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();  ///< clipped to the window
  double tol = 1e-8;
  double embedded_threshold = 1e-3;
  int audit_samples = 20;
};

struct PoleFreeInterval {
  double a = 0.0;
  double b = 0.0;
  int count_a = 0;  ///< negative eigenvalues of R + T at a
  int count_b = 0;
};

struct SearchReport {
  int J = 0;
  double window_lo = -std::numeric_limits<double>::infinity();
  double window_hi = 0.0;
  std::vector<PoleFreeInterval> intervals;
  std::vector<EigenFinding> findings;  ///< sorted by lambda
  std::vector<std::string> warnings;
  double audit_worst_decrease = 0.0;   ///< largest decrease seen on a negative eta curve
};

/// Number of negative eigenvalues of R(lambda) + T(lambda) on rows J+1..M. A root of
/// sigma_j(lambda) = -1 is exactly a point where this count drops.
int negative_count(const NtdData& d, int J, double lambda);

/// Real eigenvalues of the matched problem in window [kappa_J, kappa_{J+1}) by bisection
/// on the negative count over the pole-free pieces of [opt.lo, opt.hi].
SearchReport find_eigenvalues(const NtdData& d, int J, const SearchOptions& opt);

/// ||B c|| / ||B||_2 with B the (1:J, J+1:M) block of the interior NtD matrix.
double orthogonality_residual(const Eigen::VectorXd& c, const NtdData& d, double lambda, int J);
/// Same quantity for an explicit test matrix.
double orthogonality_residual(const Eigen::VectorXd& c, const Eigen::MatrixXd& B);

/// Window [kappa_J, kappa_{J+1}) with kappa_0 = -inf.
std::pair<double, double> threshold_window(const std::vector<double>& kappa, int J);

}  // namespace spectral_ends

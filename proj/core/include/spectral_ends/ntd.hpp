#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spectral_ends/fem.hpp"
#include "spectral_ends/specfun.hpp"
#include "spectral_ends/transverse.hpp"

namespace spectral_ends {

/// Inclusive 1-based row range a:b of the global transverse order.
struct SliceSpec {
  int a = 1;
  int b = 1;

  static SliceSpec full(int M) { return {1, M}; }
  /// Rows J+1:M, the modes that are closed in window J.
  static SliceSpec upper(int J, int M) { return {J + 1, M}; }
  /// Rows 1:J, the open modes in window J.
  static SliceSpec lower(int J) { return {1, J}; }

  int size() const { return b - a + 1; }
  void check(int M) const;
};

/// Everything needed to evaluate the interior and exterior NtD matrices at any lambda.
///
/// Rows of S follow the global transverse order. The interior matrix is
/// R_kl = sum_m conj(S_km) S_lm / (mu_m - lambda), which is Hermitian for real lambda;
/// for interval bases S is real and R is real symmetric.
struct NtdData {
  Eigen::MatrixXcd S;          ///< M x N
  std::vector<double> mu;      ///< N interior Neumann eigenvalues
  std::vector<double> kappa;   ///< M thresholds, ascending
  bool circle = false;         ///< artificial-circle interface instead of cylindrical ends
  std::vector<int> orders;     ///< Fourier orders in global order (circle only)
  double radius = 0.0;         ///< artificial circle radius (circle only)
  std::optional<Eigen::MatrixXcd> R0;
  double lambda0 = -1.0;
  double r0_asymmetry = 0.0;   ///< relative asymmetry of R0 before symmetrization
  int J = 0;

  int M() const { return static_cast<int>(S.rows()); }
  int N() const { return static_cast<int>(S.cols()); }
};

/// Interface load matrix G (nodes x M) with G_ik = integral of w_k phi_i over the interface.
Eigen::MatrixXcd interface_loads(const DiscreteOperator& op, const std::vector<TransverseBasis>& bases,
                                 const std::vector<GlobalMode>& modes);

/// S = G^T U, i.e. S_km = integral of w_k U_m over the interfaces.
Eigen::MatrixXcd coupling_matrix(const InteriorEigenBasis& basis, const Eigen::MatrixXcd& loads);

struct R0Result {
  Eigen::MatrixXcd R0;  ///< Hermitian part
  double asymmetry = 0.0;
};

/// Interior NtD matrix at lambda0 from the Neumann boundary value problems with data w_k.
R0Result r0_reference(const DiscreteOperator& op, const Eigen::MatrixXcd& loads, double lambda0,
                      const std::vector<double>& mu);

/// Assembles NtdData from a Neumann-interface operator and its eigenbasis.
/// When `with_r0` is false the accelerated form is unavailable.
NtdData build_ntd(const DiscreteOperator& op, const InteriorEigenBasis& basis,
                  const std::vector<TransverseBasis>& bases, const std::vector<GlobalMode>& modes,
                  double lambda0, bool with_r0 = true);

enum class NtdForm { Auto, Direct, Accelerated };

/// Block (rows, cols) of the truncated interior NtD matrix at lambda. Auto uses the
/// accelerated form whenever R0 is present.
Eigen::MatrixXcd interior_ntd(const NtdData& d, cdouble lambda, const SliceSpec& rows, const SliceSpec& cols,
                              NtdForm form = NtdForm::Auto);
Eigen::MatrixXcd interior_ntd(const NtdData& d, cdouble lambda, const SliceSpec& slice,
                              NtdForm form = NtdForm::Auto);

/// Cylindrical-end NtD diagonal 1 / sqrt(kappa_k - lambda) over the slice.
Eigen::VectorXcd cylinder_ntd_diag(const std::vector<double>& kappa, cdouble lambda, BranchMode mode,
                                   const SliceSpec& slice);

struct DiscDiag {
  Eigen::VectorXcd values;
  std::vector<bool> flagged;  ///< entries where H'_n nearly vanishes
  bool any_flagged() const;
};

/// Exterior-disc diagonal H_n(rho k) / (k H_n'(rho k)), k = sqrt(lambda) with Im k <= 0,
/// for the given Fourier orders.
DiscDiag disc_ntd_diag(double rho, cdouble lambda, const std::vector<int>& orders);
DiscDiag disc_ntd_diag(double rho, cdouble lambda, int M);

/// Relative margin within which lambda counts as sitting on a pole mu_m.
constexpr double kNtdPoleMargin = 1e-9;

}  // namespace spectral_ends

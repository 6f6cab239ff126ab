#pragma once

#include <complex>
#include <vector>

#include "spectral_ends/geometry.hpp"

namespace spectral_ends {

enum class BasisKind { Interval, Circle };

/// Eigenfunctions of the cross-section problem on one interface.
///
/// Interval kind: w_j(s) = A_j cos(k_j s) + B_j sin(k_j s) on s in [0, L], with
/// kappa_j = k_j^2, normalized in L2(0, L).
/// Circle kind: w_j(theta) = exp(i n_j theta) / sqrt(2 pi rho), orders n = 0, 1, -1, 2, -2, ...
struct TransverseBasis {
  BasisKind kind = BasisKind::Interval;
  int tag = kInterfaceTagBase;
  double length = 1.0;  ///< L for intervals, 2 pi rho for circles

  std::vector<double> kappa;  ///< thresholds (intervals) or n^2 / rho^2 (circles)
  std::vector<double> k;
  std::vector<double> cos_coeff;
  std::vector<double> sin_coeff;
  LineSegment line;  ///< interval placement; s measured from line.p0

  std::vector<int> orders;
  Vec2 center = Vec2::Zero();
  double radius = 1.0;

  std::size_t size() const { return kind == BasisKind::Interval ? kappa.size() : orders.size(); }
  bool is_real() const { return kind == BasisKind::Interval; }

  /// Mode j at arclength s (intervals) or angle theta (circles).
  std::complex<double> eval(std::size_t j, double t) const;
  /// Derivative with respect to s (intervals only).
  double deriv(std::size_t j, double s) const;
  /// Mode j at a point on the interface.
  std::complex<double> eval_at(std::size_t j, const Vec2& p) const;
  /// Arclength (intervals) or angle (circles) of a point on the interface.
  double coordinate(const Vec2& p) const;
};

/// Cross-section eigenpairs on [0, L] with boundary operators left at s = 0 and right at s = L
/// (both with respect to the outward normal of the interval).
TransverseBasis interval_basis(double L, const RobinCoeff& left, const RobinCoeff& right, int M);

/// Fourier basis on a circle of radius rho, M odd.
TransverseBasis circle_basis(double rho, int M, const Vec2& center = Vec2::Zero());

/// One entry of the global transverse ordering.
struct GlobalMode {
  std::size_t basis = 0;  ///< index into the per-interface basis list
  std::size_t local = 0;  ///< index within that basis
  double kappa = 0.0;
};

/// Stable merge of all per-interface modes sorted by kappa, truncated to M entries.
std::vector<GlobalMode> global_order(const std::vector<TransverseBasis>& bases, int M);

/// Per-interface bases for a geometry: intervals for each end, or a circle for the artificial
/// boundary. Interval bases carry M modes each so the global truncation can pick any of them.
std::vector<TransverseBasis> interface_bases(const GeometryDesc& g, int M);

constexpr int kDefaultIntervalModes = 20;
constexpr int kDefaultCircleModes = 21;

}  // namespace spectral_ends

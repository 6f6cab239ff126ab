#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral_ends/ntd.hpp"

namespace spectral_ends {

/// Outgoing-wave convention for channels whose threshold lies above the scan region.
enum class ClosedChannels {
  Decaying,  ///< closed channels keep the exponentially decaying solution
  Growing,   ///< every channel uses +1/sqrt(kappa - lambda), the continued open-channel form
};

struct ResonanceOptions {
  ClosedChannels closed = ClosedChannels::Decaying;
  /// Channels with kappa below this value are open. NaN selects them per node by Re lambda.
  double open_below = std::numeric_limits<double>::quiet_NaN();
};

/// Exterior NtD diagonal continued to complex lambda: H_n / (k H_n') on a circle, or
/// +-1/sqrt(kappa - lambda) on cylindrical ends (sign + for open channels).
Eigen::VectorXcd exterior_ntd(const NtdData& d, cdouble lambda, const ResonanceOptions& opt = {});

/// A(lambda) = R(lambda) - T_ext(lambda) on all M modes; singular at resonances. For real
/// lambda below the first threshold it is singular exactly at the eigenvalues.
Eigen::MatrixXcd resonance_matrix(const NtdData& d, cdouble lambda, const ResonanceOptions& opt = {});

struct NodeValue {
  double cond = std::numeric_limits<double>::quiet_NaN();
  double logabsdet = std::numeric_limits<double>::quiet_NaN();
  double smin = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

/// Condition number, smallest singular value and log|det(A T_ext^{-1})| at one point.
/// Points within 1e-9 of a pole or threshold are moved by one part in 1e6 first.
NodeValue evaluate_node(const NtdData& d, cdouble lambda, const ResonanceOptions& opt = {});

using NodeFn = std::function<NodeValue(cdouble)>;

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 2;

  double at(int i) const {
    if (count == 1) return lo;
    return i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1);
  }
  double spacing() const { return count > 1 ? (hi - lo) / (count - 1) : 0.0; }
};

/// Parses "lo:hi:n".
GridAxis parse_axis(const std::string& text);

/// Row-major grid of node values: row r is im.at(r), column c is re.at(c).
struct ScanGrid {
  GridAxis re;
  GridAxis im;
  std::vector<NodeValue> values;

  const NodeValue& at(int r, int c) const { return values[static_cast<std::size_t>(r) * re.count + c]; }
  cdouble node(int r, int c) const { return {re.at(c), im.at(r)}; }
};

/// Evaluates every node with `workers` threads; results are independent of the worker count.
ScanGrid condition_scan(const NodeFn& fn, const GridAxis& re, const GridAxis& im, int workers = 1);
ScanGrid condition_scan(const NtdData& d, const GridAxis& re, const GridAxis& im, const ResonanceOptions& opt,
                        int workers = 1);

struct ResonanceEstimate {
  cdouble lambda;
  int zoom_level = 1;
  double final_grid_spacing = 0.0;
  double quality = 0.0;     ///< condition number at the estimate
  double logabsdet = 0.0;
  std::optional<double> nearby_neumann_pole;
  bool unresolved_pair = false;  ///< within 2 final spacings of a Neumann eigenvalue
  bool det_minimum = false;      ///< log|det| is a local minimum on the final grid
  bool unstable = false;         ///< flagged as sensitive to truncation; see warnings
  std::vector<std::string> warnings;
};

struct ZoomOptions {
  int levels = 3;
  int max_candidates = 8;
  int workers = 1;
  std::vector<double> poles;  ///< Neumann eigenvalues used for annotation
};

/// Local maxima of the condition number (strictly above every neighbour), each refined
/// on successively finer grids of the same node counts spanning 3 spacings.
std::vector<ResonanceEstimate> locate_and_zoom(const NodeFn& fn, const ScanGrid& scan, const ZoomOptions& opt,
                                               std::vector<std::string>* warnings = nullptr);

}  // namespace spectral_ends

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectral_ends/resonance.hpp"
#include "spectral_ends/solver.hpp"

namespace spectral_ends {

/// Every knob of a run. Unset optionals are resolved to concrete defaults by `resolve`
/// so the echoed configuration always states what was used.
struct RunConfig {
  std::string command;
  std::string geometry;
  std::map<std::string, double> params;
  int refine = 3;
  std::optional<double> h0;
  double lambda_max = 50.0;
  std::optional<int> M;
  std::optional<int> J;  ///< unset: lowest window above the spectral floor
  double lambda0 = -1.0;
  std::optional<double> search_lo;
  std::optional<double> search_hi;
  double tol = 1e-8;
  double embedded_threshold = 1e-3;
  std::optional<GridAxis> re;
  std::optional<GridAxis> im;
  int zoom_levels = 3;
  int max_candidates = 8;
  int workers = 1;
  ClosedChannels closed = ClosedChannels::Decaying;
};

/// Fills defaults that depend on the geometry (M, J, search range, h0).
RunConfig resolve(const RunConfig& in, const GeometryDesc& g);

/// Shared front half of every run: mesh, interior eigenproblems, transverse bases, NtD data.
struct Prepared {
  RunConfig config;  ///< resolved
  GeometryDesc geometry;
  std::size_t nodes = 0;
  std::size_t triangles = 0;
  InteriorEigenBasis basis;
  std::optional<std::vector<double>> nu;
  std::vector<TransverseBasis> bases;
  std::vector<GlobalMode> modes;
  NtdData ntd;
  std::map<std::string, double> seconds;  ///< wall time per stage
  std::vector<std::string> warnings;
};

Prepared prepare(const RunConfig& cfg, bool want_dirichlet);

struct WindowResult {
  SearchReport report;
  CountBound bound;
  bool within_bound = true;
};

struct EigenOutcome {
  Prepared prep;
  std::vector<WindowResult> windows;
  double spectral_floor = 0.0;
};

EigenOutcome run_eigen(const RunConfig& cfg);

struct ScanOutcome {
  Prepared prep;
  ScanGrid grid;
  std::vector<ResonanceEstimate> estimates;
  double open_below = 0.0;
  std::vector<double> poles_in_range;  ///< Neumann eigenvalues inside the real range of the grid
};

ScanOutcome run_resonance_scan(const RunConfig& cfg);

/// Lower end of the default real search range: 0 without a potential (the quadratic form
/// is nonnegative for the supported boundary conditions), -10 with one.
double spectral_floor(const GeometryDesc& g);

}  // namespace spectral_ends

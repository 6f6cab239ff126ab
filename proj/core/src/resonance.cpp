#include "spectral_ends/resonance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(8);
  os << x;
  return os.str();
}

std::string fmt(cdouble z) { return fmt(z.real()) + (z.imag() < 0 ? " - " : " + ") + fmt(std::abs(z.imag())) + "i"; }

bool near(cdouble lambda, double p) { return std::abs(lambda - p) <= 1e-9 * std::max(1.0, std::abs(p)); }

}  // namespace

Eigen::VectorXcd exterior_ntd(const NtdData& d, cdouble lambda, const ResonanceOptions& opt) {
  if (d.circle) {
    const DiscDiag dd = disc_ntd_diag(d.radius, lambda, d.orders);
    if (dd.any_flagged()) throw NumericalError("resonance", "exterior disc entry has a vanishing derivative at " + fmt(lambda));
    return dd.values;
  }
  const SliceSpec all = SliceSpec::full(d.M());
  Eigen::VectorXcd t = cylinder_ntd_diag(d.kappa, lambda, BranchMode::PositiveReal, all);
  if (opt.closed == ClosedChannels::Growing) return t;
  const double split = std::isnan(opt.open_below) ? lambda.real() : opt.open_below;
  for (int k = 0; k < d.M(); ++k) {
    if (d.kappa[k] >= split) t[k] = -t[k];
  }
  return t;
}

Eigen::MatrixXcd resonance_matrix(const NtdData& d, cdouble lambda, const ResonanceOptions& opt) {
  for (double m : d.mu) {
    if (near(lambda, m)) throw InvalidArgument("resonance_matrix: lambda is on the Neumann eigenvalue " + fmt(m));
  }
  if (!d.circle) {
    for (double k : d.kappa) {
      if (near(lambda, k)) throw InvalidArgument("resonance_matrix: lambda is on the threshold " + fmt(k));
    }
  }
  Eigen::MatrixXcd A = interior_ntd(d, lambda, SliceSpec::full(d.M()));
  A.diagonal() -= exterior_ntd(d, lambda, opt);
  return A;
}

NodeValue evaluate_node(const NtdData& d, cdouble lambda, const ResonanceOptions& opt) {
  auto hazard = [&](cdouble z) {
    for (double m : d.mu) {
      if (near(z, m)) return true;
    }
    if (!d.circle) {
      for (double k : d.kappa) {
        if (near(z, k)) return true;
      }
    }
    return d.circle && std::abs(z) <= 1e-9;
  };
  cdouble z = lambda;
  for (int i = 0; i < 4 && hazard(z); ++i) z += 1e-6 * std::max(1.0, std::abs(z));

  NodeValue v;
  try {
    const Eigen::MatrixXcd A = resonance_matrix(d, z, opt);
    const Eigen::VectorXcd t = exterior_ntd(d, z, opt);
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXcd>(A).singularValues();
    v.smin = s[s.size() - 1];
    v.cond = s[0] / v.smin;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    double ld = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) ld += std::log(std::abs(lu.matrixLU()(i, i))) - std::log(std::abs(t[i]));
    v.logabsdet = ld;
    v.valid = std::isfinite(v.cond) && std::isfinite(v.logabsdet);
  } catch (const Error&) {
    v = NodeValue{};
  }
  return v;
}

GridAxis parse_axis(const std::string& text) {
  GridAxis ax;
  std::string rest = text;
  std::vector<std::string> parts;
  for (std::size_t p; (p = rest.find(':')) != std::string::npos; rest = rest.substr(p + 1)) parts.push_back(rest.substr(0, p));
  parts.push_back(rest);
  if (parts.size() != 3) throw InvalidArgument("grid axis '" + text + "' must look like lo:hi:n");
  try {
    std::size_t used = 0;
    ax.lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("lo");
    ax.hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("hi");
    ax.count = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::logic_error&) {
    throw InvalidArgument("grid axis '" + text + "' must look like lo:hi:n");
  }
  if (ax.count < 2) throw InvalidArgument("grid axis '" + text + "' needs at least 2 nodes");
  if (!(ax.lo < ax.hi)) throw InvalidArgument("grid axis '" + text + "' needs lo < hi");
  return ax;
}

ScanGrid condition_scan(const NodeFn& fn, const GridAxis& re, const GridAxis& im, int workers) {
  if (re.count < 2 || im.count < 2) throw InvalidArgument("scan grids need at least 2 nodes per axis");
  if (im.hi > 0) throw InvalidArgument("scan grids must stay in the closed lower half plane");
  ScanGrid g{re, im, {}};
  const std::size_t n = static_cast<std::size_t>(re.count) * im.count;
  g.values.resize(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      const int r = static_cast<int>(i / re.count), c = static_cast<int>(i % re.count);
      g.values[i] = fn(g.node(r, c));
    }
  };
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return g;
}

ScanGrid condition_scan(const NtdData& d, const GridAxis& re, const GridAxis& im, const ResonanceOptions& opt,
                        int workers) {
  return condition_scan([&](cdouble z) { return evaluate_node(d, z, opt); }, re, im, workers);
}

namespace {

struct Node {
  int r, c;
};

std::vector<Node> neighbours(const ScanGrid& g, int r, int c) {
  std::vector<Node> out;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int rr = r + dr, cc = c + dc;
      if (rr >= 0 && rr < g.im.count && cc >= 0 && cc < g.re.count) out.push_back({rr, cc});
    }
  }
  return out;
}

bool is_local_max(const ScanGrid& g, int r, int c) {
  const NodeValue& v = g.at(r, c);
  if (!v.valid) return false;
  for (const Node& n : neighbours(g, r, c)) {
    const NodeValue& w = g.at(n.r, n.c);
    if (w.valid && !(v.cond > w.cond)) return false;
  }
  return true;
}

bool is_det_min(const ScanGrid& g, int r, int c) {
  const NodeValue& v = g.at(r, c);
  for (const Node& n : neighbours(g, r, c)) {
    const NodeValue& w = g.at(n.r, n.c);
    if (w.valid && w.logabsdet < v.logabsdet) return false;
  }
  return true;
}

/// Edge of the grid other than the physical Im = 0 edge.
bool on_open_edge(const ScanGrid& g, int r, int c) {
  const bool top_is_axis = g.im.hi >= 0.0;
  return c == 0 || c == g.re.count - 1 || r == 0 || (r == g.im.count - 1 && !top_is_axis);
}

Node argmax(const ScanGrid& g) {
  Node best{-1, -1};
  double bc = -1.0;
  for (int r = 0; r < g.im.count; ++r) {
    for (int c = 0; c < g.re.count; ++c) {
      const NodeValue& v = g.at(r, c);
      if (v.valid && v.cond > bc) {
        bc = v.cond;
        best = {r, c};
      }
    }
  }
  return best;
}

ScanGrid window_scan(const NodeFn& fn, cdouble center, double hre, double him, const ScanGrid& like, int workers) {
  GridAxis re{center.real() - 1.5 * hre, center.real() + 1.5 * hre, like.re.count};
  GridAxis im{center.imag() - 1.5 * him, center.imag() + 1.5 * him, like.im.count};
  if (im.hi > 0) {
    im.lo -= im.hi;
    im.hi = 0.0;
  }
  return condition_scan(fn, re, im, workers);
}

}  // namespace

std::vector<ResonanceEstimate> locate_and_zoom(const NodeFn& fn, const ScanGrid& scan, const ZoomOptions& opt,
                                               std::vector<std::string>* warnings) {
  if (opt.levels < 1) throw InvalidArgument("locate_and_zoom: levels must be at least 1");
  auto warn = [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  };

  std::vector<Node> cand;
  for (int r = 0; r < scan.im.count; ++r) {
    for (int c = 0; c < scan.re.count; ++c) {
      if (!is_local_max(scan, r, c)) continue;
      if (on_open_edge(scan, r, c)) {
        warn("condition maximum on the scan boundary near " + fmt(scan.node(r, c)) +
             " was not zoomed; widen the grid to resolve it");
        continue;
      }
      cand.push_back({r, c});
    }
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [&](const Node& a, const Node& b) { return scan.at(a.r, a.c).cond > scan.at(b.r, b.c).cond; });
  if (static_cast<int>(cand.size()) > opt.max_candidates) {
    warn(std::to_string(cand.size()) + " local maxima found; zooming into the " + std::to_string(opt.max_candidates) +
         " strongest");
    cand.resize(static_cast<std::size_t>(opt.max_candidates));
  }

  std::vector<ResonanceEstimate> out;
  for (const Node& start : cand) {
    ResonanceEstimate est;
    ScanGrid grid = scan;
    Node at = start;
    for (int level = 2; level <= opt.levels; ++level) {
      cdouble center = grid.node(at.r, at.c);
      const double hre = grid.re.spacing(), him = grid.im.spacing();
      ScanGrid sub = window_scan(fn, center, hre, him, scan, opt.workers);
      Node m = argmax(sub);
      for (int shift = 0; m.r >= 0 && on_open_edge(sub, m.r, m.c) && shift < 4; ++shift) {
        center = sub.node(m.r, m.c);
        sub = window_scan(fn, center, hre, him, scan, opt.workers);
        m = argmax(sub);
        if (shift == 0) est.warnings.push_back("zoom maximum on the window boundary at level " + std::to_string(level) +
                                               "; window shifted");
      }
      if (m.r < 0) {
        est.warnings.push_back("zoom window at level " + std::to_string(level) + " has no valid nodes");
        break;
      }
      grid = std::move(sub);
      at = m;
      est.zoom_level = level;
    }
    const NodeValue& v = grid.at(at.r, at.c);
    est.lambda = grid.node(at.r, at.c);
    est.quality = v.cond;
    est.logabsdet = v.logabsdet;
    est.final_grid_spacing = std::max(grid.re.spacing(), grid.im.spacing());
    est.det_minimum = is_det_min(grid, at.r, at.c);
    if (!est.det_minimum) est.warnings.push_back("log|det| is not a local minimum here (pole-like maximum)");
    for (double mu : opt.poles) {
      const bool inside = mu >= grid.re.lo && mu <= grid.re.hi && grid.im.hi >= 0.0;
      const bool close = std::abs(est.lambda - mu) <= 2 * est.final_grid_spacing;
      if (inside || close) {
        est.nearby_neumann_pole = mu;
        if (close) est.unresolved_pair = true;
      }
    }
    bool duplicate = false;
    for (const auto& e : out) {
      if (std::abs(e.lambda - est.lambda) <= 2 * std::max(e.final_grid_spacing, est.final_grid_spacing)) duplicate = true;
    }
    if (!duplicate) out.push_back(std::move(est));
  }
  std::stable_sort(out.begin(), out.end(), [](const ResonanceEstimate& a, const ResonanceEstimate& b) {
    return a.lambda.real() < b.lambda.real();
  });
  return out;
}

}  // namespace spectral_ends

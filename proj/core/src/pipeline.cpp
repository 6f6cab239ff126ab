#include "spectral_ends/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

/// Runs one named stage, timing it and tagging numerical failures with the stage name.
template <class F>
auto stage(std::map<std::string, double>& seconds, const std::string& name, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto done = [&] { seconds[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      done();
    } else {
      auto r = f();
      done();
      return r;
    }
  } catch (const InvalidArgument&) {
    throw;
  } catch (const NumericalError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError(name, e.what());
  }
}

int auto_window(const std::vector<double>& kappa, double floor) {
  for (int J = 0; J < static_cast<int>(kappa.size()); ++J) {
    const double lo = J == 0 ? -std::numeric_limits<double>::infinity() : kappa[J - 1];
    if (lo < kappa[J] && kappa[J] > floor) return J;
  }
  throw InvalidArgument("no threshold window lies above the spectral floor " + fmt(floor));
}

}  // namespace

double spectral_floor(const GeometryDesc& g) { return g.potential ? -10.0 : 0.0; }

RunConfig resolve(const RunConfig& in, const GeometryDesc& g) {
  RunConfig c = in;
  if (!(c.lambda_max > 0)) throw InvalidArgument("--lambda-max must be positive");
  if (c.refine < 0 || c.refine > 8) throw InvalidArgument("--refine must lie in 0..8");
  if (!(c.tol > 0)) throw InvalidArgument("--tol must be positive");
  if (c.workers < 1) throw InvalidArgument("--workers must be at least 1");
  if (c.zoom_levels < 1) throw InvalidArgument("--zoom-levels must be at least 1");
  if (!c.h0) c.h0 = default_h0(g);
  if (!c.M) c.M = g.artificial_circle ? kDefaultCircleModes : kDefaultIntervalModes;
  if (*c.M < 1) throw InvalidArgument("--M must be positive");
  if (g.artificial_circle && *c.M % 2 == 0) throw InvalidArgument("--M must be odd for an artificial circle");

  if (g.artificial_circle) {
    if (c.J && *c.J != 0) throw InvalidArgument("exterior-circle geometries have no threshold windows; --J must be 0");
    c.J = 0;
    return c;
  }
  const auto bases = interface_bases(g, *c.M);
  std::vector<double> kappa;
  for (const auto& m : global_order(bases, *c.M)) kappa.push_back(m.kappa);
  const double floor = spectral_floor(g);
  if (!c.J) c.J = auto_window(kappa, floor);
  const auto [wlo, whi] = threshold_window(kappa, *c.J);
  if (!c.search_lo) c.search_lo = std::max(floor, wlo);
  if (!c.search_hi) c.search_hi = std::min(whi, c.lambda_max);
  if (!(*c.search_lo < *c.search_hi)) {
    throw InvalidArgument("search range [" + fmt(*c.search_lo) + ", " + fmt(*c.search_hi) + "] is empty");
  }
  if (*c.search_hi > c.lambda_max) {
    throw InvalidArgument("search range must stay below --lambda-max for the counting bound");
  }
  return c;
}

Prepared prepare(const RunConfig& cfg, bool want_dirichlet) {
  Prepared p;
  p.geometry = stage(p.seconds, "geometry", [&] { return build_preset(cfg.geometry, cfg.params); });
  p.config = resolve(cfg, p.geometry);
  const RunConfig& c = p.config;

  Mesh mesh = stage(p.seconds, "mesh", [&] {
    Mesh m = generate(p.geometry, *c.h0);
    for (int r = 0; r < c.refine; ++r) m = refine(m, p.geometry);
    return m;
  });
  p.nodes = mesh.nodes.size();
  p.triangles = mesh.triangles.size();

  const DiscreteOperator op =
      stage(p.seconds, "assemble", [&] { return assemble(mesh, p.geometry, InterfaceBc::Neumann); });
  p.basis = stage(p.seconds, "neumann-eigs", [&] { return neumann_eigs(op, c.lambda_max); });
  if (p.basis.mu.empty()) throw NumericalError("neumann-eigs", "no Neumann eigenvalues below --lambda-max");
  if (want_dirichlet) {
    p.nu = stage(p.seconds, "dirichlet-eigs", [&] {
      const DiscreteOperator dop = assemble(mesh, p.geometry, InterfaceBc::Dirichlet);
      return dirichlet_eigs(dop, c.lambda_max);
    });
  }
  stage(p.seconds, "transverse", [&] {
    p.bases = interface_bases(p.geometry, *c.M);
    p.modes = global_order(p.bases, *c.M);
  });
  if (static_cast<int>(p.modes.size()) < *c.M) {
    p.warnings.push_back("only " + std::to_string(p.modes.size()) + " transverse modes available; M reduced");
  }
  p.ntd = stage(p.seconds, "ntd", [&] { return build_ntd(op, p.basis, p.bases, p.modes, c.lambda0); });
  p.ntd.J = *c.J;
  if (p.ntd.r0_asymmetry > 1e-6) {
    p.warnings.push_back("reference matrix asymmetry " + fmt(p.ntd.r0_asymmetry) + " exceeds 1e-6");
  }
  return p;
}

EigenOutcome run_eigen(const RunConfig& cfg) {
  EigenOutcome out;
  out.prep = prepare(cfg, true);
  const RunConfig& c = out.prep.config;
  if (out.prep.geometry.artificial_circle) {
    throw InvalidArgument("eigen needs a geometry with cylindrical ends; use resonance-scan for " + c.geometry);
  }
  out.spectral_floor = spectral_floor(out.prep.geometry);

  WindowResult w;
  SearchOptions so;
  so.lo = *c.search_lo;
  so.hi = *c.search_hi;
  so.tol = c.tol;
  so.embedded_threshold = c.embedded_threshold;
  w.report = stage(out.prep.seconds, "root-search", [&] { return find_eigenvalues(out.prep.ntd, *c.J, so); });

  const double L2 = w.report.intervals.empty() ? so.hi : w.report.intervals.back().b;
  w.bound = count_bound(out.prep.basis.mu, *out.prep.nu, L2, c.lambda_max);
  w.bound.K = std::min(w.bound.K, out.prep.ntd.M() - *c.J);
  if (w.bound.clamped) out.prep.warnings.push_back("negative counting bound clamped to 0 (discretization artifact)");
  int found = 0;
  for (const auto& f : w.report.findings) found += f.multiplicity;
  w.within_bound = found <= w.bound.K;
  if (!w.within_bound) {
    out.prep.warnings.push_back(std::to_string(found) + " findings exceed the counting bound K = " +
                                std::to_string(w.bound.K));
  }
  out.windows.push_back(std::move(w));
  return out;
}

ScanOutcome run_resonance_scan(const RunConfig& cfg) {
  if (!cfg.re || !cfg.im) throw InvalidArgument("resonance-scan needs --re lo:hi:n and --im lo:hi:n");
  if (cfg.im->hi > 0) throw InvalidArgument("--im must satisfy hi <= 0 (lower half plane)");
  ScanOutcome out;
  out.prep = prepare(cfg, false);
  const RunConfig& c = out.prep.config;
  const NtdData& d = out.prep.ntd;

  ResonanceOptions ro;
  ro.closed = c.closed;
  out.open_below = 0.5 * (c.re->lo + c.re->hi);
  ro.open_below = out.open_below;
  if (!d.circle) {
    for (double k : d.kappa) {
      if (k >= c.re->lo && k <= c.re->hi) {
        out.prep.warnings.push_back("threshold " + fmt(k) + " lies inside the real scan range; channels are split at " +
                                    fmt(out.open_below));
      }
    }
  }
  for (double m : d.mu) {
    if (m >= c.re->lo && m <= c.re->hi) out.poles_in_range.push_back(m);
  }

  const NodeFn fn = [&](cdouble z) { return evaluate_node(d, z, ro); };
  out.grid = stage(out.prep.seconds, "scan", [&] { return condition_scan(fn, *c.re, *c.im, c.workers); });
  ZoomOptions zo;
  zo.levels = c.zoom_levels;
  zo.max_candidates = c.max_candidates;
  zo.workers = c.workers;
  zo.poles = d.mu;
  out.estimates = stage(out.prep.seconds, "zoom", [&] { return locate_and_zoom(fn, out.grid, zo, &out.prep.warnings); });

  for (auto& e : out.estimates) {
    if (e.unresolved_pair) {
      e.warnings.push_back("unresolved pole/zero pair: within two final spacings of the Neumann eigenvalue " +
                           fmt(*e.nearby_neumann_pole));
    }
    if (out.prep.geometry.potential) {
      e.unstable = true;
      e.warnings.push_back("instability: the potential is truncated at the artificial circle, so the estimate "
                           "moves with its radius and with refinement");
    }
    if (std::abs(e.lambda.imag()) > 1e-2 * std::abs(e.lambda.real())) {
      e.unstable = true;
      e.warnings.push_back("instability: far from the real axis, treat as qualitative");
    }
  }
  return out;
}

}  // namespace spectral_ends

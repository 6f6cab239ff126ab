#include "spectral_ends/report.hpp"

#include <cmath>
#include <iomanip>

#include <json.hpp>

namespace spectral_ends {

namespace {

using nlohmann::json;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json axis(const GridAxis& a) { return {{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}}; }

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["geometry"] = c.geometry;
  j["params"] = c.params;
  j["refine"] = c.refine;
  j["h0"] = c.h0 ? json(*c.h0) : json(nullptr);
  j["lambda_max"] = c.lambda_max;
  j["M"] = c.M ? json(*c.M) : json(nullptr);
  j["J"] = c.J ? json(*c.J) : json(nullptr);
  j["lambda0"] = c.lambda0;
  j["search_lo"] = c.search_lo ? num(*c.search_lo) : json(nullptr);
  j["search_hi"] = c.search_hi ? num(*c.search_hi) : json(nullptr);
  j["tol"] = c.tol;
  j["embedded_threshold"] = c.embedded_threshold;
  j["re"] = c.re ? axis(*c.re) : json(nullptr);
  j["im"] = c.im ? axis(*c.im) : json(nullptr);
  j["zoom_levels"] = c.zoom_levels;
  j["max_candidates"] = c.max_candidates;
  j["workers"] = c.workers;
  j["closed_channels"] = c.closed == ClosedChannels::Decaying ? "decaying" : "growing";
  return j;
}

json common(const Prepared& p, const std::string& kind, bool timing) {
  json j;
  j["format"] = "spectral-ends result v1";
  j["kind"] = kind;
  j["config"] = config_json(p.config);
  json geo;
  geo["preset"] = p.geometry.preset;
  geo["params"] = p.geometry.params;
  geo["interfaces"] = p.geometry.interface_count();
  geo["artificial_circle"] = p.geometry.artificial_circle ? json(p.geometry.artificial_circle->radius) : json(nullptr);
  geo["potential"] = p.geometry.potential.has_value();
  j["geometry"] = geo;
  j["mesh"] = {{"nodes", p.nodes}, {"triangles", p.triangles}};
  json kappa = json::array();
  for (double k : p.ntd.kappa) kappa.push_back(k);
  j[p.ntd.circle ? "circle_mode_kappa" : "thresholds"] = kappa;
  if (p.ntd.circle) j["circle_orders"] = p.ntd.orders;
  j["neumann"] = {{"count", p.basis.mu.size()}, {"method", p.basis.method}};
  if (p.nu) j["dirichlet"] = {{"count", p.nu->size()}};
  j["diagnostics"] = {{"r0_asymmetry", p.ntd.r0_asymmetry}, {"N", p.ntd.N()}, {"M", p.ntd.M()}};
  j["warnings"] = p.warnings;
  if (timing) j["timing_seconds"] = p.seconds;
  return j;
}

}  // namespace

std::string config_document(const RunConfig& cfg) { return config_json(cfg).dump(2); }

std::string eigen_document(const EigenOutcome& out, bool timing) {
  json j = common(out.prep, "eigen", timing);
  j["spectral_floor"] = out.spectral_floor;
  json windows = json::array();
  json all = json::array();
  for (const auto& w : out.windows) {
    const SearchReport& r = w.report;
    json jw;
    jw["J"] = r.J;
    jw["window"] = {num(r.window_lo), num(r.window_hi)};
    jw["count_bound"] = {{"K", w.bound.K},
                         {"mu_below", w.bound.mu_below},
                         {"nu_below", w.bound.nu_below},
                         {"clamped", w.bound.clamped},
                         {"findings_within_bound", w.within_bound}};
    json ivs = json::array();
    for (const auto& iv : r.intervals) ivs.push_back({{"a", iv.a}, {"b", iv.b}, {"count_a", iv.count_a}, {"count_b", iv.count_b}});
    jw["pole_free_intervals"] = ivs;
    jw["audit_worst_decrease"] = r.audit_worst_decrease;
    jw["warnings"] = r.warnings;
    for (const auto& f : r.findings) {
      json jf;
      jf["lambda"] = f.lambda;
      jf["sqrt_lambda"] = f.lambda >= 0 ? json(std::sqrt(f.lambda)) : json(nullptr);
      jf["bracket"] = {f.bracket_lo, f.bracket_hi};
      jf["multiplicity"] = f.multiplicity;
      jf["sigma_index"] = f.sigma_index;
      jf["J"] = r.J;
      jf["window"] = {num(f.window_lo), num(f.window_hi)};
      jf["coefficients"] = std::vector<double>(f.c.data(), f.c.data() + f.c.size());
      if (f.has_orth) {
        jf["orth_residual"] = f.orth_residual;
        jf["embedded_flag"] = f.embedded_flag;
        jf["embedded_flag_note"] = "heuristic: orth_residual below the threshold suggests an embedded eigenvalue";
      } else {
        jf["orth_residual"] = nullptr;
        jf["embedded_flag"] = nullptr;
      }
      all.push_back(jf);
    }
    windows.push_back(jw);
  }
  j["windows"] = windows;
  j["findings"] = all;
  return j.dump(2);
}

std::string scan_document(const ScanOutcome& out, bool timing) {
  json j = common(out.prep, "resonance-scan", timing);
  json scan;
  scan["re"] = axis(out.grid.re);
  scan["im"] = axis(out.grid.im);
  scan["open_below"] = out.prep.ntd.circle ? json(nullptr) : json(out.open_below);
  scan["neumann_poles_in_range"] = out.poles_in_range;
  std::size_t invalid = 0;
  for (const auto& v : out.grid.values) invalid += v.valid ? 0 : 1;
  scan["invalid_nodes"] = invalid;
  j["scan"] = scan;
  json est = json::array();
  for (const auto& e : out.estimates) {
    const cdouble k = branch_sqrt(e.lambda, BranchMode::NegativeImag);
    json je;
    je["re"] = e.lambda.real();
    je["im"] = e.lambda.imag();
    je["sqrt_re"] = k.real();
    je["sqrt_im"] = k.imag();
    je["zoom_level"] = e.zoom_level;
    je["final_grid_spacing"] = e.final_grid_spacing;
    je["quality"] = num(e.quality);
    je["logabsdet"] = num(e.logabsdet);
    je["nearby_neumann_pole"] = e.nearby_neumann_pole ? json(*e.nearby_neumann_pole) : json(nullptr);
    je["label"] = e.unresolved_pair ? "unresolved pole/zero pair" : (e.det_minimum ? "resonance" : "pole-like maximum");
    je["det_minimum"] = e.det_minimum;
    je["unstable"] = e.unstable;
    je["warnings"] = e.warnings;
    est.push_back(je);
  }
  j["estimates"] = est;
  return j.dump(2);
}

void write_scan_csv(std::ostream& os, const ScanGrid& grid) {
  os << "re,im,cond,logabsdet\n";
  os << std::setprecision(12);
  for (int r = 0; r < grid.im.count; ++r) {
    for (int c = 0; c < grid.re.count; ++c) {
      const NodeValue& v = grid.at(r, c);
      const cdouble z = grid.node(r, c);
      os << z.real() << ',' << z.imag() << ',';
      if (v.valid) {
        os << v.cond << ',' << v.logabsdet << '\n';
      } else {
        os << "nan,nan\n";
      }
    }
  }
}

}  // namespace spectral_ends

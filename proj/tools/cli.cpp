#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "spectral_ends/error.hpp"
#include "spectral_ends/pipeline.hpp"
#include "spectral_ends/report.hpp"
#include "spectral_ends/validate.hpp"

namespace spectral_ends::cli {

namespace {

struct Flags {
  std::string geometry;
  std::map<std::string, double> named;  // --delta, --radius, ... keyed by parameter name
  std::vector<std::string> sets;
  int refine = 3;
  double h0 = 0.0;
  double lambda_max = 50.0;
  int M = 0;
  int J = 0;
  double lambda0 = -1.0;
  double search_lo = 0.0;
  double search_hi = 0.0;
  double tol = 1e-8;
  double embedded_threshold = 1e-3;
  std::string re;
  std::string im;
  int zoom_levels = 3;
  int max_candidates = 8;
  int workers = 1;
  std::string closed = "decaying";
  std::string output;
  std::string csv;
  std::string mesh_out;
  bool check = false;
  bool no_timing = false;
  bool inject_fault = false;
};

/// Options whose absence means "use the geometry-dependent default".
struct Presence {
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

const std::vector<std::pair<std::string, std::string>> kParamFlags{
    {"delta", "obstructed-strip: vertical obstacle offset"},
    {"radius", "obstructed-strip: obstacle radius"},
    {"eps", "cshape-cavity: opening half-width"},
    {"rart", "cshape-cavity, gaussian-potential: artificial circle radius"},
};

void add_geometry(CLI::App* sub, Flags& f, Presence& p) {
  sub->add_option("--geometry", f.geometry, "Geometry preset")
      ->required()
      ->check(CLI::IsMember(preset_names()));
  for (const auto& [name, help] : kParamFlags) {
    p.opts[name] = sub->add_option("--" + name, f.named[name], help);
  }
  sub->add_option("--set", f.sets, "Extra preset parameter as key=value (repeatable)");
  sub->add_option("--refine", f.refine, "Uniform refinement steps")->capture_default_str();
  p.opts["h0"] = sub->add_option("--h0", f.h0, "Initial mesh size (default: preset feature size)");
}

void add_run(CLI::App* sub, Flags& f, Presence& p) {
  add_geometry(sub, f, p);
  sub->add_option("--lambda-max", f.lambda_max, "Cutoff for the interior eigenproblems")->capture_default_str();
  p.opts["M"] = sub->add_option("--M", f.M, "Number of transverse modes (default 20, or 21 for a circle)");
  p.opts["J"] = sub->add_option("--J", f.J, "Threshold window index (default: lowest window above the floor)");
  sub->add_option("--lambda0", f.lambda0, "Reference spectral parameter")->capture_default_str();
  sub->add_option("--workers", f.workers, "Worker threads for scans")->capture_default_str();
  sub->add_flag("--no-timing", f.no_timing, "Omit wall-clock timings from the document");
  sub->add_option("--output", f.output, "Write the result document to this file instead of standard output");
}

void add_scan(CLI::App* sub, Flags& f, Presence& p) {
  add_run(sub, f, p);
  sub->add_option("--re", f.re, "Real axis of the grid, lo:hi:n")->required();
  sub->add_option("--im", f.im, "Imaginary axis of the grid, lo:hi:n with hi <= 0")->required();
  sub->add_option("--zoom-levels", f.zoom_levels, "Zoom levels including the initial grid")->capture_default_str();
  sub->add_option("--max-candidates", f.max_candidates, "Local maxima refined per scan")->capture_default_str();
  sub->add_option("--closed-channels", f.closed, "Branch for closed cylinder channels")
      ->check(CLI::IsMember({"decaying", "growing"}))
      ->capture_default_str();
  sub->add_option("--csv", f.csv, "Write the scan grid as CSV to this file");
}

void add_eigen(CLI::App* sub, Flags& f, Presence& p) {
  add_run(sub, f, p);
  p.opts["search-lo"] = sub->add_option("--search-lo", f.search_lo, "Lower end of the search range");
  p.opts["search-hi"] = sub->add_option("--search-hi", f.search_hi, "Upper end of the search range");
  sub->add_option("--tol", f.tol, "Bisection tolerance")->capture_default_str();
  sub->add_option("--embedded-threshold", f.embedded_threshold, "Orthogonality residual flag level")
      ->capture_default_str();
}

std::map<std::string, double> geometry_params(const Flags& f, const Presence& p) {
  std::map<std::string, double> params;
  for (const auto& [name, help] : kParamFlags) {
    if (p.given(name)) params[name] = f.named.at(name);
  }
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != kv.size() - eq - 1) throw InvalidArgument("--set value is not a number: '" + kv + "'");
    params[kv.substr(0, eq)] = v;
  }
  return params;
}

RunConfig make_config(const std::string& command, const Flags& f, const Presence& p) {
  RunConfig c;
  c.command = command;
  c.geometry = f.geometry;
  c.params = geometry_params(f, p);
  c.refine = f.refine;
  if (p.given("h0")) c.h0 = f.h0;
  c.lambda_max = f.lambda_max;
  if (p.given("M")) c.M = f.M;
  if (p.given("J")) c.J = f.J;
  c.lambda0 = f.lambda0;
  if (p.given("search-lo")) c.search_lo = f.search_lo;
  if (p.given("search-hi")) c.search_hi = f.search_hi;
  c.tol = f.tol;
  c.embedded_threshold = f.embedded_threshold;
  if (!f.re.empty()) c.re = parse_axis(f.re);
  if (!f.im.empty()) c.im = parse_axis(f.im);
  c.zoom_levels = f.zoom_levels;
  c.max_candidates = f.max_candidates;
  c.workers = f.workers;
  c.closed = f.closed == "growing" ? ClosedChannels::Growing : ClosedChannels::Decaying;
  return c;
}

void emit(const std::string& doc, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << doc << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open output file " + path);
  os << doc << '\n';
}

int cmd_eigen(const Flags& f, const Presence& p, std::ostream& out, std::ostream& err) {
  const EigenOutcome r = run_eigen(make_config("eigen", f, p));
  emit(eigen_document(r, !f.no_timing), f.output, out);
  for (const auto& w : r.prep.warnings) err << "warning: " << w << '\n';
  if (!f.output.empty()) {
    for (const auto& win : r.windows) {
      out << "window J=" << win.report.J << ": " << win.report.findings.size() << " finding(s)\n";
      for (const auto& fi : win.report.findings) out << "  lambda = " << std::setprecision(10) << fi.lambda << '\n';
    }
  }
  return kOk;
}

int cmd_scan(const Flags& f, const Presence& p, std::ostream& out, std::ostream& err) {
  const ScanOutcome r = run_resonance_scan(make_config("resonance-scan", f, p));
  emit(scan_document(r, !f.no_timing), f.output, out);
  if (!f.csv.empty()) {
    std::ofstream os(f.csv);
    if (!os) throw InvalidArgument("cannot open CSV file " + f.csv);
    write_scan_csv(os, r.grid);
  }
  for (const auto& w : r.prep.warnings) err << "warning: " << w << '\n';
  if (!f.output.empty()) {
    out << r.estimates.size() << " estimate(s)\n";
    for (const auto& e : r.estimates) {
      out << "  lambda = " << std::setprecision(10) << e.lambda.real() << (e.lambda.imag() < 0 ? " - " : " + ")
          << std::abs(e.lambda.imag()) << "i\n";
    }
  }
  return kOk;
}

int cmd_mesh(const Flags& f, const Presence& p, std::ostream& out) {
  if (f.mesh_out.empty() && !f.check) throw InvalidArgument("mesh needs --out FILE, --check, or both");
  if (f.refine < 0 || f.refine > 8) throw InvalidArgument("--refine must lie in 0..8");
  const GeometryDesc g = build_preset(f.geometry, geometry_params(f, p));
  const double h0 = p.given("h0") ? f.h0 : default_h0(g);
  if (!(h0 > 0)) throw InvalidArgument("--h0 must be positive");
  Mesh m;
  try {
    m = generate(g, h0);
    for (int i = 0; i < f.refine; ++i) m = refine(m, g);
  } catch (const InvalidArgument&) {
    throw;
  } catch (const NumericalError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError("mesh", e.what());
  }
  if (!f.mesh_out.empty()) write_mesh(m, f.mesh_out);
  if (f.check) {
    const MeshQuality q = measure(m, g);
    const double area_err = g.exact_area > 0 ? std::abs(q.total_area - g.exact_area) / g.exact_area : 0.0;
    out << "nodes " << m.nodes.size() << "\ntriangles " << m.triangles.size() << '\n'
        << std::setprecision(6) << "min_angle_deg " << q.min_angle_deg << "\nmax_angle_deg " << q.max_angle_deg
        << "\narea " << q.total_area << "\nexact_area " << g.exact_area << "\nrelative_area_error " << area_err
        << "\nmax_boundary_distance " << q.max_boundary_distance << '\n';
  }
  return kOk;
}

int cmd_validate(const Flags& f, std::ostream& out) {
  ValidateOptions opt;
  opt.inject_branch_fault = f.inject_fault;
  int failed = 0;
  for (const SuiteResult& s : run_validation(opt)) {
    failed += s.passed ? 0 : 1;
    out << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << std::fixed << std::setprecision(1) << s.seconds
        << " s): " << s.detail << '\n';
    out << std::defaultfloat;
  }
  out << (failed == 0 ? "all suites passed" : std::to_string(failed) + " suite(s) failed") << '\n';
  return failed == 0 ? kOk : kSuiteFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Eigenvalues and resonances of planar domains with cylindrical or exterior ends", "spectral-ends"};
  app.require_subcommand(1);
  Flags f;
  Presence pe, ps, pm;

  CLI::App* eigen = app.add_subcommand("eigen", "Find eigenvalues in a threshold window");
  add_eigen(eigen, f, pe);
  CLI::App* scan = app.add_subcommand("resonance-scan", "Scan the condition number over a complex grid and zoom");
  add_scan(scan, f, ps);
  CLI::App* mesh = app.add_subcommand("mesh", "Generate, refine and write or check a mesh");
  add_geometry(mesh, f, pm);
  mesh->add_option("--out", f.mesh_out, "Mesh file to write");
  mesh->add_flag("--check", f.check, "Print mesh quality and the area error");
  CLI::App* validate = app.add_subcommand("validate", "Run the oracle and property suites");
  validate->add_flag("--inject-fault", f.inject_fault)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kInvalidFlags;
  }

  try {
    if (eigen->parsed()) return cmd_eigen(f, pe, out, err);
    if (scan->parsed()) return cmd_scan(f, ps, out, err);
    if (mesh->parsed()) return cmd_mesh(f, pm, out);
    return cmd_validate(f, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidFlags;
  } catch (const NumericalError& e) {
    err << "numerical failure in stage '" << e.stage() << "': " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace spectral_ends::cli

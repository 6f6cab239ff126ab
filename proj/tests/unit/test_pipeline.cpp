#include <doctest.h>

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "spectral_ends/error.hpp"
#include "spectral_ends/pipeline.hpp"
#include "spectral_ends/report.hpp"

using namespace spectral_ends;
using nlohmann::json;

namespace {

RunConfig config(const std::string& geometry, int refine) {
  RunConfig c;
  c.command = "eigen";
  c.geometry = geometry;
  c.refine = refine;
  return c;
}

}  // namespace

TEST_CASE("resolve fills geometry-dependent defaults") {
  const RunConfig bent = resolve(config("bent-waveguide", 1), build_preset("bent-waveguide", {}));
  CHECK(*bent.M == 20);
  CHECK(*bent.J == 0);
  CHECK(*bent.search_lo == 0.0);
  CHECK(*bent.search_hi == doctest::Approx(std::numbers::pi * std::numbers::pi / 4));
  CHECK(bent.h0.has_value());

  // the first threshold of the strip is 0, so the lowest window above the floor is J = 1
  const GeometryDesc strip = build_preset("obstructed-strip", {{"delta", 0.0}, {"radius", 0.5}});
  const RunConfig s = resolve(config("obstructed-strip", 1), strip);
  CHECK(*s.J == 1);
  CHECK(*s.search_lo == doctest::Approx(0.0));

  const GeometryDesc cshape = build_preset("cshape-cavity", {});
  const RunConfig c = resolve(config("cshape-cavity", 1), cshape);
  CHECK(*c.M == 21);
  CHECK(*c.J == 0);
}

TEST_CASE("resolve rejects inconsistent settings") {
  const GeometryDesc bent = build_preset("bent-waveguide", {});
  auto with = [&](auto edit) {
    RunConfig c = config("bent-waveguide", 1);
    edit(c);
    return c;
  };
  CHECK_THROWS_AS(resolve(with([](RunConfig& c) { c.lambda_max = 0; }), bent), InvalidArgument);
  CHECK_THROWS_AS(resolve(with([](RunConfig& c) { c.refine = -1; }), bent), InvalidArgument);
  CHECK_THROWS_AS(resolve(with([](RunConfig& c) { c.tol = 0; }), bent), InvalidArgument);
  CHECK_THROWS_AS(resolve(with([](RunConfig& c) { c.workers = 0; }), bent), InvalidArgument);
  CHECK_THROWS_AS(resolve(with([](RunConfig& c) { c.M = 0; }), bent), InvalidArgument);
  CHECK_THROWS_AS(resolve(with([](RunConfig& c) { c.search_lo = 2.0; c.search_hi = 1.0; }), bent), InvalidArgument);
  CHECK_THROWS_AS(resolve(with([](RunConfig& c) { c.lambda_max = 1.0; c.search_hi = 2.0; }), bent), InvalidArgument);

  const GeometryDesc cshape = build_preset("cshape-cavity", {});
  RunConfig even = config("cshape-cavity", 1);
  even.M = 20;
  CHECK_THROWS_AS(resolve(even, cshape), InvalidArgument);
  RunConfig windowed = config("cshape-cavity", 1);
  windowed.J = 1;
  CHECK_THROWS_AS(resolve(windowed, cshape), InvalidArgument);
}

TEST_CASE("run_eigen on the bent waveguide") {
  const EigenOutcome out = run_eigen(config("bent-waveguide", 2));
  REQUIRE(out.windows.size() == 1);
  const WindowResult& w = out.windows[0];
  CHECK(w.bound.K == 1);
  CHECK(w.within_bound);
  REQUIRE(w.report.findings.size() == 1);
  CHECK(w.report.findings[0].lambda == doctest::Approx(2.347).epsilon(2e-3));
  CHECK(out.prep.nu.has_value());
  for (const char* stage : {"geometry", "mesh", "neumann-eigs", "dirichlet-eigs", "ntd"}) {
    CAPTURE(stage);
    CHECK(out.prep.seconds.count(stage) == 1);
  }
}

TEST_CASE("documents without timing are deterministic and echo the configuration") {
  const RunConfig c = config("bent-waveguide", 1);
  const std::string a = eigen_document(run_eigen(c), false);
  const std::string b = eigen_document(run_eigen(c), false);
  CHECK(a == b);

  const json doc = json::parse(a);
  CHECK(doc["kind"] == "eigen");
  CHECK(doc["config"]["geometry"] == "bent-waveguide");
  CHECK(doc["config"]["M"] == 20);
  CHECK(doc["config"]["J"] == 0);
  CHECK_FALSE(doc.contains("timing_seconds"));
  CHECK(doc["windows"][0]["window"][0].is_null());
  CHECK(json::parse(eigen_document(run_eigen(c), true)).contains("timing_seconds"));
}

TEST_CASE("resonance scan documents") {
  RunConfig c = config("bent-waveguide", 1);
  c.command = "resonance-scan";
  c.lambda_max = 30.0;
  c.re = parse_axis("3:6:11");
  c.im = parse_axis("-0.5:0:6");
  c.zoom_levels = 2;
  const ScanOutcome out = run_resonance_scan(c);
  CHECK(out.grid.values.size() == 66);
  const json doc = json::parse(scan_document(out, false));
  CHECK(doc["kind"] == "resonance-scan");
  CHECK(doc["scan"]["re"]["count"] == 11);
  CHECK(doc["config"]["closed_channels"] == "decaying");
  CHECK(doc["estimates"].is_array());
}

TEST_CASE("unknown presets and missing grids are input errors") {
  CHECK_THROWS_AS(run_eigen(config("moebius-strip", 1)), InvalidArgument);
  RunConfig c = config("bent-waveguide", 1);
  c.command = "resonance-scan";
  CHECK_THROWS_AS(run_resonance_scan(c), InvalidArgument);
}

TEST_CASE("spectral floor") {
  CHECK(spectral_floor(build_preset("bent-waveguide", {})) == 0.0);
  CHECK(spectral_floor(build_preset("gaussian-potential", {})) == -10.0);
}

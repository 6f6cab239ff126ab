#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "spectral_ends/mesh.hpp"

using namespace spectral_ends;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("spectral_ends_cli_" + name);
}

}  // namespace

TEST_CASE("eigen prints a parseable document") {
  const Run r = run({"eigen", "--geometry", "bent-waveguide", "--refine", "2", "--no-timing"});
  REQUIRE(r.code == cli::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc["findings"].size() == 1);
  CHECK(doc["findings"][0]["lambda"].get<double>() == doctest::Approx(2.347).epsilon(2e-3));
  CHECK(doc["config"]["refine"] == 2);
  CHECK(doc["config"]["lambda_max"] == 50.0);
}

TEST_CASE("identical flags give identical documents") {
  const std::vector<std::string> args{"eigen", "--geometry", "obstructed-strip", "--delta", "0", "--radius", "0.5",
                                      "--refine", "1", "--no-timing"};
  CHECK(run(args).out == run(args).out);
}

TEST_CASE("scan output is independent of the worker count") {
  std::vector<std::string> args{"resonance-scan", "--geometry", "bent-waveguide", "--refine", "1",
                                "--re", "3:6:7", "--im", "-0.3:0:4", "--no-timing"};
  const Run one = run(args);
  args.insert(args.end(), {"--workers", "3"});
  const Run three = run(args);
  REQUIRE(one.code == cli::kOk);
  REQUIRE(three.code == cli::kOk);
  auto a = nlohmann::json::parse(one.out);
  auto b = nlohmann::json::parse(three.out);
  a["config"].erase("workers");
  b["config"].erase("workers");
  CHECK(a == b);
}

TEST_CASE("--output and --csv write files") {
  const auto doc = scratch("doc.json");
  const auto csv = scratch("grid.csv");
  const Run r = run({"resonance-scan", "--geometry", "bent-waveguide", "--refine", "1", "--re", "3:4:3", "--im",
                     "-0.1:0:2", "--output", doc.string(), "--csv", csv.string()});
  REQUIRE(r.code == cli::kOk);
  std::ifstream d(doc);
  CHECK(nlohmann::json::parse(d)["kind"] == "resonance-scan");
  std::ifstream c(csv);
  std::string header;
  std::getline(c, header);
  CHECK(header == "re,im,cond,logabsdet");
  std::filesystem::remove(doc);
  std::filesystem::remove(csv);
}

TEST_CASE("mesh writes a file that reads back") {
  const auto path = scratch("mesh.txt");
  const Run r = run({"mesh", "--geometry", "rect-test", "--refine", "2", "--out", path.string()});
  REQUIRE(r.code == cli::kOk);
  const Mesh back = read_mesh(path.string());
  const GeometryDesc g = build_preset("rect-test", {});
  const Mesh direct = refine(refine(generate(g, default_h0(g)), g), g);
  CHECK(back.nodes.size() == direct.nodes.size());
  CHECK(back.triangles.size() == direct.triangles.size());
  std::filesystem::remove(path);
}

TEST_CASE("mesh --check reports quality") {
  const Run r = run({"mesh", "--geometry", "cshape-cavity", "--eps", "0.2", "--check"});
  REQUIRE(r.code == cli::kOk);
  std::istringstream is(r.out);
  std::string key;
  double value = 0;
  double min_angle = 0;
  while (is >> key >> value) {
    if (key == "min_angle_deg") min_angle = value;
  }
  CHECK(min_angle >= 20.0);
}

TEST_CASE("invalid flags exit with code 2") {
  CHECK(run({"mesh", "--check"}).code == cli::kInvalidFlags);
  CHECK(run({"eigen", "--geometry", "klein-bottle"}).code == cli::kInvalidFlags);
  CHECK(run({"eigen", "--geometry", "bent-waveguide", "--M", "0"}).code == cli::kInvalidFlags);
  CHECK(run({"eigen", "--geometry", "bent-waveguide", "--h0", "5"}).code == cli::kInvalidFlags);
  CHECK(run({"eigen", "--geometry", "bent-waveguide", "--set", "width"}).code == cli::kInvalidFlags);
  CHECK(run({"resonance-scan", "--geometry", "bent-waveguide", "--re", "3:4:5", "--im", "-1:0.5:5"}).code ==
        cli::kInvalidFlags);
  CHECK(run({"resonance-scan", "--geometry", "bent-waveguide", "--re", "3:4"}).code == cli::kInvalidFlags);
  CHECK(run({}).code == cli::kInvalidFlags);

  const Run missing = run({"mesh"});
  CHECK(missing.code == cli::kInvalidFlags);
  CHECK(missing.err.find("--geometry") != std::string::npos);
}

TEST_CASE("numerical failures exit with code 3 and name the stage") {
  const Run r = run({"eigen", "--geometry", "bent-waveguide", "--refine", "0", "--lambda-max", "0.1"});
  CHECK(r.code == cli::kNumericalFailure);
  CHECK(r.err.find("neumann-eigs") != std::string::npos);
}

TEST_CASE("validate passes and detects the injected branch fault") {
  const Run ok = run({"validate"});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find("rectangle-oracle") != std::string::npos);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  const Run bad = run({"validate", "--inject-fault"});
  CHECK(bad.code == cli::kSuiteFailure);
  CHECK(bad.out.find("FAIL branch-continuity") != std::string::npos);
}

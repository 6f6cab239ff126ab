#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "spectral_ends/error.hpp"
#include "spectral_ends/mesh.hpp"

using namespace spectral_ends;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("spectral_ends_" + name)).string();
}

Mesh refined(const GeometryDesc& g, int steps, double h0 = 0.0) {
  Mesh m = generate(g, h0 > 0 ? h0 : default_h0(g));
  for (int i = 0; i < steps; ++i) m = refine(m, g);
  return m;
}

}  // namespace

TEST_CASE("rect-test at h0 = 0.25 is a 4x4 structured grid") {
  const GeometryDesc g = build_preset("rect-test");
  const Mesh m = generate(g, 0.25);
  CHECK(m.nodes.size() == 25);
  CHECK(m.triangles.size() == 32);
  CHECK(m.boundary_edges.size() == 16);
  CHECK_NOTHROW(validate(m));

  const Mesh r = refine(m, g);
  CHECK(r.triangles.size() == 128);
  CHECK(r.nodes.size() == 81);
  CHECK_NOTHROW(validate(r));
}

TEST_CASE("obstructed strip mesh keeps every vertex outside the disc") {
  const GeometryDesc g = build_preset("obstructed-strip", {{"delta", 0.0}, {"radius", 0.3}});
  const Mesh m = refined(g, 1, 0.1);
  for (const Vec2& p : m.nodes) CHECK(p.squaredNorm() >= 0.09 - 1e-9);
}

TEST_CASE("cshape gap is resolved by at least two elements across") {
  const GeometryDesc g = build_preset("cshape-cavity", {{"eps", 0.2}});
  const Mesh m = generate(g, 0.05);
  // nodes strictly inside the gap channel on the line x = 1.05
  int inside = 0;
  for (const Vec2& p : m.nodes) {
    if (p.x() > 1.0 + 1e-9 && p.x() < 1.1 - 1e-9 && std::abs(p.y()) < 0.2 - 1e-9) ++inside;
  }
  CHECK(inside >= 1);
  const MeshQuality q = measure(m, g);
  CHECK(q.min_angle_deg >= 20.0);
}

TEST_CASE("refinement projects new arc nodes onto the arc") {
  const GeometryDesc g = build_preset("obstructed-strip", {{"delta", 0.0}, {"radius", 0.3}});
  const Mesh m = refined(g, 2);
  const MeshQuality q = measure(m, g);
  CHECK(q.max_boundary_distance <= 1e-12);
  for (const Vec2& p : m.nodes) {
    const double r = p.norm();
    if (std::abs(r - 0.3) < 1e-6) CHECK(std::abs(r - 0.3) <= 1e-12);
  }
}

TEST_CASE("mesh quality and area convergence on the presets") {
  const std::map<std::string, std::map<std::string, double>> presets{
      {"bent-waveguide", {}}, {"obstructed-strip", {{"radius", 0.3}}}, {"cshape-cavity", {{"eps", 0.3}}}};
  for (const auto& [name, params] : presets) {
    CAPTURE(name);
    const GeometryDesc g = build_preset(name, params);
    Mesh m = generate(g, default_h0(g));
    MeshQuality prev = measure(m, g);
    CHECK(prev.min_angle_deg >= 20.0);
    double prev_err = std::abs(prev.total_area - g.exact_area);
    for (int level = 1; level <= 3; ++level) {
      m = refine(m, g);
      const MeshQuality q = measure(m, g);
      CHECK(q.min_angle_deg >= prev.min_angle_deg - 1.0);
      const double err = std::abs(q.total_area - g.exact_area);
      if (prev_err > 1e-12) {
        const double ratio = prev_err / err;
        CHECK(ratio >= 3.0);
        CHECK(ratio <= 5.0);
      }
      prev = q;
      prev_err = err;
    }
  }
}

TEST_CASE("mesh files round-trip exactly") {
  const GeometryDesc g = build_preset("rect-test");
  const Mesh m = refined(g, 2);
  const std::string path = temp_path("roundtrip.txt");
  write_mesh(m, path);
  MeshReadReport rep;
  const Mesh r = read_mesh(path, &rep);
  std::remove(path.c_str());
  CHECK(rep.reoriented == 0);
  REQUIRE(r.nodes.size() == m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) CHECK(r.nodes[i] == m.nodes[i]);
  CHECK(r.triangles == m.triangles);
  REQUIRE(r.boundary_edges.size() == m.boundary_edges.size());
  for (std::size_t i = 0; i < m.boundary_edges.size(); ++i) {
    CHECK(r.boundary_edges[i].i == m.boundary_edges[i].i);
    CHECK(r.boundary_edges[i].j == m.boundary_edges[i].j);
    CHECK(r.boundary_edges[i].tag == m.boundary_edges[i].tag);
  }
}

TEST_CASE("mesh reader rejects bad indices and reorients clockwise triangles") {
  const std::string path = temp_path("bad.txt");
  {
    std::ofstream f(path);
    f << "# spectral-ends mesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 3\nedges 0\n";
  }
  try {
    read_mesh(path);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":7:") != std::string::npos);
  }
  {
    std::ofstream f(path);
    f << "# spectral-ends mesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1\nedges 3\n0 1 1\n1 2 1\n2 0 1\n";
  }
  MeshReadReport rep;
  const Mesh m = read_mesh(path, &rep);
  std::remove(path.c_str());
  CHECK(rep.reoriented == 1);
  CHECK(m.triangle_area(0) > 0);
}

TEST_CASE("generate rejects a mesh size above the narrowest feature") {
  const GeometryDesc g = build_preset("cshape-cavity", {{"eps", 0.2}});
  CHECK_THROWS_AS(generate(g, 0.5), InvalidArgument);
  CHECK_THROWS_AS(generate(g, -1.0), InvalidArgument);
}

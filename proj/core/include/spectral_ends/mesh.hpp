#pragma once

#include <array>
#include <string>
#include <vector>

#include "spectral_ends/geometry.hpp"

namespace spectral_ends {

struct BoundaryEdge {
  int i = 0;
  int j = 0;
  int tag = 0;
};

/// Conforming P1 triangulation of the interior domain. Triangles are counter-clockwise.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t node_count() const { return nodes.size(); }
  double triangle_area(std::size_t t) const;
};

/// Mapped-block triangulation with target edge length h0.
Mesh generate(const GeometryDesc& g, double h0);

/// Uniform red refinement: every triangle split into four at edge midpoints. Midpoints of
/// boundary edges are projected back onto the curve carrying the edge's tag.
Mesh refine(const Mesh& m, const GeometryDesc& g);

/// Default base mesh size for a preset (refinement levels count from this mesh).
double default_h0(const GeometryDesc& g);

struct MeshQuality {
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double min_area = 0.0;
  double total_area = 0.0;
  double max_boundary_distance = 0.0;  ///< boundary node distance from its tagged curve
};

MeshQuality measure(const Mesh& m, const GeometryDesc& g);

/// Throws NumericalError unless the mesh is conforming, positively oriented, and its tagged
/// edges cover exactly the edges used by a single triangle.
void validate(const Mesh& m);

struct MeshReadReport {
  int reoriented = 0;  ///< triangles flipped to counter-clockwise on read
};

void write_mesh(const Mesh& m, const std::string& path);
Mesh read_mesh(const std::string& path, MeshReadReport* report = nullptr);

}  // namespace spectral_ends

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace spectral_ends {

using Vec2 = Eigen::Vector2d;

/// Boundary operator a*u + b*du/dn, stored normalized so that a^2 + b^2 = 1.
class RobinCoeff {
 public:
  RobinCoeff() : RobinCoeff(0.0, 1.0) {}
  RobinCoeff(double a, double b);

  static RobinCoeff dirichlet() { return {1.0, 0.0}; }
  static RobinCoeff neumann() { return {0.0, 1.0}; }

  double a() const { return a_; }
  double b() const { return b_; }
  bool is_dirichlet() const { return b_ == 0.0; }
  bool is_neumann() const { return a_ == 0.0; }
  /// Coefficient a/b of the boundary mass term; only meaningful when b != 0.
  double robin_ratio() const { return a_ / b_; }

  friend bool operator==(const RobinCoeff&, const RobinCoeff&) = default;

 private:
  double a_;
  double b_;
};

struct LineSegment {
  Vec2 p0;
  Vec2 p1;
};

/// Circular arc from angle theta0 to theta1 (radians); theta1 < theta0 means clockwise.
struct Arc {
  Vec2 center;
  double radius = 1.0;
  double theta0 = 0.0;
  double theta1 = 0.0;
};

using Curve = std::variant<LineSegment, Arc>;

Vec2 point_at(const Curve& c, double t);
Vec2 start_point(const Curve& c);
Vec2 end_point(const Curve& c);
double curve_length(const Curve& c);
Curve reversed(const Curve& c);
bool is_closed(const Curve& c);

/// Nearest point on the curve. Arcs project radially; throws NumericalError when the
/// radial projection falls outside the arc's angular range by more than `slack` radians.
Vec2 project_onto(const Curve& c, const Vec2& p, double slack = 1e-9);

/// Distance from p to the curve (radial distance for arcs within their range).
double distance_to(const Curve& c, const Vec2& p);

struct BoundarySegment {
  Curve curve;
  RobinCoeff coeff;
  int tag = 0;
};

/// A semi-infinite straight channel attached to the interior along `attach_line`.
/// Arclength s runs from attach_line.p0 (s = 0, side `left`) to p1 (s = width, side `right`).
struct EndDesc {
  LineSegment attach_line;
  double width = 1.0;
  RobinCoeff left;
  RobinCoeff right;
  Vec2 outward_dir;
};

struct ArtificialCircle {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
};

struct GaussianBump {
  Vec2 center;
  double amplitude = 0.0;
  double decay = 1.0;
};

/// Scalar potential q(x, y) = sum_j C_j exp(-nu_j |p - c_j|^2).
struct Potential {
  std::vector<GaussianBump> bumps;
  double operator()(const Vec2& p) const;
};

/// One curve of a block side. `tag == 0` marks a piece shared with another block.
struct SidePiece {
  Curve curve;
  int tag = 0;
};

/// Side of a mapped mesh block: a chain of pieces traversed in order.
struct BlockSide {
  std::vector<SidePiece> pieces;

  BlockSide() = default;
  BlockSide(Curve c, int tag) : pieces{SidePiece{std::move(c), tag}} {}
  explicit BlockSide(std::vector<SidePiece> p) : pieces(std::move(p)) {}
};

/// Curvilinear quadrilateral, sides ordered bottom (P00->P10), right (P10->P11),
/// top (P01->P11), left (P00->P01).
struct MeshBlock {
  std::array<BlockSide, 4> sides;
};

constexpr int kInterfaceTagBase = 100;
inline int interface_tag(int end_index) { return kInterfaceTagBase + end_index; }
inline bool is_interface_tag(int tag) { return tag >= kInterfaceTagBase; }

struct GeometryDesc {
  std::string preset;
  std::map<std::string, double> params;
  std::vector<BoundarySegment> segments;  ///< Gamma_0
  std::vector<EndDesc> ends;              ///< one interface per end, tag 100 + index
  std::optional<ArtificialCircle> artificial_circle;  ///< interface tag 100
  std::optional<Potential> potential;
  std::vector<MeshBlock> blocks;
  double exact_area = 0.0;
  /// Narrowest feature; mesh sizes must stay below it.
  double feature_size = 1.0;

  bool has_dirichlet() const;
  std::size_t interface_count() const;
  /// Curve of interface `tag`; throws InvalidArgument for unknown tags.
  Curve interface_curve(int tag) const;
  /// Curve for any boundary tag, Gamma_0 or interface.
  Curve boundary_curve(int tag) const;
};

/// One row of the boundary table: every Gamma_0 segment and every interface.
struct BoundaryEntry {
  int tag = 0;
  RobinCoeff coeff;
  Curve curve;
  bool interface = false;
};

std::vector<BoundaryEntry> boundary_table(const GeometryDesc& g);

/// Names accepted by build_preset.
const std::vector<std::string>& preset_names();

/// Builds one of the named geometries. Unknown names and out-of-range parameters throw
/// InvalidArgument. Missing parameters take the preset defaults, which are echoed into
/// the returned `params`.
GeometryDesc build_preset(const std::string& name, const std::map<std::string, double>& params = {});

/// Largest endpoint mismatch when chaining Gamma_0 and interface curves into loops.
/// Returns +inf when some endpoint has no partner.
double closure_defect(const GeometryDesc& g);

}  // namespace spectral_ends

#include "spectral_ends/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vec2 polar(const Vec2& c, double r, double theta) {
  return c + r * Vec2(std::cos(theta), std::sin(theta));
}

// Offset of angle phi from arc start, measured along the sweep direction, in [0, 2pi).
double sweep_offset(const Arc& a, double phi) {
  const double dir = (a.theta1 >= a.theta0) ? 1.0 : -1.0;
  double d = std::fmod(dir * (phi - a.theta0), 2.0 * kPi);
  if (d < 0) d += 2.0 * kPi;
  return d;
}

double param(const std::map<std::string, double>& given, std::map<std::string, double>& echo,
             const std::string& key, double fallback) {
  auto it = given.find(key);
  const double v = (it == given.end()) ? fallback : it->second;
  echo[key] = v;
  return v;
}

void reject_unknown(const std::map<std::string, double>& given, const std::map<std::string, double>& echo,
                    const std::string& preset) {
  for (const auto& [k, v] : given) {
    if (!echo.count(k)) throw InvalidArgument("preset '" + preset + "' has no parameter '" + k + "'");
  }
}

RobinCoeff flag_coeff(double flag, const std::string& what) {
  if (flag == 0.0) return RobinCoeff::neumann();
  if (flag == 1.0) return RobinCoeff::dirichlet();
  throw InvalidArgument(what + " must be 0 (Neumann) or 1 (Dirichlet)");
}

MeshBlock block(Curve bottom, int tb, Curve right, int tr, Curve top, int tt, Curve left, int tl) {
  return MeshBlock{{BlockSide{std::move(bottom), tb}, BlockSide{std::move(right), tr},
                    BlockSide{std::move(top), tt}, BlockSide{std::move(left), tl}}};
}

// Ring-sector block between an inner curve and an outer chain spanning the same angular piece.
MeshBlock sector_block(const Curve& inner, int inner_tag, std::vector<SidePiece> outer) {
  const Curve spoke_a = LineSegment{start_point(inner), start_point(outer.front().curve)};
  const Curve spoke_b = LineSegment{end_point(inner), end_point(outer.back().curve)};
  return MeshBlock{{BlockSide{spoke_a, 0}, BlockSide{std::move(outer)}, BlockSide{spoke_b, 0},
                    BlockSide{inner, inner_tag}}};
}

MeshBlock sector_block(const Curve& inner, int inner_tag, const Curve& outer, int outer_tag) {
  return sector_block(inner, inner_tag, {SidePiece{outer, outer_tag}});
}

GeometryDesc rect_test(const std::map<std::string, double>& given) {
  GeometryDesc g;
  g.preset = "rect-test";
  reject_unknown(given, g.params, g.preset);
  const Vec2 a(0, 0), b(1, 0), c(1, 1), d(0, 1);
  g.segments = {{LineSegment{a, b}, RobinCoeff::dirichlet(), 1},
                {LineSegment{c, d}, RobinCoeff::dirichlet(), 2},
                {LineSegment{d, a}, RobinCoeff::neumann(), 3}};
  g.ends = {EndDesc{LineSegment{b, c}, 1.0, RobinCoeff::dirichlet(), RobinCoeff::dirichlet(), Vec2(1, 0)}};
  g.blocks = {block(LineSegment{a, b}, 1, LineSegment{b, c}, interface_tag(0), LineSegment{d, c}, 2,
                    LineSegment{a, d}, 3)};
  g.exact_area = 1.0;
  g.feature_size = 1.0;
  return g;
}

GeometryDesc straight_waveguide(const std::map<std::string, double>& given) {
  GeometryDesc g;
  g.preset = "straight-waveguide";
  const double len = param(given, g.params, "length", 1.0);
  reject_unknown(given, g.params, g.preset);
  if (!(len > 0)) throw InvalidArgument("straight-waveguide: length must be positive");
  const Vec2 a(0, 0), b(len, 0), c(len, 1), d(0, 1);
  g.segments = {{LineSegment{a, b}, RobinCoeff::dirichlet(), 1},
                {LineSegment{c, d}, RobinCoeff::neumann(), 2}};
  g.ends = {EndDesc{LineSegment{b, c}, 1.0, RobinCoeff::dirichlet(), RobinCoeff::neumann(), Vec2(1, 0)},
            EndDesc{LineSegment{a, d}, 1.0, RobinCoeff::dirichlet(), RobinCoeff::neumann(), Vec2(-1, 0)}};
  g.blocks = {block(LineSegment{a, b}, 1, LineSegment{b, c}, interface_tag(0), LineSegment{d, c}, 2,
                    LineSegment{a, d}, interface_tag(1))};
  g.exact_area = len;
  g.feature_size = std::min(len, 1.0);
  return g;
}

GeometryDesc bent_waveguide(const std::map<std::string, double>& given) {
  GeometryDesc g;
  g.preset = "bent-waveguide";
  const double angle = param(given, g.params, "angle", kPi / 4);
  const double r_in = param(given, g.params, "inner_radius", 1.0);
  const double width = param(given, g.params, "width", 1.0);
  reject_unknown(given, g.params, g.preset);
  if (!(angle > 0 && angle < kPi)) throw InvalidArgument("bent-waveguide: angle must lie in (0, pi)");
  if (!(r_in > 0 && width > 0)) throw InvalidArgument("bent-waveguide: radius and width must be positive");
  const double r_out = r_in + width;
  const Vec2 o = Vec2::Zero();
  const Arc inner{o, r_in, 0.0, angle};
  const Arc outer{o, r_out, 0.0, angle};
  const LineSegment cut0{polar(o, r_in, 0.0), polar(o, r_out, 0.0)};
  const LineSegment cut1{polar(o, r_in, angle), polar(o, r_out, angle)};
  g.segments = {{inner, RobinCoeff::dirichlet(), 1}, {outer, RobinCoeff::neumann(), 2}};
  g.ends = {EndDesc{cut0, width, RobinCoeff::dirichlet(), RobinCoeff::neumann(), Vec2(0, -1)},
            EndDesc{cut1, width, RobinCoeff::dirichlet(), RobinCoeff::neumann(),
                    Vec2(-std::sin(angle), std::cos(angle))}};
  g.blocks = {block(cut0, interface_tag(0), outer, 2, cut1, interface_tag(1), inner, 1)};
  g.exact_area = 0.5 * angle * (r_out * r_out - r_in * r_in);
  g.feature_size = width;
  return g;
}

GeometryDesc obstructed_strip(const std::map<std::string, double>& given) {
  GeometryDesc g;
  g.preset = "obstructed-strip";
  const double delta = param(given, g.params, "delta", 0.0);
  const double radius = param(given, g.params, "radius", 0.3);
  const double length = param(given, g.params, "length", 1.0);
  const double sym = param(given, g.params, "symmetry", 0.0);
  const double walls = param(given, g.params, "walls", 0.0);
  const double obstacle = param(given, g.params, "obstacle", 0.0);
  reject_unknown(given, g.params, g.preset);
  if (!(radius > 0)) throw InvalidArgument("obstructed-strip: radius must be positive");
  if (!(std::abs(delta) + radius < 1.0)) throw InvalidArgument("obstructed-strip: need |delta| + R < 1");
  if (!(length > radius)) throw InvalidArgument("obstructed-strip: truncation length must exceed R");
  const RobinCoeff cut_bc = flag_coeff(sym, "symmetry");
  const RobinCoeff wall_bc = flag_coeff(walls, "walls");
  const RobinCoeff obstacle_bc = flag_coeff(obstacle, "obstacle");

  const Vec2 c(0, delta);
  const Vec2 bl(0, -1), br(length, -1), tr(length, 1), tl(0, 1);
  const Vec2 top_pole(0, delta + radius), bottom_pole(0, delta - radius);

  g.segments = {{LineSegment{bl, br}, wall_bc, 1},
                {LineSegment{tr, tl}, wall_bc, 2},
                {LineSegment{tl, top_pole}, cut_bc, 3},
                {Arc{c, radius, kPi / 2, -kPi / 2}, obstacle_bc, 4},
                {LineSegment{bottom_pole, bl}, cut_bc, 5}};
  g.ends = {EndDesc{LineSegment{br, tr}, 2.0, wall_bc, wall_bc, Vec2(1, 0)}};

  // O-grid: a ring of three blocks between the obstacle and a square box of half-width `a`,
  // then five blocks filling the space out to the walls and the interface.
  const double gap = std::min({1.0 - delta - radius, 1.0 + delta - radius, length - radius});
  const double a = radius + 0.5 * gap;
  const Vec2 a1 = polar(c, radius, kPi / 4), a2 = polar(c, radius, -kPi / 4);
  const Vec2 box_top(0, delta + a), box_tr(a, delta + a), box_br(a, delta - a), box_bot(0, delta - a);
  const Vec2 wall_tm(a, 1), wall_bm(a, -1), iface_top(length, delta + a), iface_bot(length, delta - a);
  const int iface = interface_tag(0);
  g.blocks = {
      block(Arc{c, radius, kPi / 2, kPi / 4}, 4, LineSegment{a1, box_tr}, 0, LineSegment{box_top, box_tr}, 0,
            LineSegment{top_pole, box_top}, 3),
      block(Arc{c, radius, kPi / 4, -kPi / 4}, 4, LineSegment{a2, box_br}, 0, LineSegment{box_tr, box_br}, 0,
            LineSegment{a1, box_tr}, 0),
      block(Arc{c, radius, -kPi / 4, -kPi / 2}, 4, LineSegment{bottom_pole, box_bot}, 5,
            LineSegment{box_br, box_bot}, 0, LineSegment{a2, box_br}, 0),
      block(LineSegment{box_top, box_tr}, 0, LineSegment{box_tr, wall_tm}, 0, LineSegment{tl, wall_tm}, 2,
            LineSegment{box_top, tl}, 3),
      block(LineSegment{box_tr, iface_top}, 0, LineSegment{iface_top, tr}, iface, LineSegment{wall_tm, tr}, 2,
            LineSegment{box_tr, wall_tm}, 0),
      block(LineSegment{box_br, iface_bot}, 0, LineSegment{iface_bot, iface_top}, iface,
            LineSegment{box_tr, iface_top}, 0, LineSegment{box_br, box_tr}, 0),
      block(LineSegment{wall_bm, br}, 1, LineSegment{br, iface_bot}, iface, LineSegment{box_br, iface_bot}, 0,
            LineSegment{wall_bm, box_br}, 0),
      block(LineSegment{bl, wall_bm}, 1, LineSegment{wall_bm, box_br}, 0, LineSegment{box_bot, box_br}, 0,
            LineSegment{bl, box_bot}, 5),
  };
  g.exact_area = 2.0 * length - 0.5 * kPi * radius * radius;
  g.feature_size = std::min(radius, 0.5 * gap);
  return g;
}

// Disc meshed as a square core of circumradius `core_r` plus four ring sectors whose outer
// sides are given as chains spanning the quarter turns starting at -pi/4.
void disc_blocks(GeometryDesc& g, const Vec2& o, double core_r, std::array<std::vector<SidePiece>, 4> outer) {
  std::array<Vec2, 4> q;
  for (int i = 0; i < 4; ++i) q[i] = polar(o, core_r, -kPi / 4 + i * kPi / 2);
  g.blocks.push_back(block(LineSegment{q[3], q[0]}, 0, LineSegment{q[0], q[1]}, 0, LineSegment{q[2], q[1]}, 0,
                           LineSegment{q[3], q[2]}, 0));
  for (int i = 0; i < 4; ++i) {
    g.blocks.push_back(sector_block(LineSegment{q[i], q[(i + 1) % 4]}, 0, std::move(outer[i])));
  }
}

std::vector<SidePiece> quarter_arc(const Vec2& o, double r, int i, int tag) {
  const double t0 = -kPi / 4 + i * kPi / 2;
  return {SidePiece{Arc{o, r, t0, t0 + kPi / 2}, tag}};
}

GeometryDesc cshape_cavity(const std::map<std::string, double>& given) {
  GeometryDesc g;
  g.preset = "cshape-cavity";
  const double eps = param(given, g.params, "eps", 0.2);
  const double rart = param(given, g.params, "rart", 1.5);
  const double thickness = param(given, g.params, "thickness", 0.1);
  reject_unknown(given, g.params, g.preset);
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("cshape-cavity: eps must lie in (0, 1)");
  if (!(thickness > 0)) throw InvalidArgument("cshape-cavity: thickness must be positive");
  const double r1 = std::hypot(1.0, eps);
  const double r2 = std::hypot(1.0 + thickness, eps);
  if (!(rart > r2 + 0.05)) {
    throw InvalidArgument("cshape-cavity: rart must exceed the obstacle extent " + std::to_string(r2) +
                          " by at least 0.05");
  }
  const Vec2 o = Vec2::Zero();
  const double thp = std::atan2(eps, 1.0);
  const double thq = std::atan2(eps, 1.0 + thickness);
  const Vec2 P(1, eps), Q(1 + thickness, eps), R(1 + thickness, -eps), S(1, -eps);
  const RobinCoeff dir = RobinCoeff::dirichlet();
  g.segments = {{Arc{o, r1, thp, 2 * kPi - thp}, dir, 1},
                {LineSegment{S, R}, dir, 2},
                {Arc{o, r2, 2 * kPi - thq, thq}, dir, 3},
                {LineSegment{Q, P}, dir, 4}};
  g.artificial_circle = ArtificialCircle{o, rart};

  // cavity: the sector facing the gap has the gap mouth as the middle piece of its outer side
  std::vector<SidePiece> mouth{SidePiece{Arc{o, r1, -kPi / 4, -thp}, 1}, SidePiece{Arc{o, r1, -thp, thp}, 0},
                               SidePiece{Arc{o, r1, thp, kPi / 4}, 1}};
  disc_blocks(g, o, 0.6 * r1, {mouth, quarter_arc(o, r1, 1, 1), quarter_arc(o, r1, 2, 1), quarter_arc(o, r1, 3, 1)});
  // gap channel
  g.blocks.push_back(block(LineSegment{S, R}, 2, Arc{o, r2, -thq, thq}, 0, LineSegment{P, Q}, 4,
                           Arc{o, r1, -thp, thp}, 0));
  // outer ring, one sector facing the gap plus four around the barrier
  const int tag = interface_tag(0);
  g.blocks.push_back(sector_block(Arc{o, r2, -thq, thq}, 0, Arc{o, rart, -thq, thq}, tag));
  const double span = (2 * kPi - 2 * thq) / 4;
  for (int i = 0; i < 4; ++i) {
    const double a0 = thq + i * span, a1 = thq + (i + 1) * span;
    g.blocks.push_back(sector_block(Arc{o, r2, a0, a1}, 3, Arc{o, rart, a0, a1}, tag));
  }

  // barrier = full annulus r1 < r < r2 minus the gap {x > 0, |y| < eps}
  const double gap = thickness * eps + r2 * r2 * thq - r1 * r1 * thp;
  const double barrier = kPi * (r2 * r2 - r1 * r1) - gap;
  g.exact_area = kPi * rart * rart - barrier;
  g.feature_size = std::min({eps, rart - r2, 1.0});
  return g;
}

GeometryDesc gaussian_potential(const std::map<std::string, double>& given) {
  GeometryDesc g;
  g.preset = "gaussian-potential";
  const double rart = param(given, g.params, "rart", 4.0);
  const double amp = param(given, g.params, "C", 40.0);
  const double nu = param(given, g.params, "nu", 2.0);
  reject_unknown(given, g.params, g.preset);
  if (!(nu > 0)) throw InvalidArgument("gaussian-potential: nu must be positive");
  const double extent = 1.0 + 2.0 / std::sqrt(nu);
  if (!(rart > extent)) {
    throw InvalidArgument("gaussian-potential: rart must exceed the potential extent " + std::to_string(extent));
  }
  const Vec2 o = Vec2::Zero();
  Potential q;
  const double s3 = std::sin(kPi / 3), c3 = std::cos(kPi / 3);
  for (const Vec2& c : {Vec2(0, -1), Vec2(s3, c3), Vec2(-s3, c3)}) q.bumps.push_back({c, amp, nu});
  g.potential = q;
  g.artificial_circle = ArtificialCircle{o, rart};
  const int tag = interface_tag(0);
  disc_blocks(g, o, 0.6 * rart,
              {quarter_arc(o, rart, 0, tag), quarter_arc(o, rart, 1, tag), quarter_arc(o, rart, 2, tag),
               quarter_arc(o, rart, 3, tag)});
  g.exact_area = kPi * rart * rart;
  g.feature_size = 0.4 * rart;
  return g;
}

}  // namespace

RobinCoeff::RobinCoeff(double a, double b) {
  const double n = std::hypot(a, b);
  if (!(n > 0) || !std::isfinite(n)) throw InvalidArgument("RobinCoeff: (a, b) must be finite and nonzero");
  a_ = a / n;
  b_ = b / n;
  if (std::abs(a_) < 1e-300) a_ = 0.0;
  if (std::abs(b_) < 1e-300) b_ = 0.0;
}

Vec2 point_at(const Curve& c, double t) {
  return std::visit(Overloaded{[t](const LineSegment& s) -> Vec2 { return s.p0 + t * (s.p1 - s.p0); },
                               [t](const Arc& a) -> Vec2 {
                                 return polar(a.center, a.radius, a.theta0 + t * (a.theta1 - a.theta0));
                               }},
                    c);
}

Vec2 start_point(const Curve& c) { return point_at(c, 0.0); }
Vec2 end_point(const Curve& c) { return point_at(c, 1.0); }

double curve_length(const Curve& c) {
  return std::visit(Overloaded{[](const LineSegment& s) { return (s.p1 - s.p0).norm(); },
                               [](const Arc& a) { return a.radius * std::abs(a.theta1 - a.theta0); }},
                    c);
}

Curve reversed(const Curve& c) {
  return std::visit(Overloaded{[](const LineSegment& s) -> Curve { return LineSegment{s.p1, s.p0}; },
                               [](const Arc& a) -> Curve { return Arc{a.center, a.radius, a.theta1, a.theta0}; }},
                    c);
}

bool is_closed(const Curve& c) {
  if (const auto* a = std::get_if<Arc>(&c)) return std::abs(std::abs(a->theta1 - a->theta0) - 2 * kPi) < 1e-12;
  return false;
}

Vec2 project_onto(const Curve& c, const Vec2& p, double slack) {
  return std::visit(
      Overloaded{[&](const LineSegment& s) -> Vec2 {
                   const Vec2 d = s.p1 - s.p0;
                   const double t = std::clamp((p - s.p0).dot(d) / d.squaredNorm(), 0.0, 1.0);
                   return s.p0 + t * d;
                 },
                 [&](const Arc& a) -> Vec2 {
                   const Vec2 r = p - a.center;
                   const double phi = std::atan2(r.y(), r.x());
                   const double span = std::abs(a.theta1 - a.theta0);
                   const double off = sweep_offset(a, phi);
                   if (span < 2 * kPi - 1e-12 && off > span + slack && off < 2 * kPi - slack) {
                     throw NumericalError("projection", "point outside the angular range of an arc");
                   }
                   return polar(a.center, a.radius, phi);
                 }},
      c);
}

double distance_to(const Curve& c, const Vec2& p) {
  return std::visit(Overloaded{[&](const LineSegment& s) { return (project_onto(s, p) - p).norm(); },
                               [&](const Arc& a) {
                                 const Vec2 r = p - a.center;
                                 const double phi = std::atan2(r.y(), r.x());
                                 const double span = std::abs(a.theta1 - a.theta0);
                                 const double off = sweep_offset(a, phi);
                                 if (span >= 2 * kPi - 1e-12 || off <= span) return std::abs(r.norm() - a.radius);
                                 return std::min((p - start_point(a)).norm(), (p - end_point(a)).norm());
                               }},
                    c);
}

double Potential::operator()(const Vec2& p) const {
  double v = 0.0;
  for (const auto& b : bumps) v += b.amplitude * std::exp(-b.decay * (p - b.center).squaredNorm());
  return v;
}

bool GeometryDesc::has_dirichlet() const {
  return std::any_of(segments.begin(), segments.end(), [](const auto& s) { return s.coeff.is_dirichlet(); });
}

std::size_t GeometryDesc::interface_count() const { return artificial_circle ? 1 : ends.size(); }

Curve GeometryDesc::interface_curve(int tag) const {
  const int n = tag - kInterfaceTagBase;
  if (artificial_circle && n == 0) {
    return Arc{artificial_circle->center, artificial_circle->radius, 0.0, 2 * kPi};
  }
  if (!artificial_circle && n >= 0 && n < static_cast<int>(ends.size())) return ends[n].attach_line;
  throw InvalidArgument("no interface with tag " + std::to_string(tag));
}

Curve GeometryDesc::boundary_curve(int tag) const {
  if (is_interface_tag(tag)) return interface_curve(tag);
  for (const auto& s : segments) {
    if (s.tag == tag) return s.curve;
  }
  throw InvalidArgument("no boundary segment with tag " + std::to_string(tag));
}

std::vector<BoundaryEntry> boundary_table(const GeometryDesc& g) {
  std::vector<BoundaryEntry> out;
  for (const auto& s : g.segments) out.push_back({s.tag, s.coeff, s.curve, false});
  for (std::size_t n = 0; n < g.interface_count(); ++n) {
    const int tag = interface_tag(static_cast<int>(n));
    out.push_back({tag, RobinCoeff::neumann(), g.interface_curve(tag), true});
  }
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"bent-waveguide", "obstructed-strip",   "cshape-cavity",
                                              "gaussian-potential", "rect-test", "straight-waveguide"};
  return names;
}

GeometryDesc build_preset(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "rect-test") return rect_test(params);
  if (name == "straight-waveguide") return straight_waveguide(params);
  if (name == "bent-waveguide") return bent_waveguide(params);
  if (name == "obstructed-strip") return obstructed_strip(params);
  if (name == "cshape-cavity") return cshape_cavity(params);
  if (name == "gaussian-potential") return gaussian_potential(params);
  throw InvalidArgument("unknown geometry preset '" + name + "'");
}

double closure_defect(const GeometryDesc& g) {
  std::vector<Vec2> pts;
  for (const auto& e : boundary_table(g)) {
    if (is_closed(e.curve)) continue;
    pts.push_back(start_point(e.curve));
    pts.push_back(end_point(e.curve));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i || j == (i ^ 1U)) continue;
      best = std::min(best, (pts[i] - pts[j]).norm());
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace spectral_ends

#include "spectral_ends/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

constexpr double kMergeTol = 1e-10;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

std::uint64_t edge_key(int i, int j) {
  const auto lo = static_cast<std::uint32_t>(std::min(i, j));
  const auto hi = static_cast<std::uint32_t>(std::max(i, j));
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

// Deduplicates points that agree to within kMergeTol using a hashed grid of cells larger
// than the tolerance, so a match can only sit in the 3x3 neighbourhood of a cell.
class NodeMerger {
 public:
  explicit NodeMerger(std::vector<Vec2>& nodes) : nodes_(nodes) {}

  int insert(const Vec2& p) {
    const auto cx = cell(p.x()), cy = cell(p.y());
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid_.find(key(cx + dx, cy + dy));
        if (it == grid_.end()) continue;
        for (int id : it->second) {
          if ((nodes_[id] - p).norm() <= kMergeTol) return id;
        }
      }
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(p);
    grid_[key(cx, cy)].push_back(id);
    return id;
  }

 private:
  static constexpr double kCell = 1e-8;
  static std::int64_t cell(double v) { return static_cast<std::int64_t>(std::floor(v / kCell)); }
  static std::uint64_t key(std::int64_t a, std::int64_t b) {
    return static_cast<std::uint64_t>(a) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(b);
  }

  std::vector<Vec2>& nodes_;
  std::unordered_map<std::uint64_t, std::vector<int>> grid_;
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

struct PieceRef {
  std::size_t block;
  int side;
  std::size_t piece;
  double length;
};

bool same_piece(const Curve& a, const Curve& b) {
  const Vec2 a0 = start_point(a), a1 = end_point(a), b0 = start_point(b), b1 = end_point(b);
  const bool ends = ((a0 - b0).norm() < kMergeTol && (a1 - b1).norm() < kMergeTol) ||
                    ((a0 - b1).norm() < kMergeTol && (a1 - b0).norm() < kMergeTol);
  return ends && (point_at(a, 0.5) - point_at(b, 0.5)).norm() < kMergeTol;
}

// Cell counts for every side piece. Pieces that coincide geometrically share a count, and
// opposite sides of each block must carry the same total.
std::vector<int> piece_counts(const GeometryDesc& g, double h0, std::vector<PieceRef>& refs,
                              std::vector<std::array<std::vector<int>, 4>>& ids) {
  ids.assign(g.blocks.size(), {});
  for (std::size_t b = 0; b < g.blocks.size(); ++b) {
    for (int s = 0; s < 4; ++s) {
      const auto& pieces = g.blocks[b].sides[s].pieces;
      if (pieces.empty()) throw InvalidArgument("mesh block has an empty side");
      for (std::size_t p = 0; p < pieces.size(); ++p) {
        const double len = curve_length(pieces[p].curve);
        if (!(len > 0)) throw InvalidArgument("mesh block side has zero length");
        ids[b][s].push_back(static_cast<int>(refs.size()));
        refs.push_back({b, s, p, len});
      }
    }
  }
  auto curve_of = [&](const PieceRef& r) -> const Curve& {
    return g.blocks[r.block].sides[r.side].pieces[r.piece].curve;
  };

  UnionFind uf(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = i + 1; j < refs.size(); ++j) {
      if (same_piece(curve_of(refs[i]), curve_of(refs[j]))) uf.unite(static_cast<int>(i), static_cast<int>(j));
    }
  }
  for (const auto& block_ids : ids) {
    for (int s = 0; s < 2; ++s) {
      if (block_ids[s].size() == 1 && block_ids[s + 2].size() == 1) uf.unite(block_ids[s][0], block_ids[s + 2][0]);
    }
  }

  std::vector<int> group_count(refs.size(), 1);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const int r = uf.find(static_cast<int>(i));
    group_count[r] = std::max(group_count[r], static_cast<int>(std::ceil(refs[i].length / h0 - 1e-9)));
  }
  // Even counts keep a grid line on every symmetry axis of a block, so no cell straddles one.
  for (int& c : group_count) c += c % 2;
  auto count = [&](int id) -> int& { return group_count[uf.find(id)]; };
  auto side_total = [&](const std::vector<int>& side) {
    int t = 0;
    for (int id : side) t += count(id);
    return t;
  };

  // Balance composite sides against their opposite side by growing the coarsest piece.
  for (int iter = 0;; ++iter) {
    if (iter > 10000) throw NumericalError("mesh", "could not balance block side counts");
    bool changed = false;
    for (const auto& block_ids : ids) {
      for (int s = 0; s < 2; ++s) {
        const int ta = side_total(block_ids[s]), tb = side_total(block_ids[s + 2]);
        if (ta == tb) continue;
        const auto& small = (ta < tb) ? block_ids[s] : block_ids[s + 2];
        const int id = *std::max_element(small.begin(), small.end(), [&](int x, int y) {
          return refs[x].length / count(x) < refs[y].length / count(y);
        });
        count(id) += std::abs(ta - tb);
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<int> out(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) out[i] = count(static_cast<int>(i));
  return out;
}

std::vector<Vec2> side_points(const BlockSide& side, const std::vector<int>& ids, const std::vector<int>& counts) {
  std::vector<Vec2> pts;
  for (std::size_t p = 0; p < side.pieces.size(); ++p) {
    const Curve& c = side.pieces[p].curve;
    const int n = counts[ids[p]];
    if (!pts.empty() && (pts.back() - start_point(c)).norm() > kMergeTol) {
      throw InvalidArgument("mesh block side pieces are not chained");
    }
    if (!pts.empty()) pts.pop_back();
    for (int k = 0; k <= n; ++k) pts.push_back(point_at(c, static_cast<double>(k) / n));
  }
  return pts;
}

}  // namespace

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

Mesh generate(const GeometryDesc& g, double h0) {
  if (!(h0 > 0)) throw InvalidArgument("mesh size h0 must be positive");
  if (!(h0 < g.feature_size)) {
    throw InvalidArgument("mesh size h0 = " + std::to_string(h0) + " is not below the narrowest feature " +
                          std::to_string(g.feature_size) + " of " + g.preset);
  }
  if (g.blocks.empty()) throw InvalidArgument("geometry has no mesh blocks");

  std::vector<PieceRef> refs;
  std::vector<std::array<std::vector<int>, 4>> ids;
  const std::vector<int> counts = piece_counts(g, h0, refs, ids);

  Mesh m;
  NodeMerger merger(m.nodes);
  for (std::size_t b = 0; b < g.blocks.size(); ++b) {
    const auto& blk = g.blocks[b];
    std::array<std::vector<Vec2>, 4> sp;
    for (int s = 0; s < 4; ++s) sp[s] = side_points(blk.sides[s], ids[b][s], counts);
    const auto& bot = sp[0];
    const auto& right = sp[1];
    const auto& top = sp[2];
    const auto& left = sp[3];
    const int nu = static_cast<int>(bot.size()) - 1;
    const int nv = static_cast<int>(left.size()) - 1;
    const Vec2 p00 = bot.front(), p10 = bot.back(), p01 = top.front(), p11 = top.back();
    if ((left.front() - p00).norm() > kMergeTol || (left.back() - p01).norm() > kMergeTol ||
        (right.front() - p10).norm() > kMergeTol || (right.back() - p11).norm() > kMergeTol) {
      throw InvalidArgument("mesh block " + std::to_string(b) + " sides do not meet at its corners");
    }

    std::vector<int> idx((nu + 1) * (nv + 1));
    auto at = [&](int i, int j) -> int& { return idx[j * (nu + 1) + i]; };
    for (int j = 0; j <= nv; ++j) {
      for (int i = 0; i <= nu; ++i) {
        Vec2 p;
        if (j == 0) {
          p = bot[i];
        } else if (j == nv) {
          p = top[i];
        } else if (i == 0) {
          p = left[j];
        } else if (i == nu) {
          p = right[j];
        } else {
          const double u = static_cast<double>(i) / nu, v = static_cast<double>(j) / nv;
          p = (1 - v) * bot[i] + v * top[i] + (1 - u) * left[j] + u * right[j] -
              ((1 - u) * (1 - v) * p00 + u * (1 - v) * p10 + (1 - u) * v * p01 + u * v * p11);
        }
        at(i, j) = merger.insert(p);
      }
    }

    for (int j = 0; j < nv; ++j) {
      for (int i = 0; i < nu; ++i) {
        const int a = at(i, j), bb = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
        const double d1 = (m.nodes[a] - m.nodes[c]).norm(), d2 = (m.nodes[bb] - m.nodes[d]).norm();
        std::array<std::array<int, 3>, 2> tris;
        bool first = d1 < d2;
        if (std::abs(d1 - d2) <= 1e-12 * std::max(d1, d2)) {
          // Tie: take the diagonal through the corner farthest from y = 0 (then largest x), a rule
          // that commutes with the reflection y -> -y and keeps symmetric meshes symmetric.
          auto before = [&](int u, int v) {
            const double yu = std::abs(m.nodes[u].y()), yv = std::abs(m.nodes[v].y());
            if (std::abs(yu - yv) > kMergeTol) return yu < yv;
            return m.nodes[u].x() < m.nodes[v].x() - kMergeTol;
          };
          const std::array<int, 4> corners{a, bb, c, d};
          const int far = *std::max_element(corners.begin(), corners.end(), before);
          first = far == a || far == c;
        }
        if (first) {
          tris = {{{a, bb, c}, {a, c, d}}};
        } else {
          tris = {{{a, bb, d}, {bb, c, d}}};
        }
        for (auto t : tris) {
          const double area = signed_area(m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]]);
          if (std::abs(area) < 1e-14) throw NumericalError("mesh", "degenerate triangle in block " + std::to_string(b));
          if (area < 0) std::swap(t[1], t[2]);
          m.triangles.push_back(t);
        }
      }
    }

    // Tagged pieces become boundary edges; walk each side's node list piece by piece.
    for (int s = 0; s < 4; ++s) {
      const auto& pieces = blk.sides[s].pieces;
      int offset = 0;
      for (std::size_t p = 0; p < pieces.size(); ++p) {
        const int n = counts[ids[b][s][p]];
        if (pieces[p].tag != 0) {
          for (int k = 0; k < n; ++k) {
            const int s0 = offset + k, s1 = offset + k + 1;
            int i0, j0, i1, j1;
            switch (s) {
              case 0: i0 = s0, j0 = 0, i1 = s1, j1 = 0; break;
              case 1: i0 = nu, j0 = s0, i1 = nu, j1 = s1; break;
              case 2: i0 = s0, j0 = nv, i1 = s1, j1 = nv; break;
              default: i0 = 0, j0 = s0, i1 = 0, j1 = s1; break;
            }
            m.boundary_edges.push_back({at(i0, j0), at(i1, j1), pieces[p].tag});
          }
        }
        offset += n;
      }
    }
  }
  validate(m);
  return m;
}

Mesh refine(const Mesh& m, const GeometryDesc& g) {
  Mesh out;
  out.nodes = m.nodes;
  std::unordered_map<std::uint64_t, int> mid;
  std::unordered_map<std::uint64_t, int> edge_tag;
  for (const auto& e : m.boundary_edges) edge_tag[edge_key(e.i, e.j)] = e.tag;
  std::map<int, Curve> curves;

  auto midpoint = [&](int i, int j) {
    const auto k = edge_key(i, j);
    auto it = mid.find(k);
    if (it != mid.end()) return it->second;
    Vec2 p = 0.5 * (m.nodes[i] + m.nodes[j]);
    auto t = edge_tag.find(k);
    if (t != edge_tag.end()) {
      auto c = curves.find(t->second);
      if (c == curves.end()) c = curves.emplace(t->second, g.boundary_curve(t->second)).first;
      p = project_onto(c->second, p, 1e-6);
    }
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(p);
    mid.emplace(k, id);
    return id;
  };

  out.triangles.reserve(4 * m.triangles.size());
  for (const auto& t : m.triangles) {
    const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  out.boundary_edges.reserve(2 * m.boundary_edges.size());
  for (const auto& e : m.boundary_edges) {
    const int c = mid.at(edge_key(e.i, e.j));
    out.boundary_edges.push_back({e.i, c, e.tag});
    out.boundary_edges.push_back({c, e.j, e.tag});
  }
  for (std::size_t t = 0; t < out.triangles.size(); ++t) {
    if (!(out.triangle_area(t) > 0)) throw NumericalError("refine", "projection inverted a boundary triangle");
  }
  return out;
}

double default_h0(const GeometryDesc& g) {
  double h = 0.25;
  if (g.preset == "obstructed-strip" || g.preset == "cshape-cavity") h = 0.1;
  if (g.preset == "gaussian-potential") h = 0.5;
  return std::min(h, 0.5 * g.feature_size);
}

MeshQuality measure(const Mesh& m, const GeometryDesc& g) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  q.min_area = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = m.nodes[tri[(k + 1) % 3]] - m.nodes[tri[k]];
      const Vec2 v = m.nodes[tri[(k + 2) % 3]] - m.nodes[tri[k]];
      const double ang = std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v)) * 180.0 / std::numbers::pi;
      q.min_angle_deg = std::min(q.min_angle_deg, ang);
      q.max_angle_deg = std::max(q.max_angle_deg, ang);
    }
    const double a = m.triangle_area(t);
    q.min_area = std::min(q.min_area, a);
    q.total_area += a;
  }
  std::map<int, Curve> curves;
  for (const auto& e : m.boundary_edges) {
    auto c = curves.find(e.tag);
    if (c == curves.end()) c = curves.emplace(e.tag, g.boundary_curve(e.tag)).first;
    for (int n : {e.i, e.j}) q.max_boundary_distance = std::max(q.max_boundary_distance, distance_to(c->second, m.nodes[n]));
  }
  return q;
}

void validate(const Mesh& m) {
  const int n = static_cast<int>(m.nodes.size());
  std::unordered_map<std::uint64_t, int> uses;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= n) throw NumericalError("mesh", "triangle " + std::to_string(t) + " has an invalid node index");
    }
    if (!(m.triangle_area(t) > 0)) throw NumericalError("mesh", "triangle " + std::to_string(t) + " is not positively oriented");
    for (int k = 0; k < 3; ++k) ++uses[edge_key(tri[k], tri[(k + 1) % 3])];
  }
  std::size_t single = 0;
  for (const auto& [k, c] : uses) {
    if (c > 2) throw NumericalError("mesh", "an edge is shared by more than two triangles");
    if (c == 1) ++single;
  }
  std::unordered_map<std::uint64_t, int> seen;
  for (const auto& e : m.boundary_edges) {
    auto it = uses.find(edge_key(e.i, e.j));
    if (it == uses.end() || it->second != 1) {
      throw NumericalError("mesh", "tagged edge " + std::to_string(e.i) + "-" + std::to_string(e.j) +
                                       " is not on the triangulation boundary");
    }
    if (seen[edge_key(e.i, e.j)]++) throw NumericalError("mesh", "duplicate tagged edge");
  }
  if (single != m.boundary_edges.size()) {
    throw NumericalError("mesh", std::to_string(single - seen.size()) + " boundary edges carry no tag");
  }
}

void write_mesh(const Mesh& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot open '" + path + "' for writing");
  std::fprintf(f, "# spectral-ends mesh v1\nnodes %zu\n", m.nodes.size());
  for (const auto& p : m.nodes) std::fprintf(f, "%.17g %.17g\n", p.x(), p.y());
  std::fprintf(f, "triangles %zu\n", m.triangles.size());
  for (const auto& t : m.triangles) std::fprintf(f, "%d %d %d\n", t[0], t[1], t[2]);
  std::fprintf(f, "edges %zu\n", m.boundary_edges.size());
  for (const auto& e : m.boundary_edges) std::fprintf(f, "%d %d %d\n", e.i, e.j, e.tag);
  const bool ok = std::fclose(f) == 0;
  if (!ok) throw Error("failed writing '" + path + "'");
}

Mesh read_mesh(const std::string& path, MeshReadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  int lineno = 0;
  std::string line;
  auto fail = [&](const std::string& what) -> Error {
    return Error(path + ":" + std::to_string(lineno) + ": " + what);
  };
  auto next = [&]() {
    if (!std::getline(in, line)) {
      ++lineno;
      throw fail("unexpected end of file");
    }
    ++lineno;
    return std::istringstream(line);
  };
  auto header = [&](const std::string& word) {
    auto ss = next();
    std::string w;
    long long count = -1;
    std::string extra;
    if (!(ss >> w >> count) || w != word || count < 0 || (ss >> extra)) {
      throw fail("expected '" + word + " <count>'");
    }
    return static_cast<std::size_t>(count);
  };

  next();
  if (line.rfind("# spectral-ends mesh v1", 0) != 0) throw fail("missing '# spectral-ends mesh v1' header");

  Mesh m;
  MeshReadReport rep;
  const std::size_t nn = header("nodes");
  m.nodes.reserve(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    auto ss = next();
    double x, y;
    std::string extra;
    if (!(ss >> x >> y) || (ss >> extra) || !std::isfinite(x) || !std::isfinite(y)) throw fail("expected 'x y'");
    m.nodes.emplace_back(x, y);
  }
  const long long n = static_cast<long long>(nn);
  auto index = [&](long long v) {
    if (v < 0 || v >= n) throw fail("node index " + std::to_string(v) + " out of range [0, " + std::to_string(n) + ")");
    return static_cast<int>(v);
  };
  const std::size_t nt = header("triangles");
  for (std::size_t t = 0; t < nt; ++t) {
    auto ss = next();
    long long a, b, c;
    std::string extra;
    if (!(ss >> a >> b >> c) || (ss >> extra)) throw fail("expected 'i j k'");
    std::array<int, 3> tri{index(a), index(b), index(c)};
    const double area = signed_area(m.nodes[tri[0]], m.nodes[tri[1]], m.nodes[tri[2]]);
    if (area == 0.0) throw fail("degenerate triangle");
    if (area < 0) {
      std::swap(tri[1], tri[2]);
      ++rep.reoriented;
    }
    m.triangles.push_back(tri);
  }
  const std::size_t ne = header("edges");
  for (std::size_t e = 0; e < ne; ++e) {
    auto ss = next();
    long long a, b, tag;
    std::string extra;
    if (!(ss >> a >> b >> tag) || (ss >> extra)) throw fail("expected 'i j tag'");
    m.boundary_edges.push_back({index(a), index(b), static_cast<int>(tag)});
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw fail("trailing content");
  }
  if (report) *report = rep;
  return m;
}

}  // namespace spectral_ends

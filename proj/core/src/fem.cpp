#include "spectral_ends/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/SparseCholesky>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// 4-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 4> kGaussX{0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                        0.9305681557970263};
constexpr std::array<double, 4> kGaussW{0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                        0.1739274225687269};

SpMat build(Eigen::Index n, const Triplets& t) {
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SpMat submatrix(const SpMat& full, const std::vector<int>& free_index, Eigen::Index nfree) {
  Triplets t;
  t.reserve(full.nonZeros());
  for (int k = 0; k < full.outerSize(); ++k) {
    for (SpMat::InnerIterator it(full, k); it; ++it) {
      const int r = free_index[it.row()], c = free_index[it.col()];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  }
  return build(nfree, t);
}

}  // namespace

Eigen::MatrixXd DiscreteOperator::expand(const Eigen::MatrixXd& free) const {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.nodes.size()), free.cols());
  for (std::size_t d = 0; d < free_nodes.size(); ++d) full.row(free_nodes[d]) = free.row(static_cast<Eigen::Index>(d));
  return full;
}

Eigen::MatrixXd DiscreteOperator::restrict(const Eigen::MatrixXd& full) const {
  Eigen::MatrixXd free(free_count(), full.cols());
  for (std::size_t d = 0; d < free_nodes.size(); ++d) free.row(static_cast<Eigen::Index>(d)) = full.row(free_nodes[d]);
  return free;
}

std::vector<BoundaryEdge> DiscreteOperator::edges_with_tag(int tag) const {
  std::vector<BoundaryEdge> out;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == tag) out.push_back(e);
  }
  return out;
}

DiscreteOperator assemble(const Mesh& m, const GeometryDesc& g, InterfaceBc interface_bc) {
  DiscreteOperator op;
  op.mesh = m;
  op.interface_bc = interface_bc;
  const auto n = static_cast<Eigen::Index>(m.nodes.size());

  std::map<int, BoundaryEntry> table;
  for (const auto& e : boundary_table(g)) table.emplace(e.tag, e);

  Triplets tk, tm, tr;
  tk.reserve(9 * m.triangles.size());
  tm.reserve(9 * m.triangles.size());
  for (const auto& tri : m.triangles) {
    const Vec2& p0 = m.nodes[tri[0]];
    const Vec2& p1 = m.nodes[tri[1]];
    const Vec2& p2 = m.nodes[tri[2]];
    const double area = 0.5 * ((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
    // Gradients of the barycentric functions are rotated opposite edges over 2 * area.
    std::array<Vec2, 3> grad;
    const std::array<Vec2, 3> pts{p0, p1, p2};
    for (int a = 0; a < 3; ++a) {
      const Vec2 e = pts[(a + 2) % 3] - pts[(a + 1) % 3];
      grad[a] = Vec2(-e.y(), e.x()) / (2 * area);
    }
    std::array<double, 3> qmid{0, 0, 0};  // potential at the midpoint opposite each vertex
    if (g.potential) {
      for (int a = 0; a < 3; ++a) qmid[a] = (*g.potential)(0.5 * (pts[(a + 1) % 3] + pts[(a + 2) % 3]));
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        double k = area * grad[a].dot(grad[b]);
        if (g.potential) {
          // Edge-midpoint rule: phi_a phi_b is 1/4 at the midpoints of edges touching both.
          double s = 0.0;
          for (int c = 0; c < 3; ++c) {
            if (c == a || c == b) continue;
            s += qmid[c] * 0.25;
          }
          k += area / 3.0 * s;
        }
        tk.emplace_back(tri[a], tri[b], k);
        tm.emplace_back(tri[a], tri[b], area * (a == b ? 2.0 : 1.0) / 12.0);
      }
    }
  }

  std::set<int> dirichlet;
  for (const auto& e : m.boundary_edges) {
    auto it = table.find(e.tag);
    if (it == table.end()) throw InvalidArgument("mesh edge tag " + std::to_string(e.tag) + " is not in the geometry");
    const RobinCoeff& c = it->second.coeff;
    const bool constrained = it->second.interface ? interface_bc == InterfaceBc::Dirichlet : c.is_dirichlet();
    if (constrained) {
      dirichlet.insert(e.i);
      dirichlet.insert(e.j);
      continue;
    }
    if (it->second.interface || c.is_neumann()) continue;
    const double w = c.robin_ratio() * (m.nodes[e.j] - m.nodes[e.i]).norm();
    for (int q = 0; q < 4; ++q) {
      const double x = kGaussX[q];
      const std::array<double, 2> phi{1 - x, x};
      const std::array<int, 2> id{e.i, e.j};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) tr.emplace_back(id[a], id[b], w * kGaussW[q] * phi[a] * phi[b]);
      }
    }
  }

  op.stiffness = build(n, tk);
  op.mass = build(n, tm);
  op.robin = build(n, tr);
  op.dirichlet_nodes.assign(dirichlet.begin(), dirichlet.end());
  op.free_index.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (!dirichlet.count(i)) {
      op.free_index[i] = static_cast<int>(op.free_nodes.size());
      op.free_nodes.push_back(i);
    }
  }
  const SpMat full_system = op.stiffness + op.robin;
  op.system = submatrix(full_system, op.free_index, op.free_count());
  op.reduced_mass = submatrix(op.mass, op.free_index, op.free_count());
  return op;
}

InteriorEigenBasis neumann_eigs(const DiscreteOperator& op, double lambda_max) {
  if (!(lambda_max > 0)) throw InvalidArgument("lambda_max must be positive");
  if (op.interface_bc != InterfaceBc::Neumann) throw InvalidArgument("neumann_eigs needs a Neumann-interface operator");
  const EigenPairs ep = eigs_below(op.system, op.reduced_mass, lambda_max, true);
  InteriorEigenBasis basis;
  basis.mu.assign(ep.values.data(), ep.values.data() + ep.values.size());
  basis.modes = op.expand(ep.vectors);
  basis.lambda_max = lambda_max;
  basis.method = ep.method;

  std::map<int, std::set<int>> iface_nodes;
  for (const auto& e : op.mesh.boundary_edges) {
    if (is_interface_tag(e.tag)) {
      iface_nodes[e.tag].insert(e.i);
      iface_nodes[e.tag].insert(e.j);
    }
  }
  for (const auto& [tag, nodes] : iface_nodes) {
    InterfaceTrace tr;
    tr.tag = tag;
    tr.nodes.assign(nodes.begin(), nodes.end());
    tr.values.resize(static_cast<Eigen::Index>(tr.nodes.size()), basis.modes.cols());
    for (std::size_t r = 0; r < tr.nodes.size(); ++r) tr.values.row(static_cast<Eigen::Index>(r)) = basis.modes.row(tr.nodes[r]);
    basis.traces.push_back(std::move(tr));
  }
  return basis;
}

std::vector<double> dirichlet_eigs(const DiscreteOperator& op, double lambda_max) {
  if (!(lambda_max > 0)) throw InvalidArgument("lambda_max must be positive");
  if (op.interface_bc != InterfaceBc::Dirichlet) {
    throw InvalidArgument("dirichlet_eigs needs a Dirichlet-interface operator");
  }
  const EigenPairs ep = eigs_below(op.system, op.reduced_mass, lambda_max, false);
  return {ep.values.data(), ep.values.data() + ep.values.size()};
}

std::size_t count_below(const DiscreteOperator& op, double lambda) {
  return count_eigs_below(op.system, op.reduced_mass, lambda);
}

namespace {

template <class Value, class Fn>
Eigen::Matrix<Value, Eigen::Dynamic, 1> edge_load(const DiscreteOperator& op, int tag, const Fn& g) {
  Eigen::Matrix<Value, Eigen::Dynamic, 1> load =
      Eigen::Matrix<Value, Eigen::Dynamic, 1>::Zero(static_cast<Eigen::Index>(op.mesh.nodes.size()));
  for (const auto& e : op.mesh.boundary_edges) {
    if (e.tag != tag) continue;
    const Vec2& a = op.mesh.nodes[e.i];
    const Vec2& b = op.mesh.nodes[e.j];
    const double len = (b - a).norm();
    for (int q = 0; q < 4; ++q) {
      const double x = kGaussX[q];
      const Value gv = g((1 - x) * a + x * b) * (kGaussW[q] * len);
      load[e.i] += gv * (1 - x);
      load[e.j] += gv * x;
    }
  }
  return load;
}

}  // namespace

Eigen::VectorXd interface_load(const DiscreteOperator& op, int tag, const std::function<double(const Vec2&)>& g) {
  return edge_load<double>(op, tag, g);
}

Eigen::VectorXcd interface_load(const DiscreteOperator& op, int tag,
                                const std::function<std::complex<double>(const Vec2&)>& g) {
  return edge_load<std::complex<double>>(op, tag, g);
}

Eigen::MatrixXd solve_neumann_bvp(const DiscreteOperator& op, double lambda0, const Eigen::MatrixXd& loads,
                                  std::span<const double> known_mu) {
  if (op.interface_bc != InterfaceBc::Neumann) throw InvalidArgument("solve_neumann_bvp needs a Neumann-interface operator");
  for (double mu : known_mu) {
    if (std::abs(lambda0 - mu) <= 1e-6 * std::max(1.0, std::abs(mu))) {
      throw InvalidArgument("reference point " + std::to_string(lambda0) + " is within the pole margin of mu = " +
                            std::to_string(mu));
    }
  }
  const SpMat C = op.system - lambda0 * op.reduced_mass;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> f(C);
  if (f.info() != Eigen::Success) throw NumericalError("bvp", "factorization failed at lambda0 = " + std::to_string(lambda0));
  const Eigen::MatrixXd rhs = op.restrict(loads);
  const Eigen::MatrixXd x = f.solve(rhs);
  const double rn = rhs.norm();
  if (rn > 0) {
    const double res = (C * x - rhs).norm() / rn;
    if (!(res <= 1e-10)) {
      throw NumericalError("bvp", "residual " + std::to_string(res) + " at lambda0 = " + std::to_string(lambda0) +
                                      " (close to an interior eigenvalue?)");
    }
  }
  return op.expand(x);
}

}  // namespace spectral_ends

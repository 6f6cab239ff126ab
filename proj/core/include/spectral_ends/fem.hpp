#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spectral_ends/eigensolve.hpp"
#include "spectral_ends/geometry.hpp"
#include "spectral_ends/mesh.hpp"

namespace spectral_ends {

enum class InterfaceBc { Neumann, Dirichlet };

/// P1 discretization of the interior problem. Full matrices are indexed by mesh node;
/// `system` and `reduced_mass` act on the free (non-Dirichlet) nodes only.
struct DiscreteOperator {
  Mesh mesh;
  InterfaceBc interface_bc = InterfaceBc::Neumann;
  SpMat stiffness;  ///< gradient term plus potential
  SpMat mass;
  SpMat robin;      ///< (a/b) boundary mass on Robin segments
  std::vector<int> dirichlet_nodes;
  std::vector<int> free_nodes;  ///< free dof -> node
  std::vector<int> free_index;  ///< node -> free dof, -1 when constrained
  SpMat system;        ///< stiffness + robin on free nodes
  SpMat reduced_mass;  ///< mass on free nodes

  Eigen::Index free_count() const { return static_cast<Eigen::Index>(free_nodes.size()); }
  /// Free-node vectors to full nodal vectors (zeros on Dirichlet nodes).
  Eigen::MatrixXd expand(const Eigen::MatrixXd& free) const;
  /// Full nodal vectors restricted to free nodes.
  Eigen::MatrixXd restrict(const Eigen::MatrixXd& full) const;
  /// Interface edges (i, j) carrying `tag`.
  std::vector<BoundaryEdge> edges_with_tag(int tag) const;
};

DiscreteOperator assemble(const Mesh& m, const GeometryDesc& g, InterfaceBc interface_bc);

/// Nodal values of a mode on one interface.
struct InterfaceTrace {
  int tag = 0;
  std::vector<int> nodes;
  Eigen::MatrixXd values;  ///< nodes x modes
};

struct InteriorEigenBasis {
  std::vector<double> mu;  ///< ascending
  Eigen::MatrixXd modes;   ///< full nodal vectors, mass-orthonormal
  std::vector<InterfaceTrace> traces;
  double lambda_max = 0.0;
  std::string method;
};

/// All Neumann-interface eigenpairs with mu <= lambda_max.
InteriorEigenBasis neumann_eigs(const DiscreteOperator& op, double lambda_max);

/// Dirichlet-interface eigenvalues nu <= lambda_max, ascending.
std::vector<double> dirichlet_eigs(const DiscreteOperator& op, double lambda_max);

/// Number of discrete eigenvalues of `op` strictly below lambda.
std::size_t count_below(const DiscreteOperator& op, double lambda);

/// Load vectors l_i = integral over the interface `tag` of g * phi_i, 4-point Gauss per edge.
Eigen::VectorXd interface_load(const DiscreteOperator& op, int tag, const std::function<double(const Vec2&)>& g);
Eigen::VectorXcd interface_load(const DiscreteOperator& op, int tag,
                                const std::function<std::complex<double>(const Vec2&)>& g);

/// Solves (system - lambda0 * mass) v = loads column by column and returns full nodal
/// vectors. `known_mu` lets the caller enforce the pole margin: lambda0 within 1e-6
/// (relative to max(1, |mu|)) of any listed value is refused.
Eigen::MatrixXd solve_neumann_bvp(const DiscreteOperator& op, double lambda0, const Eigen::MatrixXd& loads,
                                  std::span<const double> known_mu = {});

}  // namespace spectral_ends

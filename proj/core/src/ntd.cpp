#include "spectral_ends/ntd.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

void SliceSpec::check(int M) const {
  if (!(1 <= a && a <= b && b <= M)) {
    throw InvalidArgument("slice " + std::to_string(a) + ":" + std::to_string(b) + " is not inside 1:" +
                          std::to_string(M));
  }
}

Eigen::MatrixXcd interface_loads(const DiscreteOperator& op, const std::vector<TransverseBasis>& bases,
                                 const std::vector<GlobalMode>& modes) {
  std::set<int> tags;
  for (const auto& e : op.mesh.boundary_edges) tags.insert(e.tag);
  for (const auto& b : bases) {
    if (!tags.count(b.tag)) {
      throw InvalidArgument("interface " + std::to_string(b.tag) + " has no mesh edges to carry trace data");
    }
  }
  Eigen::MatrixXcd G(static_cast<Eigen::Index>(op.mesh.nodes.size()), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const TransverseBasis& tb = bases.at(modes[k].basis);
    const std::size_t j = modes[k].local;
    G.col(static_cast<Eigen::Index>(k)) =
        interface_load(op, tb.tag, std::function<cdouble(const Vec2&)>([&](const Vec2& p) { return tb.eval_at(j, p); }));
  }
  return G;
}

Eigen::MatrixXcd coupling_matrix(const InteriorEigenBasis& basis, const Eigen::MatrixXcd& loads) {
  if (loads.rows() != basis.modes.rows()) throw InvalidArgument("coupling_matrix: load and mode sizes differ");
  if (loads.cols() < 1 || basis.modes.cols() < 1) throw InvalidArgument("coupling_matrix: need M, N >= 1");
  return loads.transpose() * basis.modes.cast<cdouble>();
}

R0Result r0_reference(const DiscreteOperator& op, const Eigen::MatrixXcd& loads, double lambda0,
                      const std::vector<double>& mu) {
  const Eigen::Index M = loads.cols();
  const bool complex_loads = loads.imag().cwiseAbs().maxCoeff() > 0.0;
  Eigen::MatrixXd rhs(loads.rows(), complex_loads ? 2 * M : M);
  rhs.leftCols(M) = loads.real();
  if (complex_loads) rhs.rightCols(M) = loads.imag();
  const Eigen::MatrixXd sol = solve_neumann_bvp(op, lambda0, rhs, mu);

  Eigen::MatrixXcd phi(loads.rows(), M);
  phi.real() = sol.leftCols(M);
  phi.imag() = complex_loads ? Eigen::MatrixXd(sol.rightCols(M)) : Eigen::MatrixXd::Zero(loads.rows(), M);

  // Energy form of the solutions: Phi^H (K + Robin - lambda0 M) Phi on the free nodes.
  const SpMat C = op.system - lambda0 * op.reduced_mass;
  Eigen::MatrixXcd pf(op.free_count(), M);
  pf.real() = op.restrict(phi.real());
  pf.imag() = op.restrict(phi.imag());
  Eigen::MatrixXcd cp(op.free_count(), M);
  cp.real() = C * pf.real();
  cp.imag() = C * pf.imag();
  const Eigen::MatrixXcd raw = pf.adjoint() * cp;

  R0Result out;
  out.R0 = 0.5 * (raw + raw.adjoint());
  const double n = raw.norm();
  out.asymmetry = n > 0 ? (raw - raw.adjoint()).norm() / n : 0.0;
  return out;
}

NtdData build_ntd(const DiscreteOperator& op, const InteriorEigenBasis& basis,
                  const std::vector<TransverseBasis>& bases, const std::vector<GlobalMode>& modes,
                  double lambda0, bool with_r0) {
  if (bases.empty() || modes.empty()) throw InvalidArgument("build_ntd: no transverse modes");
  NtdData d;
  const Eigen::MatrixXcd G = interface_loads(op, bases, modes);
  d.S = coupling_matrix(basis, G);
  d.mu = basis.mu;
  d.lambda0 = lambda0;
  for (const auto& m : modes) {
    d.kappa.push_back(m.kappa);
    const TransverseBasis& tb = bases[m.basis];
    if (tb.kind == BasisKind::Circle) {
      d.circle = true;
      d.radius = tb.radius;
      d.orders.push_back(tb.orders[m.local]);
    }
  }
  if (with_r0) {
    R0Result r = r0_reference(op, G, lambda0, basis.mu);
    d.R0 = std::move(r.R0);
    d.r0_asymmetry = r.asymmetry;
  }
  return d;
}

namespace {

void check_poles(const std::vector<double>& mu, cdouble lambda) {
  for (double m : mu) {
    if (std::abs(lambda - m) <= kNtdPoleMargin * std::max(1.0, std::abs(m))) {
      throw InvalidArgument("lambda is on the interior Neumann eigenvalue " + std::to_string(m));
    }
  }
}

}  // namespace

Eigen::MatrixXcd interior_ntd(const NtdData& d, cdouble lambda, const SliceSpec& rows, const SliceSpec& cols,
                              NtdForm form) {
  rows.check(d.M());
  cols.check(d.M());
  check_poles(d.mu, lambda);
  const bool accel = form == NtdForm::Accelerated || (form == NtdForm::Auto && d.R0.has_value());
  if (accel && !d.R0) throw InvalidArgument("accelerated NtD form needs the reference matrix R0");

  Eigen::VectorXcd w(d.N());
  for (int m = 0; m < d.N(); ++m) {
    w[m] = 1.0 / (d.mu[m] - lambda);
    if (accel) w[m] -= 1.0 / (d.mu[m] - d.lambda0);
  }
  const auto Sr = d.S.middleRows(rows.a - 1, rows.size());
  const auto Sc = d.S.middleRows(cols.a - 1, cols.size());
  Eigen::MatrixXcd R = Sr.conjugate() * w.asDiagonal() * Sc.transpose();
  if (accel) R += d.R0->block(rows.a - 1, cols.a - 1, rows.size(), cols.size());
  return R;
}

Eigen::MatrixXcd interior_ntd(const NtdData& d, cdouble lambda, const SliceSpec& slice, NtdForm form) {
  return interior_ntd(d, lambda, slice, slice, form);
}

Eigen::VectorXcd cylinder_ntd_diag(const std::vector<double>& kappa, cdouble lambda, BranchMode mode,
                                   const SliceSpec& slice) {
  slice.check(static_cast<int>(kappa.size()));
  Eigen::VectorXcd t(slice.size());
  for (int r = 0; r < slice.size(); ++r) {
    const cdouble w = kappa[slice.a - 1 + r] - lambda;
    if (w == 0.0) throw InvalidArgument("lambda sits on the threshold " + std::to_string(kappa[slice.a - 1 + r]));
    t[r] = 1.0 / branch_sqrt(w, mode);
  }
  return t;
}

bool DiscDiag::any_flagged() const { return std::find(flagged.begin(), flagged.end(), true) != flagged.end(); }

DiscDiag disc_ntd_diag(double rho, cdouble lambda, const std::vector<int>& orders) {
  if (lambda == 0.0) throw InvalidArgument("disc NtD is singular at lambda = 0");
  if (!(rho > 0)) throw InvalidArgument("disc NtD needs a positive radius");
  const cdouble k = branch_sqrt(lambda, BranchMode::NegativeImag);
  const cdouble z = rho * k;
  DiscDiag out;
  out.values.resize(static_cast<Eigen::Index>(orders.size()));
  out.flagged.assign(orders.size(), false);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    // H_{-n} = (-1)^n H_n, and the sign cancels in the ratio.
    const HankelValue hv = hankel1(std::abs(orders[i]), z);
    const double scale = std::abs(hv.h);
    if (std::abs(hv.dh) <= 1e-13 * scale) out.flagged[i] = true;
    out.values[static_cast<Eigen::Index>(i)] = hv.h / (k * hv.dh);
  }
  return out;
}

DiscDiag disc_ntd_diag(double rho, cdouble lambda, int M) {
  return disc_ntd_diag(rho, lambda, circle_basis(rho, M).orders);
}

}  // namespace spectral_ends

#include "spectral_ends/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

struct Pencil {
  Eigen::MatrixXd R;
  Eigen::VectorXd T;
};

Pencil evaluate(const NtdData& d, int J, double lambda) {
  const SliceSpec s = SliceSpec::upper(J, d.M());
  return {interior_ntd(d, lambda, s).real(), cylinder_ntd_diag(d.kappa, lambda, BranchMode::PositiveReal, s).real()};
}

/// Ascending eigenvalues of T^{-1/2} R T^{-1/2}.
Eigen::VectorXd scaled_eigs(const Pencil& p) {
  const Eigen::VectorXd ti = p.T.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd A = ti.asDiagonal() * p.R * ti.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

PencilSpectrum pencil_sigmas(const Eigen::MatrixXd& R, const Eigen::VectorXd& T, int K) {
  if (R.rows() != R.cols() || R.rows() != T.size()) throw InvalidArgument("pencil_sigmas: size mismatch");
  for (Eigen::Index k = 0; k < T.size(); ++k) {
    if (!(T[k] > 0)) throw InvalidArgument("pencil_sigmas: T entry " + std::to_string(k + 1) + " is not positive");
  }
  const Eigen::VectorXd ti = T.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd A = ti.asDiagonal() * R * ti.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
  const Eigen::VectorXd eta = es.eigenvalues();
  const double zero = 1e-14 * std::max(1.0, eta.cwiseAbs().maxCoeff());

  std::vector<Eigen::Index> finite;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (std::abs(eta[i]) > zero) finite.push_back(i);
  }
  std::stable_sort(finite.begin(), finite.end(), [&](auto a, auto b) { return 1.0 / eta[a] > 1.0 / eta[b]; });
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(K, 0)), finite.size());

  PencilSpectrum out;
  out.vectors.resize(R.rows(), static_cast<Eigen::Index>(keep));
  for (std::size_t j = 0; j < keep; ++j) {
    out.sigma.push_back(1.0 / eta[finite[j]]);
    Eigen::VectorXd c = ti.asDiagonal() * es.eigenvectors().col(finite[j]);
    out.vectors.col(static_cast<Eigen::Index>(j)) = c / c.norm();
  }
  return out;
}

CountBound count_bound(std::span<const double> mu, std::span<const double> nu, double L2, double lambda_max) {
  if (L2 > lambda_max) {
    throw InvalidArgument("count_bound: Lambda2 = " + fmt(L2) + " exceeds the eigenvalue cutoff " + fmt(lambda_max));
  }
  CountBound cb;
  for (double m : mu) {
    if (m == L2) throw InvalidArgument("count_bound: Lambda2 coincides with a Neumann eigenvalue");
    if (m < L2) ++cb.mu_below;
  }
  for (double n : nu) {
    if (n < L2) ++cb.nu_below;
  }
  const int raw = cb.mu_below - cb.nu_below;
  cb.clamped = raw < 0;
  cb.K = std::max(raw, 0);
  return cb;
}

std::pair<double, double> threshold_window(const std::vector<double>& kappa, int J) {
  if (J < 0 || J >= static_cast<int>(kappa.size())) {
    throw InvalidArgument("window index J = " + std::to_string(J) + " needs 0 <= J < M = " +
                          std::to_string(kappa.size()));
  }
  const double lo = J == 0 ? -std::numeric_limits<double>::infinity() : kappa[J - 1];
  return {lo, kappa[J]};
}

int negative_count(const NtdData& d, int J, double lambda) {
  const Pencil p = evaluate(d, J, lambda);
  const Eigen::MatrixXd A = p.R + Eigen::MatrixXd(p.T.asDiagonal());
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
  return static_cast<int>((ev.array() < 0).count());
}

double orthogonality_residual(const Eigen::VectorXd& c, const Eigen::MatrixXd& B) {
  if (B.cols() != c.size()) throw InvalidArgument("orthogonality_residual: size mismatch");
  const double bn = B.size() ? Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues()(0) : 0.0;
  const double cn = c.norm();
  if (bn == 0.0 || cn == 0.0) return 0.0;
  return (B * c).norm() / (bn * cn);
}

double orthogonality_residual(const Eigen::VectorXd& c, const NtdData& d, double lambda, int J) {
  if (J <= 0) throw InvalidArgument("orthogonality_residual needs J > 0");
  const Eigen::MatrixXd B =
      interior_ntd(d, lambda, SliceSpec::lower(J), SliceSpec::upper(J, d.M())).real();
  return orthogonality_residual(c, B);
}

SearchReport find_eigenvalues(const NtdData& d, int J, const SearchOptions& opt) {
  if (d.circle) throw InvalidArgument("real eigenvalue search needs cylindrical ends");
  if (!(opt.tol > 0)) throw InvalidArgument("root tolerance must be positive");
  SearchReport rep;
  rep.J = J;
  std::tie(rep.window_lo, rep.window_hi) = threshold_window(d.kappa, J);
  if (!(rep.window_lo < rep.window_hi)) {
    throw InvalidArgument("window J = " + std::to_string(J) + " is empty (repeated threshold " + fmt(rep.window_hi) + ")");
  }
  const double lo = std::max(opt.lo, rep.window_lo);
  const double hi = std::min(opt.hi, rep.window_hi - 1e-7 * std::max(1.0, std::abs(rep.window_hi)));
  if (!(lo < hi)) throw InvalidArgument("search range [" + fmt(opt.lo) + ", " + fmt(opt.hi) + "] misses window " +
                                        std::to_string(J));

  // Pole clusters: overlapping margins around the mu inside the range are merged.
  struct Cluster {
    double a, b;
    std::vector<int> members;
  };
  std::vector<Cluster> clusters;
  for (int m = 0; m < d.N(); ++m) {
    const double mu = d.mu[m];
    const double r = std::max(1e-6, 1e-6 * std::abs(mu));
    if (mu + r <= lo || mu - r >= hi) continue;
    if (!clusters.empty() && mu - r <= clusters.back().b) {
      clusters.back().b = std::max(clusters.back().b, mu + r);
      clusters.back().members.push_back(m);
    } else {
      clusters.push_back({mu - r, mu + r, {m}});
    }
  }

  std::vector<std::pair<double, double>> pieces;
  double cur = lo;
  for (const auto& c : clusters) {
    if (c.a > cur) pieces.emplace_back(cur, std::min(c.a, hi));
    cur = std::max(cur, c.b);
  }
  if (cur < hi) pieces.emplace_back(cur, hi);

  auto count = [&](double x) { return negative_count(d, J, x); };
  for (const auto& [a, b] : pieces) rep.intervals.push_back({a, b, count(a), count(b)});

  // Negative eta curves increase on pole-free pieces; sampled order statistics must too.
  for (const auto& iv : rep.intervals) {
    const int ns = std::max(opt.audit_samples, 2);
    Eigen::VectorXd prev;
    for (int s = 0; s < ns; ++s) {
      const double x = iv.a + (iv.b - iv.a) * s / (ns - 1);
      const Eigen::VectorXd eta = scaled_eigs(evaluate(d, J, x));
      if (s > 0) {
        for (Eigen::Index j = 0; j < eta.size(); ++j) {
          if (prev[j] < 0 && eta[j] < 0) {
            const double dec = prev[j] - eta[j];
            rep.audit_worst_decrease = std::max(rep.audit_worst_decrease, dec);
            if (dec > 1e-9 * (1 + std::abs(eta[j]))) {
              throw NumericalError("solver", "monotonicity audit failed on [" + fmt(iv.a) + ", " + fmt(iv.b) +
                                                 "]: eta curve " + std::to_string(j + 1) + " decreased by " +
                                                 fmt(dec) + " near lambda = " + fmt(x));
            }
          }
        }
      }
      prev = eta;
    }
    if (iv.count_a < iv.count_b) {
      throw NumericalError("solver", "negative count increased across the pole-free piece [" + fmt(iv.a) + ", " +
                                         fmt(iv.b) + "]");
    }
  }

  // A pole whose trace couples to the active modes raises the count by its rank; a smaller
  // jump means a crossing fell inside the excluded margin.
  const SliceSpec up = SliceSpec::upper(J, d.M());
  const double snorm = d.S.middleRows(up.a - 1, up.size()).norm();
  for (std::size_t i = 0; i + 1 < rep.intervals.size(); ++i) {
    const double a = rep.intervals[i].b, b = rep.intervals[i + 1].a;
    std::vector<int> in;
    for (const auto& c : clusters) {
      if (c.a >= a - 1e-15 && c.b <= b + 1e-15) in.insert(in.end(), c.members.begin(), c.members.end());
    }
    if (in.empty()) continue;
    Eigen::MatrixXcd cols(up.size(), static_cast<Eigen::Index>(in.size()));
    for (std::size_t k = 0; k < in.size(); ++k) {
      cols.col(static_cast<Eigen::Index>(k)) = d.S.block(up.a - 1, in[k], up.size(), 1);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(cols);
    const int rank = static_cast<int>((svd.singularValues().array() > 1e-8 * std::max(snorm, 1e-300)).count());
    const int jump = rep.intervals[i + 1].count_a - rep.intervals[i].count_b;
    if (jump != rank) {
      rep.warnings.push_back("pole margin [" + fmt(a) + ", " + fmt(b) + "]: count changes by " + std::to_string(jump) +
                             " where the pole rank is " + std::to_string(rank) +
                             "; a crossing may be hidden inside the margin");
    }
  }

  std::function<void(double, double, int, int)> isolate = [&](double a, double b, int na, int nb) {
    if (na == nb) return;
    if (na < nb) throw NumericalError("solver", "negative count increased inside [" + fmt(a) + ", " + fmt(b) + "]");
    if (b - a <= opt.tol) {
      EigenFinding f;
      f.bracket_lo = a;
      f.bracket_hi = b;
      f.lambda = 0.5 * (a + b);
      f.multiplicity = na - nb;
      rep.findings.push_back(f);
      return;
    }
    const double mid = 0.5 * (a + b);
    const int nm = count(mid);
    isolate(a, mid, na, nm);
    isolate(mid, b, nm, nb);
  };
  for (const auto& iv : rep.intervals) isolate(iv.a, iv.b, iv.count_a, iv.count_b);

  for (auto& f : rep.findings) {
    f.window_lo = rep.window_lo;
    f.window_hi = rep.window_hi;
    const Pencil p = evaluate(d, J, f.lambda);
    const Eigen::MatrixXd A = p.R + Eigen::MatrixXd(p.T.asDiagonal());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    Eigen::Index best = 0;
    es.eigenvalues().cwiseAbs().minCoeff(&best);
    f.c = es.eigenvectors().col(best);
    const PencilSpectrum ps = pencil_sigmas(p.R, p.T, d.M() - J);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ps.sigma.size(); ++j) {
      if (std::abs(ps.sigma[j] + 1) < gap) {
        gap = std::abs(ps.sigma[j] + 1);
        f.sigma_index = static_cast<int>(j) + 1;
      }
    }
    if (J > 0) {
      f.has_orth = true;
      f.orth_residual = orthogonality_residual(f.c, d, f.lambda, J);
      f.embedded_flag = f.orth_residual < opt.embedded_threshold;
    }
  }
  std::sort(rep.findings.begin(), rep.findings.end(),
            [](const EigenFinding& x, const EigenFinding& y) { return x.lambda < y.lambda; });
  return rep;
}

}  // namespace spectral_ends

#include "spectral_ends/transverse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

constexpr double kPi = std::numbers::pi;

double norm_squared(double A, double B, double k, double L) {
  if (k == 0.0) return A * A * L;
  const double s2 = std::sin(2 * k * L) / (4 * k);
  const double sk = std::sin(k * L);
  return A * A * (0.5 * L + s2) + B * B * (0.5 * L - s2) + A * B * sk * sk / k;
}

void push_mode(TransverseBasis& tb, double k, double A, double B) {
  const double n = std::sqrt(norm_squared(A, B, k, tb.length));
  tb.k.push_back(k);
  tb.kappa.push_back(k * k);
  tb.cos_coeff.push_back(A / n);
  tb.sin_coeff.push_back(B / n);
}

}  // namespace

std::complex<double> TransverseBasis::eval(std::size_t j, double t) const {
  if (kind == BasisKind::Interval) return cos_coeff[j] * std::cos(k[j] * t) + sin_coeff[j] * std::sin(k[j] * t);
  return std::polar(1.0 / std::sqrt(2 * kPi * radius), orders[j] * t);
}

double TransverseBasis::deriv(std::size_t j, double s) const {
  return k[j] * (-cos_coeff[j] * std::sin(k[j] * s) + sin_coeff[j] * std::cos(k[j] * s));
}

double TransverseBasis::coordinate(const Vec2& p) const {
  if (kind == BasisKind::Interval) {
    const Vec2 d = line.p1 - line.p0;
    return std::clamp((p - line.p0).dot(d) / d.norm(), 0.0, length);
  }
  const Vec2 r = p - center;
  return std::atan2(r.y(), r.x());
}

std::complex<double> TransverseBasis::eval_at(std::size_t j, const Vec2& p) const { return eval(j, coordinate(p)); }

TransverseBasis interval_basis(double L, const RobinCoeff& left, const RobinCoeff& right, int M) {
  if (!(L > 0)) throw InvalidArgument("interval_basis: length must be positive");
  if (M < 1) throw InvalidArgument("interval_basis: need at least one mode");
  TransverseBasis tb;
  tb.kind = BasisKind::Interval;
  tb.length = L;
  tb.line = LineSegment{Vec2(0, 0), Vec2(L, 0)};

  const bool lD = left.is_dirichlet(), lN = left.is_neumann(), rD = right.is_dirichlet(), rN = right.is_neumann();
  for (int j = 1; j <= M; ++j) {
    if (lD && rD) {
      push_mode(tb, j * kPi / L, 0.0, 1.0);
    } else if (lD && rN) {
      push_mode(tb, (j - 0.5) * kPi / L, 0.0, 1.0);
    } else if (lN && rD) {
      push_mode(tb, (j - 0.5) * kPi / L, 1.0, 0.0);
    } else if (lN && rN) {
      push_mode(tb, (j - 1) * kPi / L, 1.0, 0.0);
    } else {
      // w = b0 k cos(ks) + a0 sin(ks) satisfies the left condition; the right condition
      // F(k) = 0 has exactly one root per interval ((j-1) pi / L, j pi / L] for
      // nonnegative Robin ratios. G = F / k removes the spurious root at k = 0.
      const double a0 = left.a(), b0 = left.b(), aL = right.a(), bL = right.b();
      auto G = [&](double kk) {
        const double c = std::cos(kk * L), s = std::sin(kk * L);
        const double F = aL * (b0 * kk * c + a0 * s) + bL * (-b0 * kk * kk * s + a0 * kk * c);
        return F / kk;
      };
      double lo = (j - 1) * kPi / L + (j == 1 ? 1e-9 * kPi / L : 0.0);
      double hi = j * kPi / L;
      double glo = G(lo);
      const double ghi = G(hi);
      if (ghi == 0.0) {
        lo = hi;
      } else {
        if (glo == 0.0 || (glo > 0) == (ghi > 0)) {
          throw NumericalError("transverse", "Robin root bracket " + std::to_string(j) + " has no sign change");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = G(mid);
          if ((gm > 0) == (glo > 0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
      }
      const double kk = 0.5 * (lo + hi);
      push_mode(tb, kk, b0 * kk, a0);
    }
  }
  return tb;
}

TransverseBasis circle_basis(double rho, int M, const Vec2& center) {
  if (!(rho > 0)) throw InvalidArgument("circle_basis: radius must be positive");
  if (M < 1 || M % 2 == 0) throw InvalidArgument("circle_basis: M must be a positive odd number");
  TransverseBasis tb;
  tb.kind = BasisKind::Circle;
  tb.radius = rho;
  tb.center = center;
  tb.length = 2 * kPi * rho;
  tb.orders.push_back(0);
  for (int n = 1; static_cast<int>(tb.orders.size()) < M; ++n) {
    tb.orders.push_back(n);
    tb.orders.push_back(-n);
  }
  for (int n : tb.orders) tb.kappa.push_back(static_cast<double>(n * n) / (rho * rho));
  return tb;
}

std::vector<GlobalMode> global_order(const std::vector<TransverseBasis>& bases, int M) {
  std::vector<GlobalMode> all;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (std::size_t j = 0; j < bases[b].size(); ++j) all.push_back({b, j, bases[b].kappa[j]});
  }
  std::stable_sort(all.begin(), all.end(), [](const GlobalMode& x, const GlobalMode& y) { return x.kappa < y.kappa; });
  if (M < 1) throw InvalidArgument("global_order: M must be positive");
  if (static_cast<std::size_t>(M) < all.size()) all.resize(M);
  return all;
}

std::vector<TransverseBasis> interface_bases(const GeometryDesc& g, int M) {
  std::vector<TransverseBasis> out;
  if (g.artificial_circle) {
    out.push_back(circle_basis(g.artificial_circle->radius, M, g.artificial_circle->center));
    out.back().tag = interface_tag(0);
    return out;
  }
  for (std::size_t n = 0; n < g.ends.size(); ++n) {
    const auto& e = g.ends[n];
    TransverseBasis tb = interval_basis(e.width, e.left, e.right, M);
    tb.line = e.attach_line;
    tb.tag = interface_tag(static_cast<int>(n));
    out.push_back(std::move(tb));
  }
  return out;
}

}  // namespace spectral_ends

#include "spectral_ends/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "spectral_ends/error.hpp"

namespace spectral_ends {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEuler = 0.57721566490153286061;
constexpr double kSeriesRadius = 12.0;
const cdouble kI(0.0, 1.0);

void check_range(int n, cdouble z) {
  const double r = std::abs(z);
  if (std::abs(n) > kMaxBesselOrder || !(r >= kMinBesselArg && r <= kMaxBesselArg)) {
    throw InvalidArgument("Bessel evaluation outside the supported range: n = " + std::to_string(n) +
                          ", |z| = " + std::to_string(r));
  }
}

// Ascending series sum_k (-z^2/4)^k / (k! (n+k)!) times (z/2)^n.
cdouble j_series(int n, cdouble z) {
  const cdouble q = -0.25 * z * z;
  cdouble term = 1.0;
  for (int k = 1; k <= n; ++k) term *= 0.5 * z / static_cast<double>(k);
  cdouble sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (n + k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// J_0 .. J_nmax by Miller's backward recurrence normalized with the generating function
// e^{iz} = J_0 + 2 sum_k i^k J_k (or its conjugate form in the upper half plane).
std::vector<cdouble> j_miller(int nmax, cdouble z) {
  const double r = std::abs(z);
  const int start = std::max(nmax, static_cast<int>(r)) + 40 + static_cast<int>(6.0 * std::cbrt(r));
  std::vector<cdouble> j(start + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = (2.0 * k / z) * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > 1e250) {
      for (int m = k - 1; m <= start + 1; ++m) j[m] *= 1e-250;
    }
  }
  const bool upper = z.imag() > 0;
  const cdouble unit = upper ? -kI : kI;
  cdouble phase = 1.0, norm = j[0];
  for (int k = 1; k <= start; ++k) {
    phase *= unit;
    norm += 2.0 * phase * j[k];
  }
  const cdouble scale = std::exp(upper ? -kI * z : kI * z) / norm;
  j.resize(nmax + 1);
  for (auto& v : j) v *= scale;
  return j;
}

std::vector<cdouble> j_values(int nmax, cdouble z) {
  if (std::abs(z) <= kSeriesRadius) {
    std::vector<cdouble> j(nmax + 1);
    for (int k = 0; k <= nmax; ++k) j[k] = j_series(k, z);
    return j;
  }
  return j_miller(nmax, z);
}

// Y_n for n = 0, 1 from the logarithmic series, valid for moderate |z|.
cdouble y_series(int n, cdouble z, cdouble jn) {
  const cdouble half = 0.5 * z;
  const cdouble q = -0.25 * z * z;
  cdouble result = (2.0 / kPi) * std::log(half) * jn;
  if (n == 1) result -= 1.0 / (kPi * half);
  // -(z/2)^n / pi * sum_k [psi(k+1) + psi(n+k+1)] q^k / (k! (n+k)!)
  double psi_a = -kEuler;                       // psi(k+1)
  double psi_b = -kEuler + (n == 1 ? 1.0 : 0.0);  // psi(n+k+1)
  cdouble term = (n == 1) ? half : cdouble(1.0);
  cdouble sum = (psi_a + psi_b) * term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (n + k));
    psi_a += 1.0 / k;
    psi_b += 1.0 / (n + k);
    const cdouble add = (psi_a + psi_b) * term;
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum) && k > 2) break;
  }
  return result - sum / kPi;
}

// H^(1)_nu for nu = 0, 1 from the Hankel asymptotic expansion (large |z|).
cdouble h_asymptotic(int nu, cdouble z) {
  const double mu = 4.0 * nu * nu;
  cdouble term = 1.0, sum = 1.0;
  double best = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= kI * (mu - odd * odd) / (8.0 * k * z);
    const double mag = std::abs(term);
    if (mag > best) break;
    best = mag;
    sum += term;
    if (mag < 1e-17) break;
  }
  return std::sqrt(2.0 / (kPi * z)) * std::exp(kI * (z - 0.5 * nu * kPi - 0.25 * kPi)) * sum;
}

// K_nu(x) for nu = 0, 1 and Re x > 0 from the integral of exp(-x cosh t) cosh(nu t) over
// t >= 0. The trapezoid rule converges geometrically; its step follows the width of the
// strip in which the integrand keeps decaying.
cdouble k_integral(int nu, cdouble x) {
  const double d = std::atan2(x.real(), std::abs(x.imag()));
  const double h = std::min(0.1, 2.0 * kPi * d / 45.0);
  cdouble sum = 0.5 * std::exp(-x);
  for (int k = 1; k < 100000; ++k) {
    const double t = k * h;
    const cdouble f = std::exp(-x * std::cosh(t)) * std::cosh(nu * t);
    sum += f;
    if (std::abs(f) < 1e-18 * std::abs(sum)) break;
  }
  return h * sum;
}

// H_0 .. H_nmax for Im z >= 0, where H^(1) grows with the order and forward recurrence is stable.
std::vector<cdouble> h_upper(int nmax, cdouble z) {
  const int top = std::max(nmax, 1);
  std::vector<cdouble> h(top + 1);
  if (std::abs(z) > kSeriesRadius) {
    h[0] = h_asymptotic(0, z);
    h[1] = h_asymptotic(1, z);
  } else if (z.imag() >= 2.0) {
    // H_nu(z) = (2/pi) i^{-nu-1} K_nu(-iz) avoids the cancellation in J + iY.
    const cdouble x = -kI * z;
    h[0] = (2.0 / kPi) * (-kI) * k_integral(0, x);
    h[1] = (2.0 / kPi) * (-1.0) * k_integral(1, x);
  } else {
    const cdouble j0 = j_series(0, z), j1 = j_series(1, z);
    h[0] = j0 + kI * y_series(0, z, j0);
    h[1] = j1 + kI * y_series(1, z, j1);
  }
  for (int k = 1; k < top; ++k) h[k + 1] = (2.0 * k / z) * h[k] - h[k - 1];
  return h;
}

// H_0 .. H_nmax. In the lower half plane H^(1) decays with the order, so it is recovered
// from H^(1) = 2J - H^(2) with H^(2)_n(z) = conj(H^(1)_n(conj z)).
std::vector<cdouble> h_values(int nmax, cdouble z) {
  std::vector<cdouble> h;
  if (z.imag() >= 0) {
    h = h_upper(nmax, z);
  } else {
    h = h_upper(nmax, std::conj(z));
    const auto j = j_values(static_cast<int>(h.size()) - 1, z);
    for (std::size_t k = 0; k < h.size(); ++k) h[k] = 2.0 * j[k] - std::conj(h[k]);
  }
  for (const auto& v : h) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("specfun", "Hankel function overflow at |z| = " + std::to_string(std::abs(z)));
    }
  }
  return h;
}

double sign_for_order(int n) { return (n < 0 && (n % 2 != 0)) ? -1.0 : 1.0; }

}  // namespace

cdouble branch_sqrt(cdouble w, BranchMode mode) {
  if (w.imag() == 0.0) w = cdouble(w.real(), 0.0);  // drop a negative zero
  cdouble r = std::sqrt(w);
  switch (mode) {
    case BranchMode::Principal:
      return r;
    case BranchMode::PositiveReal:
      if (r.real() < 0 || (r.real() == 0 && r.imag() < 0)) r = -r;
      return r;
    case BranchMode::NegativeImag:
      if (r.imag() > 0 || (r.imag() == 0 && r.real() < 0)) r = -r;
      return r;
  }
  return r;
}

cdouble bessel_j(int n, cdouble z) {
  check_range(n, z);
  const int a = std::abs(n);
  return sign_for_order(n) * j_values(a, z)[a];
}

cdouble bessel_y(int n, cdouble z) {
  check_range(n, z);
  const int a = std::abs(n);
  const auto h = h_values(a, z);
  const auto j = j_values(a, z);
  return sign_for_order(n) * (h[a] - j[a]) / kI;
}

HankelValue hankel1(int n, cdouble z) {
  check_range(n, z);
  const int a = std::abs(n);
  const auto h = h_values(a + 1, z);
  // H'_a = H_{a-1} - (a/z) H_a, with H'_0 = -H_1
  const cdouble d = (a == 0) ? -h[1] : h[a - 1] - (static_cast<double>(a) / z) * h[a];
  const double s = sign_for_order(n);
  return {s * h[a], s * d};
}

}  // namespace spectral_ends

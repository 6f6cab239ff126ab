#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spectral_ends/error.hpp"
#include "spectral_ends/specfun.hpp"

using namespace spectral_ends;

namespace {
constexpr double kPi = std::numbers::pi;
const cdouble I{0.0, 1.0};
}  // namespace

TEST_CASE("H_0(1) against tabulated J_0 and Y_0") {
  const HankelValue h = hankel1(0, 1.0);
  CHECK(h.h.real() == doctest::Approx(0.7651976866).epsilon(1e-10));
  CHECK(h.h.imag() == doctest::Approx(0.0882569642).epsilon(1e-9));
  // H_0' = -H_1, J_1(1) = 0.4400505857, Y_1(1) = -0.7812128213
  CHECK(h.dh.real() == doctest::Approx(-0.4400505857).epsilon(1e-9));
  CHECK(h.dh.imag() == doctest::Approx(0.7812128213).epsilon(1e-9));
}

TEST_CASE("Wronskian at z = 2 + 0.5i for orders up to 10") {
  const cdouble z{2.0, 0.5};
  for (int n = 0; n <= 10; ++n) {
    const cdouble j = bessel_j(n, z), y = bessel_y(n, z);
    const HankelValue h = hankel1(n, z);
    const cdouble jn1 = bessel_j(n + 1, z), yn1 = bessel_y(n + 1, z);
    const cdouble jd = double(n) / z * j - jn1;
    const cdouble yd = double(n) / z * y - yn1;
    CHECK(std::abs((j * yd - jd * y) * kPi * z / 2.0 - 1.0) <= 1e-9);
    CHECK(std::abs(h.h - (j + I * y)) <= 1e-12 * std::abs(h.h));
    CHECK(std::abs(h.dh - (jd + I * yd)) <= 1e-9 * std::abs(h.dh));
  }
}

TEST_CASE("large-argument asymptotics at |z| = 80") {
  for (double arg : {0.0, -0.03}) {
    const cdouble z = std::polar(80.0, arg);
    const cdouble lead = std::sqrt(2.0 / (kPi * z)) * std::exp(I * (z - kPi / 4));
    const cdouble h = hankel1(0, z).h;
    CHECK(std::abs(h - lead) / std::abs(h) <= 2e-3);
    CHECK(std::abs(h - lead * (1.0 - I / (8.0 * z) - 9.0 / (128.0 * z * z))) / std::abs(h) <= 1e-6);
  }
}

TEST_CASE("reflection and negative orders") {
  for (const cdouble z : {cdouble(3.0, 1.0), cdouble(15.0, -2.0), cdouble(0.4, 0.3)}) {
    for (int n = 0; n <= 12; ++n) {
      const cdouble a = bessel_j(n, std::conj(z));
      const cdouble b = std::conj(bessel_j(n, z));
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
      const HankelValue hp = hankel1(n, z), hm = hankel1(-n, z);
      const double sign = n % 2 ? -1.0 : 1.0;
      CHECK(std::abs(hm.h - sign * hp.h) <= 1e-14 * std::abs(hp.h));
      CHECK(std::abs(hm.dh - sign * hp.dh) <= 1e-14 * std::abs(hp.dh));
    }
  }
}

TEST_CASE("supported range is enforced") {
  CHECK_THROWS_AS(hankel1(0, 150.0), InvalidArgument);
  CHECK_THROWS_AS(hankel1(0, 1e-5), InvalidArgument);
  CHECK_THROWS_AS(hankel1(61, 2.0), InvalidArgument);
}

TEST_CASE("branch_sqrt modes") {
  CHECK(branch_sqrt(4.0, BranchMode::PositiveReal) == cdouble(2.0, 0.0));
  const cdouble r = branch_sqrt(-1.0, BranchMode::NegativeImag);
  CHECK(r.real() == doctest::Approx(0.0));
  CHECK(r.imag() == doctest::Approx(-1.0));
  // tie-breaks on the cuts
  const cdouble p = branch_sqrt(cdouble(-4.0, -0.0), BranchMode::PositiveReal);
  CHECK(p.real() == 0.0);
  CHECK(p.imag() == doctest::Approx(2.0));
  CHECK(branch_sqrt(4.0, BranchMode::NegativeImag) == cdouble(2.0, 0.0));
  const cdouble q = branch_sqrt(cdouble(-4.0, -0.0), BranchMode::Principal);
  CHECK(q.imag() == doctest::Approx(2.0));

  const double kappa = kPi * kPi / 4;
  const cdouble t = branch_sqrt(kappa - cdouble(2.5, -0.01), BranchMode::PositiveReal);
  CHECK(t.real() > 0);
}

TEST_CASE("branch_sqrt squares back and honours the sign constraint") {
  for (int a = 0; a < 36; ++a) {
    for (double rad : {1e-3, 0.5, 3.0, 1e4}) {
      const cdouble w = std::polar(rad, -kPi + 2 * kPi * (a + 0.5) / 36);
      for (BranchMode m : {BranchMode::PositiveReal, BranchMode::NegativeImag, BranchMode::Principal}) {
        const cdouble s = branch_sqrt(w, m);
        CHECK(std::abs(s * s - w) <= 1e-15 * 4 * std::abs(w));
        if (m == BranchMode::PositiveReal) CHECK(s.real() > 0);
        if (m == BranchMode::NegativeImag) CHECK(s.imag() < 0);
      }
    }
  }
}

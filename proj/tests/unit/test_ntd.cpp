#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spectral_ends/error.hpp"
#include "spectral_ends/ntd.hpp"

using namespace spectral_ends;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
  GeometryDesc g;
  DiscreteOperator op;
  InteriorEigenBasis basis;
  std::vector<TransverseBasis> bases;
  std::vector<GlobalMode> modes;
  NtdData d;
};

Setup setup(const std::string& preset, const std::map<std::string, double>& params, int steps, double lambda_max,
            int M) {
  Setup s;
  s.g = build_preset(preset, params);
  Mesh m = generate(s.g, default_h0(s.g));
  for (int i = 0; i < steps; ++i) m = refine(m, s.g);
  s.op = assemble(m, s.g, InterfaceBc::Neumann);
  s.basis = neumann_eigs(s.op, lambda_max);
  s.bases = interface_bases(s.g, M);
  s.modes = global_order(s.bases, M);
  s.d = build_ntd(s.op, s.basis, s.bases, s.modes, -1.0);
  return s;
}

double rect_exact(double kappa, double lambda) {
  const double s = std::sqrt(kappa - lambda);
  return 1.0 / (s * std::tanh(s));
}

}  // namespace

TEST_CASE("rect-test coupling is one entry per column") {
  const Setup s = setup("rect-test", {}, 4, 50.0, 6);
  for (int m = 0; m < s.d.N(); ++m) {
    // degenerate pairs such as (1,2)/(2,1) mix inside their eigenspace
    bool degenerate = false;
    for (int o = 0; o < s.d.N(); ++o) degenerate |= o != m && std::abs(s.d.mu[o] - s.d.mu[m]) < 1e-2 * s.d.mu[m];
    if (degenerate) continue;
    Eigen::Index top = 0;
    s.d.S.col(m).cwiseAbs().maxCoeff(&top);
    for (Eigen::Index k = 0; k < s.d.M(); ++k) {
      if (k != top) CHECK(std::abs(s.d.S(k, m)) <= 1e-3);
    }
  }
}

TEST_CASE("coupling columns obey Bessel's inequality") {
  const Setup s = setup("bent-waveguide", {}, 2, 60.0, 10);
  // squared L2 norm of each P1 trace over the interfaces
  for (int m = 0; m < s.d.N(); ++m) {
    double trace2 = 0.0;
    for (const auto& b : s.bases) {
      for (const auto& e : s.op.edges_with_tag(b.tag)) {
        const double len = (s.op.mesh.nodes[e.j] - s.op.mesh.nodes[e.i]).norm();
        const double a = s.basis.modes(e.i, m), c = s.basis.modes(e.j, m);
        trace2 += len / 3.0 * (a * a + a * c + c * c);
      }
    }
    CHECK(s.d.S.col(m).squaredNorm() <= trace2 + 1e-8);
  }
}

TEST_CASE("parity decoupling on the symmetric obstructed strip") {
  const Setup s = setup("obstructed-strip", {{"delta", 0.0}, {"radius", 0.3}}, 2, 40.0, 8);
  for (int m = 0; m < s.d.N(); ++m) {
    double even = 0.0, odd = 0.0;
    for (int k = 0; k < s.d.M(); ++k) (k % 2 == 0 ? even : odd) = std::max(k % 2 == 0 ? even : odd, std::abs(s.d.S(k, m)));
    CHECK(std::min(even, odd) <= 1e-8);
  }
}

TEST_CASE("reference matrix on rect-test is the analytic diagonal") {
  const Setup s = setup("rect-test", {}, 4, 50.0, 3);
  REQUIRE(s.d.R0.has_value());
  const Eigen::MatrixXd R0 = s.d.R0->real();
  CHECK(s.d.R0->imag().norm() == 0.0);
  for (int j = 0; j < 2; ++j) CHECK(R0(j, j) == doctest::Approx(rect_exact(s.d.kappa[j], -1.0)).epsilon(1e-3));
  CHECK(R0(2, 2) == doctest::Approx(rect_exact(s.d.kappa[2], -1.0)).epsilon(1e-2));
  const Eigen::MatrixXd off = R0 - Eigen::MatrixXd(R0.diagonal().asDiagonal());
  CHECK(off.cwiseAbs().maxCoeff() <= 1e-3 * R0.diagonal().maxCoeff());
}

TEST_CASE("reference matrix asymmetry stays below 1e-6 at refine 3") {
  const std::map<std::string, std::map<std::string, double>> presets{
      {"rect-test", {}}, {"bent-waveguide", {}}, {"obstructed-strip", {{"radius", 0.3}}},
      {"cshape-cavity", {{"eps", 0.3}}}, {"gaussian-potential", {}}};
  for (const auto& [name, params] : presets) {
    CAPTURE(name);
    const GeometryDesc g = build_preset(name, params);
    Mesh m = generate(g, default_h0(g));
    for (int i = 0; i < 3; ++i) m = refine(m, g);
    const DiscreteOperator op = assemble(m, g, InterfaceBc::Neumann);
    const auto bases = interface_bases(g, g.artificial_circle ? 11 : 10);
    const Eigen::MatrixXcd loads = interface_loads(op, bases, global_order(bases, g.artificial_circle ? 11 : 10));
    const R0Result r = r0_reference(op, loads, -1.0, {});
    CHECK(r.asymmetry <= 1e-6);
    CHECK((r.R0 - r.R0.adjoint()).norm() == 0.0);
  }
}

TEST_CASE("reference point on a Neumann eigenvalue is refused") {
  const Setup s = setup("rect-test", {}, 2, 100.0, 3);
  REQUIRE(s.basis.mu.size() >= 3);
  const Eigen::MatrixXcd loads = interface_loads(s.op, s.bases, s.modes);
  CHECK_THROWS_AS(r0_reference(s.op, loads, s.basis.mu[2] + 1e-9, s.basis.mu), InvalidArgument);
  CHECK_THROWS_AS(interior_ntd(s.d, s.basis.mu[0], SliceSpec::full(3)), InvalidArgument);
}

TEST_CASE("interior NtD forms") {
  const Setup s = setup("rect-test", {}, 4, 200.0, 4);
  const SliceSpec all = SliceSpec::full(s.d.M());

  SUBCASE("at the reference point the accelerated form is the reference matrix") {
    const Eigen::MatrixXcd R = interior_ntd(s.d, s.d.lambda0, all, NtdForm::Accelerated);
    CHECK((R - *s.d.R0).norm() == 0.0);
  }
  SUBCASE("real lambda gives a symmetric matrix") {
    for (double lam : {-3.0, 1.0, 15.0}) {
      const Eigen::MatrixXcd R = interior_ntd(s.d, lam, all);
      CHECK((R - R.transpose()).norm() <= 1e-12 * R.norm());
    }
  }
  SUBCASE("acceleration beats the direct sum on the analytic oracle") {
    const Eigen::MatrixXcd Ra = interior_ntd(s.d, 1.0, all, NtdForm::Accelerated);
    const Eigen::MatrixXcd Rd = interior_ntd(s.d, 1.0, all, NtdForm::Direct);
    for (int j = 0; j < 2; ++j) {
      const double ex = rect_exact(s.d.kappa[j], 1.0);
      const double ea = std::abs(Ra(j, j).real() - ex) / ex;
      const double ed = std::abs(Rd(j, j).real() - ex) / ex;
      CHECK(ea < 1e-2);
      CHECK(10.0 * ea <= ed);
    }
  }
  SUBCASE("slices are sub-blocks of the full matrix") {
    const Eigen::MatrixXcd R = interior_ntd(s.d, 2.0, all);
    const Eigen::MatrixXcd B = interior_ntd(s.d, 2.0, SliceSpec::lower(1), SliceSpec::upper(1, s.d.M()));
    CHECK((B - R.block(0, 1, 1, s.d.M() - 1)).norm() <= 1e-15 * R.norm());
    CHECK_THROWS_AS(interior_ntd(s.d, 2.0, SliceSpec{3, 9}), InvalidArgument);
  }
}

TEST_CASE("accelerated error shrinks as the cutoff grows") {
  double prev = 1e300;
  for (double lmax : {50.0, 100.0, 200.0}) {
    const Setup s = setup("rect-test", {}, 4, lmax, 2);
    const Eigen::MatrixXcd R = interior_ntd(s.d, 1.5, SliceSpec::full(2), NtdForm::Accelerated);
    const double err = std::abs(R(1, 1).real() - rect_exact(s.d.kappa[1], 1.5));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("cylinder NtD diagonal") {
  const std::vector<double> kappa{kPi * kPi / 4, 9 * kPi * kPi / 4};
  const Eigen::VectorXcd T = cylinder_ntd_diag(kappa, 1.0, BranchMode::PositiveReal, SliceSpec::full(2));
  CHECK(T[0].real() == doctest::Approx(0.82554).epsilon(1e-4));
  CHECK(T[0].imag() == 0.0);

  double prev = 0.0;
  for (double lam = -1e6; lam < 2.0; lam = lam < -1 ? lam / 2 : lam + 0.25) {
    const double t = cylinder_ntd_diag(kappa, lam, BranchMode::PositiveReal, SliceSpec::full(1))[0].real();
    CHECK(t > prev);
    prev = t;
  }
  CHECK(cylinder_ntd_diag(kappa, -1e12, BranchMode::PositiveReal, SliceSpec::full(1))[0].real() < 1e-5);

  const Eigen::VectorXcd Tc = cylinder_ntd_diag(kappa, cdouble(2.5, -0.01), BranchMode::PositiveReal, SliceSpec::full(1));
  CHECK(Tc[0].real() > 0);
  CHECK_THROWS_AS(cylinder_ntd_diag(kappa, kappa[0], BranchMode::PositiveReal, SliceSpec::full(1)), InvalidArgument);
}

TEST_CASE("disc NtD diagonal") {
  const double rho = 1.5;
  const DiscDiag d = disc_ntd_diag(rho, 5.0, 21);
  CHECK_FALSE(d.any_flagged());
  const auto orders = circle_basis(rho, 21).orders;
  for (std::size_t i = 1; i < orders.size(); i += 2) {
    CHECK(orders[i] == -orders[i + 1]);
    CHECK(std::abs(d.values[static_cast<Eigen::Index>(i)] - d.values[static_cast<Eigen::Index>(i + 1)]) == 0.0);
  }
  int sign = 0;
  for (Eigen::Index i = 0; i < d.values.size(); ++i) {
    const double im = d.values[i].imag();
    CHECK(im != 0.0);
    const int s = im > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    CHECK(s == sign);
  }

  const double lam = 900.0;  // rho sqrt(lambda) = 45
  const DiscDiag far = disc_ntd_diag(rho, lam, 5);
  const cdouble k = std::sqrt(lam);
  for (Eigen::Index i = 0; i < far.values.size(); ++i) {
    CHECK(std::abs(far.values[i] * cdouble(0, 1) * k - 1.0) <= 2.0 / (rho * std::sqrt(lam)));
  }
  CHECK_THROWS_AS(disc_ntd_diag(rho, 0.0, 5), InvalidArgument);
}

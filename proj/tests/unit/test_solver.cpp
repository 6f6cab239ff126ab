#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spectral_ends/error.hpp"
#include "spectral_ends/solver.hpp"

using namespace spectral_ends;

namespace {

NtdData prepare_ntd(const std::string& preset, const std::map<std::string, double>& params, int steps,
                    double lambda_max, int M = 20) {
  const GeometryDesc g = build_preset(preset, params);
  Mesh m = generate(g, default_h0(g));
  for (int i = 0; i < steps; ++i) m = refine(m, g);
  const DiscreteOperator op = assemble(m, g, InterfaceBc::Neumann);
  const InteriorEigenBasis basis = neumann_eigs(op, lambda_max);
  const auto bases = interface_bases(g, M);
  return build_ntd(op, basis, bases, global_order(bases, M), -1.0);
}

}  // namespace

TEST_CASE("pencil_sigmas on small pencils") {
  SUBCASE("1x1") {
    Eigen::MatrixXd R(1, 1);
    R << 2.0;
    const PencilSpectrum p = pencil_sigmas(R, Eigen::VectorXd::Ones(1), 5);
    REQUIRE(p.sigma.size() == 1);
    CHECK(p.sigma[0] == doctest::Approx(0.5));
  }
  SUBCASE("diagonal") {
    const PencilSpectrum p = pencil_sigmas(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1.0, 4.0), 2);
    REQUIRE(p.sigma.size() == 2);
    CHECK(p.sigma[0] == doctest::Approx(4.0));
    CHECK(p.sigma[1] == doctest::Approx(1.0));
    CHECK(std::abs(p.vectors(1, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("zero eta is dropped and K truncates") {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(3, 3);
    R(0, 0) = 1.0;
    R(1, 1) = -2.0;
    const PencilSpectrum p = pencil_sigmas(R, Eigen::VectorXd::Ones(3), 5);
    REQUIRE(p.sigma.size() == 2);
    CHECK(p.sigma[0] == doctest::Approx(1.0));
    CHECK(p.sigma[1] == doctest::Approx(-0.5));
    CHECK(pencil_sigmas(R, Eigen::VectorXd::Ones(3), 1).sigma.size() == 1);
  }
  SUBCASE("residual and normalization on a random pencil") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd A(6, 6);
    for (int i = 0; i < 36; ++i) A.data()[i] = nd(rng);
    const Eigen::MatrixXd R = 0.5 * (A + A.transpose());
    Eigen::VectorXd T(6);
    for (int i = 0; i < 6; ++i) T[i] = 0.5 + std::abs(nd(rng));
    const PencilSpectrum p = pencil_sigmas(R, T, 6);
    const double scale = R.norm() + T.norm();
    for (std::size_t j = 0; j < p.sigma.size(); ++j) {
      const Eigen::VectorXd c = p.vectors.col(static_cast<Eigen::Index>(j));
      CHECK(c.norm() == doctest::Approx(1.0));
      CHECK(((p.sigma[j] * R) * c - T.asDiagonal() * c).norm() <= 1e-8 * scale);
      if (j > 0) CHECK(p.sigma[j - 1] >= p.sigma[j]);
    }
  }
  SUBCASE("non-positive T is rejected") {
    CHECK_THROWS_AS(pencil_sigmas(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1.0, 0.0), 2), InvalidArgument);
    CHECK_THROWS_AS(pencil_sigmas(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector3d(1.0, 1.0, 1.0), 2),
                    InvalidArgument);
  }
}

TEST_CASE("count_bound on the half-integer square") {
  // side pi, Dirichlet on three sides: mu = m^2 + (k - 1/2)^2, nu = m^2 + k^2
  std::vector<double> mu, nu;
  for (int m = 1; m <= 6; ++m) {
    for (int k = 1; k <= 6; ++k) {
      mu.push_back(m * m + (k - 0.5) * (k - 0.5));
      nu.push_back(m * m + k * k);
    }
  }
  std::sort(mu.begin(), mu.end());
  std::sort(nu.begin(), nu.end());

  const CountBound four = count_bound(mu, nu, 4.0, 30.0);
  CHECK(four.mu_below == 2);
  CHECK(four.nu_below == 1);
  CHECK(four.K == 1);
  CHECK(count_bound(mu, nu, 3.0, 30.0).K == 0);

  const std::vector<double> three{0.5, 1.0, 2.0};
  CHECK(count_bound(three, {}, 4.0, 10.0).K == 3);

  const CountBound neg = count_bound(std::vector<double>{}, three, 4.0, 10.0);
  CHECK(neg.K == 0);
  CHECK(neg.clamped);

  CHECK_THROWS_AS(count_bound(mu, nu, 40.0, 30.0), InvalidArgument);
  CHECK_THROWS_AS(count_bound(mu, nu, 1.25, 30.0), InvalidArgument);
}

TEST_CASE("threshold_window") {
  const std::vector<double> kappa{1.0, 4.0, 9.0};
  CHECK(std::isinf(threshold_window(kappa, 0).first));
  CHECK(threshold_window(kappa, 0).second == 1.0);
  CHECK(threshold_window(kappa, 2) == std::pair<double, double>{4.0, 9.0});
  CHECK_THROWS_AS(threshold_window(kappa, 3), InvalidArgument);
  CHECK_THROWS_AS(threshold_window(kappa, -1), InvalidArgument);
}

TEST_CASE("orthogonality_residual on synthetic matrices") {
  Eigen::MatrixXd B(2, 4);
  B << 1, 0, 0, 0,
       0, 1, 0, 0;
  CHECK(orthogonality_residual(Eigen::Vector4d(0, 0, 0.6, 0.8), B) == doctest::Approx(0.0));

  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd F(3, 5);
  for (int i = 0; i < 15; ++i) F.data()[i] = nd(rng);
  Eigen::VectorXd c(5);
  for (int i = 0; i < 5; ++i) c[i] = nd(rng);
  c.normalize();
  const double r = orthogonality_residual(c, F);
  CHECK(r > 1e-3);
  CHECK(r <= 1.0 + 1e-12);

  CHECK_THROWS_AS(orthogonality_residual(Eigen::Vector3d(1, 0, 0), B), InvalidArgument);
}

TEST_CASE("bent waveguide has one trapped mode below pi^2/4") {
  const NtdData d = prepare_ntd("bent-waveguide", {}, 3, 50.0);
  SearchOptions opt;
  opt.lo = 0.0;
  const SearchReport rep = find_eigenvalues(d, 0, opt);
  REQUIRE(rep.findings.size() == 1);
  const EigenFinding& f = rep.findings[0];
  CHECK(f.lambda == doctest::Approx(2.3459).epsilon(1e-3));
  CHECK(f.bracket_hi - f.bracket_lo <= opt.tol);
  CHECK(f.lambda < std::numbers::pi * std::numbers::pi / 4);
  CHECK_FALSE(f.has_orth);
  CHECK(rep.audit_worst_decrease <= 1e-9);
  // the count drops by one across the root
  CHECK(negative_count(d, 0, f.bracket_lo) == negative_count(d, 0, f.bracket_hi) + 1);
  CHECK_THROWS_AS(orthogonality_residual(f.c, d, f.lambda, 0), InvalidArgument);
}

TEST_CASE("straight waveguide has no trapped modes") {
  const NtdData d = prepare_ntd("straight-waveguide", {}, 2, 50.0);
  SearchOptions opt;
  opt.lo = 0.0;
  CHECK(find_eigenvalues(d, 0, opt).findings.empty());
}

TEST_CASE("obstructed strip embedded eigenvalue") {
  const NtdData d = prepare_ntd("obstructed-strip", {{"delta", 0.0}, {"radius", 0.5}}, 3, 100.0);
  SearchOptions opt;
  opt.lo = d.kappa[0];
  const SearchReport rep = find_eigenvalues(d, 1, opt);
  REQUIRE(rep.findings.size() == 1);
  const EigenFinding& f = rep.findings[0];
  CHECK(std::sqrt(f.lambda) == doctest::Approx(1.39139).epsilon(1e-3));
  CHECK(f.lambda >= rep.window_lo);
  CHECK(f.lambda < rep.window_hi);
  REQUIRE(f.has_orth);
  CHECK(f.orth_residual < 1e-3);
  CHECK(f.embedded_flag);
  CHECK(orthogonality_residual(f.c, d, f.lambda, 1) == doctest::Approx(f.orth_residual).epsilon(1e-6));
}

TEST_CASE("find_eigenvalues argument checks") {
  const NtdData d = prepare_ntd("bent-waveguide", {}, 1, 30.0, 6);
  SearchOptions opt;
  opt.tol = 0.0;
  CHECK_THROWS_AS(find_eigenvalues(d, 0, opt), InvalidArgument);
  opt = {};
  opt.lo = 100.0;
  CHECK_THROWS_AS(find_eigenvalues(d, 0, opt), InvalidArgument);
  CHECK_THROWS_AS(find_eigenvalues(d, 6, {}), InvalidArgument);
}

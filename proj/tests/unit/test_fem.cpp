#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spectral_ends/error.hpp"
#include "spectral_ends/fem.hpp"

using namespace spectral_ends;

namespace {

constexpr double kPi = std::numbers::pi;

/// rect-test with a different condition on the x = 0 side.
GeometryDesc square_with_left(const RobinCoeff& left) {
  GeometryDesc g = build_preset("rect-test");
  for (auto& s : g.segments) {
    if (s.coeff.is_neumann()) s.coeff = left;
  }
  return g;
}

Mesh square_mesh(const GeometryDesc& g, int steps) {
  Mesh m = generate(g, 0.25);
  for (int i = 0; i < steps; ++i) m = refine(m, g);
  return m;
}

}  // namespace

TEST_CASE("all-Dirichlet unit square: first eigenvalue 2 pi^2 within 2% at h = 1/16") {
  const GeometryDesc g = square_with_left(RobinCoeff::dirichlet());
  const DiscreteOperator op = assemble(square_mesh(g, 2), g, InterfaceBc::Dirichlet);
  const std::vector<double> nu = dirichlet_eigs(op, 30.0);
  REQUIRE(nu.size() == 1);
  CHECK(nu[0] == doctest::Approx(2 * kPi * kPi).epsilon(0.02));
}

TEST_CASE("all-Dirichlet square eigenvalue error is second order") {
  const GeometryDesc g = square_with_left(RobinCoeff::dirichlet());
  double prev = 0.0;
  for (int steps = 1; steps <= 4; ++steps) {
    const double nu = dirichlet_eigs(assemble(square_mesh(g, steps), g, InterfaceBc::Dirichlet), 25.0).at(0);
    const double err = std::abs(nu - 2 * kPi * kPi);
    if (steps > 1) {
      CAPTURE(steps);
      CHECK(prev / err >= 3.5);
      CHECK(prev / err <= 4.5);
    }
    prev = err;
  }
}

TEST_CASE("rect-test spectra match separation of variables") {
  const GeometryDesc g = build_preset("rect-test");
  const Mesh m = square_mesh(g, 3);
  // Neumann interface: x-factor cos(k pi x), k >= 0
  const InteriorEigenBasis nb = neumann_eigs(assemble(m, g, InterfaceBc::Neumann), 45.0);
  const std::vector<double> mu_exact{kPi * kPi, 2 * kPi * kPi, 4 * kPi * kPi};
  REQUIRE(nb.mu.size() == mu_exact.size());
  for (std::size_t i = 0; i < mu_exact.size(); ++i) CHECK(nb.mu[i] == doctest::Approx(mu_exact[i]).epsilon(5e-3));
  // Dirichlet interface: x-factor cos((k - 1/2) pi x)
  const std::vector<double> nu = dirichlet_eigs(assemble(m, g, InterfaceBc::Dirichlet), 45.0);
  const std::vector<double> nu_exact{1.25 * kPi * kPi, 3.25 * kPi * kPi, 4.25 * kPi * kPi};
  REQUIRE(nu.size() == nu_exact.size());
  for (std::size_t i = 0; i < nu_exact.size(); ++i) CHECK(nu[i] == doctest::Approx(nu_exact[i]).epsilon(5e-3));
  CHECK(nu[0] > nb.mu[0]);
}

TEST_CASE("Neumann basis is mass-orthonormal and reproduces its Rayleigh quotients") {
  const GeometryDesc g = build_preset("bent-waveguide");
  Mesh m = generate(g, default_h0(g));
  m = refine(m, g);
  const DiscreteOperator op = assemble(m, g, InterfaceBc::Neumann);
  const InteriorEigenBasis b = neumann_eigs(op, 60.0);
  REQUIRE(!b.mu.empty());
  CHECK(std::is_sorted(b.mu.begin(), b.mu.end()));
  CHECK(b.mu.back() <= 60.0);
  const Eigen::MatrixXd U = op.restrict(b.modes);
  const Eigen::MatrixXd gram = U.transpose() * (op.reduced_mass * U);
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-8);
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    const double rq = U.col(k).dot(op.system * U.col(k)) / U.col(k).dot(op.reduced_mass * U.col(k));
    CHECK(std::abs(rq - b.mu[k]) <= 1e-10 * std::max(1.0, b.mu[k]));
  }
  CHECK(count_below(op, 60.0) == b.mu.size());
}

TEST_CASE("assembled matrices are symmetric") {
  const GeometryDesc g = build_preset("gaussian-potential", {{"rart", 4.0}});
  Mesh m = generate(g, default_h0(g));
  const DiscreteOperator op = assemble(m, g, InterfaceBc::Neumann);
  for (const SpMat* A : {&op.stiffness, &op.mass, &op.robin}) {
    const SpMat At = A->transpose();
    const double n = std::max(1.0, A->norm());
    CHECK((*A - At).norm() <= 1e-14 * n);
  }
}

TEST_CASE("Robin edge mass with a = b") {
  const GeometryDesc g = square_with_left(RobinCoeff(1.0, 1.0));
  const Mesh m = generate(g, 0.25);
  const DiscreteOperator op = assemble(m, g, InterfaceBc::Neumann);
  // Sum of all entries is the length of the Robin side; interior side nodes see two edges.
  CHECK(Eigen::MatrixXd(op.robin).sum() == doctest::Approx(1.0));
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const Vec2& p = m.nodes[i];
    if (std::abs(p.x()) < 1e-12 && p.y() > 1e-12 && p.y() < 1 - 1e-12) {
      CHECK(op.robin.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) ==
            doctest::Approx(2.0 * 2.0 * 0.25 / 6.0));
    }
  }
}

TEST_CASE("Neumann boundary value problem") {
  const GeometryDesc g = build_preset("rect-test");
  const Mesh m = square_mesh(g, 2);
  const DiscreteOperator op = assemble(m, g, InterfaceBc::Neumann);
  const InteriorEigenBasis b = neumann_eigs(op, 30.0);

  SUBCASE("zero data gives the zero solution") {
    const Eigen::MatrixXd v = solve_neumann_bvp(op, -1.0, Eigen::MatrixXd::Zero(m.nodes.size(), 1), b.mu);
    CHECK(v.norm() == 0.0);
  }
  SUBCASE("reference point on an eigenvalue is refused") {
    CHECK_THROWS_AS(solve_neumann_bvp(op, b.mu[0], Eigen::MatrixXd::Zero(m.nodes.size(), 1), b.mu), InvalidArgument);
  }
  SUBCASE("sine data reproduces the cosh profile") {
    const std::function<double(const Vec2&)> w1 = [](const Vec2& p) { return std::sqrt(2.0) * std::sin(kPi * p.y()); };
    const Eigen::VectorXd load = interface_load(op, interface_tag(0), w1);
    const Eigen::MatrixXd v = solve_neumann_bvp(op, -1.0, load, b.mu);
    const double s = std::sqrt(kPi * kPi + 1.0);
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      const Vec2& p = m.nodes[i];
      const double exact = std::sqrt(2.0) * std::sin(kPi * p.y()) * std::cosh(s * p.x()) / (s * std::sinh(s));
      CHECK(std::abs(v(static_cast<Eigen::Index>(i), 0) - exact) <= 0.02 * std::sqrt(2.0) / (s * std::tanh(s)));
    }
  }
}

#include "qcurv/error.hpp"
#include "qcurv/paneitz.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qcurv;

namespace {
const double pi = std::numbers::pi;

double sphere_eigenvalue(int k, int n) {
  double h = n / 2.0;
  return (k + h - 2) * (k + h - 1) * (k + h) * (k + h + 1);
}
}  // namespace

TEST_CASE("zonal sphere spectrum") {
  for (int n : {5, 6, 7, 8, 11}) {
    auto d = build_discretization(ModelManifold::round_sphere(n), Symmetry::ZonalOnly, 32);
    PaneitzOperator P = assemble(d);
    const auto& deg = d->axes()[0].degree;
    for (Eigen::Index j = 0; j < d->num_modes(); ++j) {
      double expect = sphere_eigenvalue(deg(j), n);
      CHECK(std::abs(P.symbol()(j) - expect) <= 1e-12 * expect);
    }
  }
}

TEST_CASE("circle spectrum of the product") {
  auto d = build_discretization(ModelManifold::circle_cross_sphere(5, 2 * pi), Symmetry::CircleOnly, 64);
  PaneitzOperator P = assemble(d);
  const auto& deg = d->axes()[0].degree;
  for (Eigen::Index j = 0; j < d->num_modes(); ++j) {
    double k2 = static_cast<double>(deg(j)) * deg(j);
    double expect = (k2 + 0.25) * (k2 + 6.25);
    CHECK(std::abs(P.symbol()(j) - expect) <= 1e-12 * expect);
  }
}

TEST_CASE("P of a constant is ((n-4)/2) Q") {
  for (auto m : {ModelManifold::round_sphere(5), ModelManifold::round_sphere(8),
                 ModelManifold::circle_cross_sphere(6, 2.0)}) {
    auto sym = m.kind == ModelKind::RoundSphere ? Symmetry::ZonalOnly : Symmetry::CircleOnly;
    auto d = build_discretization(m, sym, 16);
    PaneitzOperator P = assemble(d);
    Field one = Field::constant(d, 1.0);
    double expect = 0.5 * (m.dim - 4) * curvature_data(m).q_curv;
    CHECK((P.apply(one).nodal().array() - expect).abs().maxCoeff() < 1e-11 * expect);
  }
}

TEST_CASE("2D product symbol mixes both axes") {
  // on cos(k s) Y_l with a = k^2, b = l(l+3): (a + b)^2 + 13a/2 + 5b/2 + 25/16
  auto d = build_discretization(ModelManifold::circle_cross_sphere(5, 2 * pi), Symmetry::CircleZonal2D, 8, 8);
  PaneitzOperator P = assemble(d);
  const auto& ds = d->axes()[0].degree;
  const auto& dz = d->axes()[1].degree;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      double a = static_cast<double>(ds(i)) * ds(i), b = dz(j) * (dz(j) + 3.0);
      double expect = (a + b) * (a + b) + 6.5 * a + 2.5 * b + 25.0 / 16;
      CHECK(P.symbol()(i * 8 + j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("model operator is positive and solve inverts apply") {
  auto d = build_discretization(ModelManifold::circle_cross_sphere(5, 2 * pi), Symmetry::CircleOnly, 32);
  PaneitzOperator P = assemble(d);
  CHECK(P.min_eigenvalue() == doctest::Approx(25.0 / 16));
  Field f = Field::sample(d, [](const Point& p) { return 1 + 0.3 * std::sin(2 * p.coords[0]); });
  Field back = P.solve(P.apply(f));
  CHECK((back.coeffs() - f.coeffs()).norm() < 1e-12 * f.coeffs().norm());
}

TEST_CASE("torus operator has a kernel") {
  auto d = build_discretization(ModelManifold::flat_torus(5, 2 * pi), Symmetry::FullTorusFourier, 8);
  PaneitzOperator P = assemble(d);
  CHECK(P.min_eigenvalue() == doctest::Approx(0.0));
  try {
    P.solve(Field::constant(d, 1.0));
    FAIL("solve should reject a non-positive operator");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveOperator);
  }
}

TEST_CASE("conformal covariance") {
  auto d = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 24);
  PaneitzOperator P = assemble(d);
  const double p = P.exponent();
  Field u = Field::sample(d, [](const Point& x) { return 1 + 0.2 * std::cos(x.coords[0]); }).projected();
  PaneitzOperator Pu = conformal_operator(P, u);
  CHECK(Pu.is_conformal());
  Field phi = Field::sample(d, [](const Point& x) { return std::cos(2 * x.coords[0]); }).projected();
  Field lhs = Pu.apply(phi);
  Field rhs = P.apply(multiply(u, phi).projected());
  Eigen::VectorXd expect = rhs.nodal().cwiseQuotient(u.nodal().array().pow(p).matrix());
  CHECK((lhs.nodal() - expect).cwiseAbs().maxCoeff() < 1e-9 * expect.cwiseAbs().maxCoeff());

  // composition: conformal change by u then by 1/u returns the model
  Field inv = pointwise(u, [](double x) { return 1 / x; });
  PaneitzOperator back = conformal_operator(Pu, inv);
  CHECK((back.factor_nodal().array() - 1).abs().maxCoeff() < 1e-14);
  Field back_phi = back.apply(phi);
  CHECK((back_phi.nodal() - P.apply(phi).nodal()).cwiseAbs().maxCoeff() < 1e-9 * P.apply(phi).max_abs());
}

TEST_CASE("constant conformal factor scales the spectrum") {
  auto d = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 16);
  PaneitzOperator P = assemble(d);
  const double c = 2.0;
  PaneitzOperator Pc = conformal_operator(P, Field::constant(d, c));
  // g' = c^{4/(n-4)} g scales P by c^{-8/(n-4)}
  CHECK(Pc.min_eigenvalue() == doctest::Approx(P.min_eigenvalue() * std::pow(c, -8.0)).epsilon(1e-9));
}

TEST_CASE("conformal operator positivity and W22 symmetry") {
  auto d = build_discretization(ModelManifold::circle_cross_sphere(5, 2 * pi), Symmetry::CircleOnly, 32);
  PaneitzOperator P = assemble(d);
  Field u = Field::sample(d, [](const Point& x) { return 1 + 0.3 * std::cos(x.coords[0]); });
  PaneitzOperator Pu = conformal_operator(P, u);
  CHECK(Pu.min_eigenvalue() > 0);
  Eigen::MatrixXd M = Pu.matrix();
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-10 * M.cwiseAbs().maxCoeff());
  Field f = Field::sample(d, [](const Point& x) { return std::sin(x.coords[0]); });
  Field g = Field::sample(d, [](const Point& x) { return std::cos(3 * x.coords[0]) + 1; });
  CHECK(w22_inner(Pu, f, g) == doctest::Approx(w22_inner(Pu, g, f)));
  CHECK_THROWS_AS(conformal_operator(P, Field::constant(d, -1.0)), Error);
}

TEST_CASE("dense matrices are capped") {
  auto d = build_discretization(ModelManifold::circle_cross_sphere(5, 2 * pi), Symmetry::CircleZonal2D, 80, 80);
  PaneitzOperator P = assemble(d);
  PaneitzOperator Pu = conformal_operator(P, Field::constant(d, 1.5));
  CHECK_THROWS_AS(Pu.matrix(), Error);
}

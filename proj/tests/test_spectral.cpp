#include "qcurv/error.hpp"
#include "qcurv/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qcurv;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("zonal sphere discretization") {
  auto d = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 32);
  CHECK(d->num_modes() == 32);
  CHECK(d->num_nodes() == 64);
  CHECK(d->weights().sum() == doctest::Approx(pi * pi * pi).epsilon(1e-13));
  const auto& deg = d->axes()[0].degree;
  for (Eigen::Index j = 0; j < d->num_modes(); ++j)
    CHECK(d->neg_laplacian()(j) == doctest::Approx(deg(j) * (deg(j) + 4.0)));
}

TEST_CASE("transforms round-trip on every symmetry") {
  std::vector<DiscPtr> discs{
      build_discretization(ModelManifold::round_sphere(6), Symmetry::ZonalOnly, 24),
      build_discretization(ModelManifold::circle_cross_sphere(5, 3.0), Symmetry::CircleOnly, 24),
      build_discretization(ModelManifold::circle_cross_sphere(5, 3.0), Symmetry::ZonalOnly, 24),
      build_discretization(ModelManifold::circle_cross_sphere(5, 2 * pi), Symmetry::CircleZonal2D, 12, 20),
      build_discretization(ModelManifold::flat_torus(5, 2.0), Symmetry::FullTorusFourier, 8)};
  for (const auto& d : discs) {
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(d->num_modes(), -1.0, 1.0).array().sin();
    Field f = Field::from_coeffs(d, c);
    Field g = Field::from_nodal(d, f.nodal());
    CHECK((g.coeffs() - c).norm() / c.norm() < 1e-13);
    CHECK(f.consistency_error() < 1e-13);
    CHECK(d->weights().sum() == doctest::Approx(volume(d->model())).epsilon(1e-12));
  }
}

TEST_CASE("circle axis eigenvalues and sampling") {
  const double L = 3.0;
  auto d = build_discretization(ModelManifold::circle_cross_sphere(5, L), Symmetry::CircleOnly, 16);
  const auto& deg = d->axes()[0].degree;
  for (Eigen::Index j = 0; j < d->num_modes(); ++j)
    CHECK(d->neg_laplacian()(j) == doctest::Approx(std::pow(2 * pi * deg(j) / L, 2)));
  Field f = Field::sample(d, [&](const Point& p) { return std::cos(2 * pi * 3 * p.coords[0] / L); });
  Field lap = laplacian(f);
  double k2 = std::pow(2 * pi * 3 / L, 2);
  CHECK((lap.nodal() + k2 * f.nodal()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("integration and inner products") {
  auto d = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 32);
  Field one = Field::constant(d, 1.0);
  CHECK(integrate(one) == doctest::Approx(pi * pi * pi));
  Field c = Field::sample(d, [](const Point& p) { return std::cos(p.coords[0]); });
  CHECK(std::abs(integrate(c)) < 1e-13);
  // int cos^2 over S^5 = |S^5| / 6
  CHECK(coeff_inner(c, c) == doctest::Approx(pi * pi * pi / 6));
  CHECK(integrate(multiply(c, c)) == doctest::Approx(pi * pi * pi / 6));
}

TEST_CASE("gradient of a zonal function") {
  auto d = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 32);
  Field c = Field::sample(d, [](const Point& p) { return std::cos(p.coords[0]); });
  Field g = gradient_squared(c);
  for (Eigen::Index i = 0; i < d->num_nodes(); ++i) {
    double th = d->node_point(i).coords[0];
    CHECK(g.nodal()(i) == doctest::Approx(std::sin(th) * std::sin(th)).epsilon(1e-10));
  }
  // Delta cos = -n cos on S^n
  Field lap = laplacian(c);
  CHECK((lap.nodal() + 5 * c.nodal()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("point evaluation and band-limited delta") {
  auto d = build_discretization(ModelManifold::circle_cross_sphere(5, 2 * pi), Symmetry::CircleZonal2D, 10, 16);
  Field f = Field::sample(d, [](const Point& p) { return std::cos(p.coords[0]) * std::cos(2 * p.coords[1]); });
  Point x{{0.3, 1.1}};
  CHECK(f.value_at(x) == doctest::Approx(std::cos(0.3) * std::cos(2.2)).epsilon(1e-12));
  CHECK(d->basis_at(x).dot(f.coeffs()) == doctest::Approx(f.value_at(x)));
  CHECK(f.value_at(d->node_point(17)) == doctest::Approx(f.nodal()(17)));
}

TEST_CASE("spectral filter") {
  auto d = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 64);
  Eigen::VectorXd s = d->spectral_filter();
  CHECK(s(0) == doctest::Approx(1.0));
  CHECK(s(63) < 1e-10);
  for (Eigen::Index j = 1; j < s.size(); ++j) CHECK(s(j) <= s(j - 1));
}

TEST_CASE("fields on different discretizations do not mix") {
  auto a = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 16);
  auto b = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 16);
  Field f = Field::constant(a, 1.0), g = Field::constant(b, 1.0);
  CHECK_THROWS_AS(f + g, Error);
  CHECK_NOTHROW(f + f);
}

TEST_CASE("pointwise maps reject non-finite output") {
  auto d = build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 16);
  Field f = Field::constant(d, -1.0);
  CHECK_THROWS_AS(pointwise(f, [](double x) { return std::sqrt(x); }), Error);
  Field sp = pointwise(f, maps::signed_power(3.0));
  CHECK(sp.nodal()(0) == doctest::Approx(-1.0));
}

TEST_CASE("symmetry names") {
  CHECK(symmetry_from_string("circle_zonal") == Symmetry::CircleZonal2D);
  CHECK(std::string(to_string(Symmetry::ZonalOnly)) == "zonal");
  CHECK_THROWS_AS(symmetry_from_string("radial"), Error);
}

TEST_CASE("mode count limits") {
  CHECK_THROWS_AS(build_discretization(ModelManifold::round_sphere(5), Symmetry::CircleOnly, 16), Error);
  CHECK_THROWS_AS(build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 0), Error);
}

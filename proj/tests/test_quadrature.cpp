#include "qcurv/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qcurv;

TEST_CASE("Jacobi mass matches the beta function") {
  CHECK(jacobi_mass(0.0) == doctest::Approx(2.0));
  CHECK(jacobi_mass(0.5) == doctest::Approx(std::numbers::pi / 2));
  CHECK(jacobi_mass(1.0) == doctest::Approx(4.0 / 3));
}

TEST_CASE("Gauss-Jacobi integrates polynomials of degree 2M-1 exactly") {
  for (double a : {0.5, 1.0, 1.5, 3.0}) {
    const int M = 12;
    GaussRule g = gauss_jacobi(M, a);
    CHECK(g.w.sum() == doctest::Approx(jacobi_mass(a)).epsilon(1e-13));
    // int x^{2k} (1-x^2)^a = B(k + 1/2, a + 1)
    for (int k = 0; k < M; ++k) {
      double exact = std::beta(k + 0.5, a + 1);
      double quad = (g.w.array() * g.x.array().pow(2 * k)).sum();
      CHECK(quad == doctest::Approx(exact).epsilon(1e-12));
    }
    for (Eigen::Index i = 1; i < g.x.size(); ++i) CHECK(g.x(i) < g.x(i - 1));
    for (Eigen::Index i = 0; i < g.x.size(); ++i) CHECK(g.x(i) == -g.x(g.x.size() - 1 - i));
  }
}

TEST_CASE("orthonormal Jacobi polynomials are orthonormal under the rule") {
  const double a = 1.5;
  const int N = 40;
  GaussRule g = gauss_jacobi(2 * N, a);
  Eigen::MatrixXd P = orthonormal_jacobi(g.x, N, a);
  Eigen::MatrixXd G = P.transpose() * g.w.asDiagonal() * P;
  CHECK((G - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Jacobi derivatives agree with finite differences") {
  const double a = 1.0, h = 1e-6;
  Eigen::VectorXd x(3);
  x << -0.3, 0.1, 0.7;
  Eigen::MatrixXd D;
  Eigen::MatrixXd P = orthonormal_jacobi(x, 8, a, &D);
  Eigen::MatrixXd Pp = orthonormal_jacobi((x.array() + h).matrix(), 8, a);
  Eigen::MatrixXd Pm = orthonormal_jacobi((x.array() - h).matrix(), 8, a);
  Eigen::MatrixXd fd = (Pp - Pm) / (2 * h);
  CHECK((fd - D).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(P.rows() == 3);
}

TEST_CASE("Gauss-Legendre on an interval") {
  GaussRule g = gauss_legendre(20, 1.0, 3.0);
  CHECK(g.w.sum() == doctest::Approx(2.0));
  CHECK((g.w.array() * g.x.array().exp()).sum() == doctest::Approx(std::exp(3.0) - std::exp(1.0)).epsilon(1e-14));
  CHECK(g.x(0) < g.x(1));
}

#pragma once

#include <Eigen/Dense>

namespace qcurv {

struct GaussRule {
  Eigen::VectorXd x;
  Eigen::VectorXd w;
};

/// Total mass of (1 - x^2)^a on [-1, 1].
double jacobi_mass(double a);

/// Orthonormal polynomials for the weight (1 - x^2)^a on [-1, 1]:
/// values(j, k) = p_k(x_j) for k < N.  Fills `deriv` with p_k'(x_j) when non-null.
Eigen::MatrixXd orthonormal_jacobi(const Eigen::VectorXd& x, int N, double a,
                                   Eigen::MatrixXd* deriv = nullptr);

/// M-point Gauss rule for (1 - x^2)^a, nodes in decreasing order of x.
GaussRule gauss_jacobi(int M, double a);

/// M-point Gauss-Legendre rule mapped to [lo, hi], nodes increasing.
GaussRule gauss_legendre(int M, double lo, double hi);

}  // namespace qcurv

#include "qcurv/quadrature.hpp"

#include "qcurv/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace qcurv {

namespace {

// Off-diagonal of the Jacobi matrix: b_k = sqrt(k (k + 2a) / ((2k + 2a + 1)(2k + 2a - 1))).
double offdiag(int k, double a) {
  double kk = k;
  return std::sqrt(kk * (kk + 2 * a) / ((2 * kk + 2 * a + 1) * (2 * kk + 2 * a - 1)));
}

// p_M and p_M' at x via the three-term recurrence.
void eval_top(double x, int M, double a, double p0, double& p, double& dp) {
  double pm = 0, pc = p0, dpm = 0, dpc = 0;
  for (int k = 0; k < M; ++k) {
    double bk = k > 0 ? offdiag(k, a) : 0.0;
    double bn = offdiag(k + 1, a);
    double pn = (x * pc - bk * pm) / bn;
    double dpn = (pc + x * dpc - bk * dpm) / bn;
    pm = pc;
    pc = pn;
    dpm = dpc;
    dpc = dpn;
  }
  p = pc;
  dp = dpc;
}

}  // namespace

double jacobi_mass(double a) {
  return std::sqrt(std::numbers::pi) * std::exp(std::lgamma(a + 1) - std::lgamma(a + 1.5));
}

Eigen::MatrixXd orthonormal_jacobi(const Eigen::VectorXd& x, int N, double a, Eigen::MatrixXd* deriv) {
  const Eigen::Index M = x.size();
  Eigen::MatrixXd P(M, N);
  if (deriv) deriv->setZero(M, N);
  if (N == 0) return P;
  const double p0 = 1.0 / std::sqrt(jacobi_mass(a));
  P.col(0).setConstant(p0);
  for (int k = 0; k + 1 < N; ++k) {
    double bn = offdiag(k + 1, a);
    double bk = k > 0 ? offdiag(k, a) : 0.0;
    for (Eigen::Index j = 0; j < M; ++j) {
      double prev = k > 0 ? P(j, k - 1) : 0.0;
      P(j, k + 1) = (x(j) * P(j, k) - bk * prev) / bn;
      if (deriv) {
        auto& D = *deriv;
        double dprev = k > 0 ? D(j, k - 1) : 0.0;
        D(j, k + 1) = (P(j, k) + x(j) * D(j, k) - bk * dprev) / bn;
      }
    }
  }
  return P;
}

GaussRule gauss_jacobi(int M, double a) {
  if (M < 1) throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one node");
  if (!(a > -1)) throw Error(ErrorKind::InvalidArgument, "Jacobi parameter must exceed -1");

  // Golub-Welsch eigenvalues for a first guess, then Newton on p_M
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(M);
  Eigen::VectorXd sub(std::max(M - 1, 0));
  for (int k = 1; k < M; ++k) sub(k - 1) = offdiag(k, a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NonFinite, "tridiagonal eigensolve failed");

  const double p0 = 1.0 / std::sqrt(jacobi_mass(a));
  GaussRule rule;
  rule.x.resize(M);
  for (int i = 0; i < M; ++i) {
    double x = es.eigenvalues()(M - 1 - i);
    for (int it = 0; it < 3; ++it) {
      double p, dp;
      eval_top(x, M, a, p0, p, dp);
      if (dp == 0) break;
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.x(i) = x;
  }
  // Symmetrize exactly: the weight is even.
  for (int i = 0; i < M / 2; ++i) {
    double s = 0.5 * (rule.x(i) - rule.x(M - 1 - i));
    rule.x(i) = s;
    rule.x(M - 1 - i) = -s;
  }
  if (M % 2 == 1) rule.x(M / 2) = 0.0;

  Eigen::MatrixXd P = orthonormal_jacobi(rule.x, M, a);
  rule.w = P.rowwise().squaredNorm().cwiseInverse();
  return rule;
}

GaussRule gauss_legendre(int M, double lo, double hi) {
  GaussRule r = gauss_jacobi(M, 0.0);
  GaussRule out;
  out.x.resize(M);
  out.w.resize(M);
  double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < M; ++i) {
    out.x(i) = mid - half * r.x(i);
    out.w(i) = half * r.w(i);
  }
  return out;
}

}  // namespace qcurv

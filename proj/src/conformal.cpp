#include "qcurv/conformal.hpp"

#include "qcurv/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace qcurv {

namespace {

void require_positive_factor(const Field& u) {
  double lo = u.nodal().minCoeff();
  if (!(lo > 0))
    throw Error(ErrorKind::NonPositiveFactor, fmt::format("conformal factor must be positive, min = {:.6g}", lo));
}

}  // namespace

bool nonnegative_at_nodes(const Eigen::VectorXd& v, double scale, double tol) {
  return v.minCoeff() >= -tol * scale;
}

Field conformal_Q(const PaneitzOperator& P, const Field& u) {
  require_positive_factor(u);
  const int n = P.dim();
  Field Pu = P.apply(u);
  Eigen::VectorXd q = (2.0 / (n - 4)) * Pu.nodal().cwiseQuotient(u.nodal().array().pow(P.exponent()).matrix());
  return Field::from_nodal(u.disc_ptr(), std::move(q));
}

Field conformal_R(const Field& u) {
  require_positive_factor(u);
  const auto& d = u.disc();
  const int n = d.model().dim;
  const double R = curvature_data(d.model()).scalar;
  Eigen::VectorXd v = d.backward(u.coeffs());
  Eigen::VectorXd lap = d.backward(-d.neg_laplacian().cwiseProduct(u.coeffs()));
  Eigen::VectorXd grad2 = gradient_squared(u).nodal();
  const double a = 4.0 * (n - 1) / (n - 4);
  const double b = 8.0 * (n - 1) / ((n - 4.0) * (n - 4.0));
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0)) throw Error(ErrorKind::NonPositiveFactor, "band-limited factor is not positive");
    out(i) = std::pow(v(i), -static_cast<double>(n) / (n - 4)) * (-a * lap(i) - b * grad2(i) / v(i) + R * v(i));
  }
  return Field::from_nodal(u.disc_ptr(), std::move(out));
}

QuotientReport quotient(const PaneitzOperator& P, const Field& u) {
  const int n = P.dim();
  QuotientReport r;
  r.numerator = w22_inner(P, u, u);
  Field pw = pointwise(u, [n](double x) { return std::pow(std::abs(x), 2.0 * n / (n - 4)); });
  r.denominator_volume = P.integrate(pw);
  if (!(r.denominator_volume > 0)) throw Error(ErrorKind::InvalidArgument, "quotient of the zero field");
  r.quotient = r.numerator / std::pow(r.denominator_volume, (n - 4.0) / n);
  r.mu = r.numerator / r.denominator_volume;
  return r;
}

double total_Q(const PaneitzOperator& P, const Field& u) {
  require_positive_factor(u);
  const int n = P.dim();
  // int Q dv over the new metric is (2/(n-4)) int u P u by the transformation law
  QuotientReport r = quotient(P, u);
  return (2.0 / (n - 4)) * r.numerator / std::pow(r.denominator_volume, (n - 4.0) / n);
}

PathReport maxprinciple_path(const PaneitzOperator& P, const Field& u, int steps) {
  if (steps < 2) throw Error(ErrorKind::InvalidArgument, "path needs at least 2 steps");
  Field Pu = P.apply(u);
  if (!nonnegative_at_nodes(Pu.nodal(), Pu.max_abs()))
    throw Error(ErrorKind::Precondition,
                fmt::format("hypothesis P u >= 0 violated: min P u = {:.6g}", Pu.min_nodal()));
  const int n = P.dim();
  const double Qg = P.curvature().q_curv;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  PathReport rep;
  Field one = Field::constant(u.disc_ptr(), 1.0);
  for (int i = 0; i < steps; ++i) {
    double lam = static_cast<double>(i) / (steps - 1);
    Field ul = one * (1 - lam) + u * lam;
    PathPoint pt;
    pt.lambda = lam;
    pt.min_u = ul.min_nodal();
    pt.min_q = pt.min_r = pt.min_q_bound = nan;
    std::string reason;
    if (pt.min_u > 0) {
      pt.min_q_bound = ((1 - lam) * Qg * ul.nodal().array().pow(-static_cast<double>(n + 4) / (n - 4))).minCoeff();
      Field q = conformal_Q(P, ul);
      Field r = conformal_R(ul);
      pt.min_q = q.min_nodal();
      pt.min_r = r.min_nodal();
      if (!nonnegative_at_nodes(q.nodal(), q.max_abs())) reason = "Q < 0";
      if (!(pt.min_r > 0)) reason = "R <= 0";
    } else {
      reason = "u <= 0";
    }
    if (!reason.empty() && !rep.first_failure) {
      rep.first_failure = rep.points.size();
      rep.failure_reason = fmt::format("{} at lambda = {:.6g}", reason, lam);
    }
    rep.points.push_back(pt);
  }
  return rep;
}

}  // namespace qcurv

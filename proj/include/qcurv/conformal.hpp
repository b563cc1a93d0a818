#pragma once

#include "qcurv/paneitz.hpp"
#include "qcurv/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcurv {

struct QuotientReport {
  double numerator = 0;           // int u P u
  double denominator_volume = 0;  // int |u|^{2n/(n-4)}
  double quotient = 0;
  double mu = 0;
};

/// Relative positivity: v counts as nonnegative when v >= -tol * max|field|.
constexpr double kPositivityTol = 1e-9;

bool nonnegative_at_nodes(const Eigen::VectorXd& v, double scale, double tol = kPositivityTol);

/// Q of the metric u^{4/(n-4)} h, where h is the metric represented by P.
Field conformal_Q(const PaneitzOperator& P, const Field& u);
/// Scalar curvature of u^{4/(n-4)} g over the model metric of u's discretization.
Field conformal_R(const Field& u);

QuotientReport quotient(const PaneitzOperator& P, const Field& u);
/// Vol^{-(n-4)/n} int Q dv for the metric u^{4/(n-4)} h.
double total_Q(const PaneitzOperator& P, const Field& u);

struct PathPoint {
  double lambda = 0;
  double min_u = 0;
  double min_q_bound = 0;  // right-hand side (1-lambda) Q_g u^{-(n+4)/(n-4)} of the lower bound
  double min_q = 0;        // Q of the path metric when u_lambda > 0 (NaN otherwise)
  double min_r = 0;        // R of the path metric when u_lambda > 0 (NaN otherwise)
};

struct PathReport {
  std::vector<PathPoint> points;
  std::optional<std::size_t> first_failure;
  std::string failure_reason;
};

/// Walks u_lambda = (1 - lambda) + lambda u and records positivity of u, Q and R.
PathReport maxprinciple_path(const PaneitzOperator& P_base, const Field& u, int steps);

}  // namespace qcurv

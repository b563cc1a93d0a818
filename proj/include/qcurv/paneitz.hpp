#pragma once

#include "qcurv/models.hpp"
#include "qcurv/spectral.hpp"

#include <Eigen/Dense>

#include <memory>

namespace qcurv {

/// Discrete Paneitz operator, either of the model metric g or of a conformal
/// metric U^{4/(n-4)} g given by a total nodal factor U over the model operator.
///
/// The model operator is diagonal in the coefficient basis and is stored as its
/// symbol.  Conformal operators act through the covariance law
///   P_U phi = U^{-(n+4)/(n-4)} P_g (U phi),   P_U^{-1} psi = U^{-1} P_g^{-1}(U^{(n+4)/(n-4)} psi).
class PaneitzOperator {
 public:
  const Discretization& disc() const { return *state_->disc; }
  const DiscPtr& disc_ptr() const { return state_->disc; }
  const CurvatureBundle& curvature() const { return state_->curvature; }
  int dim() const { return state_->disc->model().dim; }
  /// (n+4)/(n-4)
  double exponent() const;

  /// Eigenvalue of the model operator per coefficient.
  const Eigen::VectorXd& symbol() const { return state_->symbol; }
  bool is_conformal() const { return state_->factor.size() > 0; }
  /// Total conformal factor at the nodes (all ones for the model operator).
  Eigen::VectorXd factor_nodal() const;
  /// Volume density of the represented metric relative to the model, U^{2n/(n-4)}.
  Eigen::VectorXd density_nodal() const;

  Field apply(const Field& f) const;
  Field solve(const Field& rhs) const;
  double min_eigenvalue() const;
  /// Throws NonPositiveOperator when the spectrum is not strictly positive.
  void require_positive() const;

  /// Symmetric matrix of the quadratic form f -> int f P f dv in the coefficient
  /// basis.  For the model this is diag(symbol); capped at `max_size` modes.
  Eigen::MatrixXd matrix(Eigen::Index max_size = 4096) const;
  /// Gram matrix of the basis in the represented metric's volume form.
  Eigen::MatrixXd mass_matrix(Eigen::Index max_size = 4096) const;

  /// Integral against the represented metric's volume form.
  double integrate(const Field& f) const;

  friend PaneitzOperator assemble(DiscPtr disc);
  friend PaneitzOperator conformal_operator(const PaneitzOperator& base, const Field& u);

 private:
  struct State {
    DiscPtr disc;
    CurvatureBundle curvature;
    Eigen::VectorXd symbol;
    Eigen::VectorXd factor;  // empty for the model operator
    double min_symbol = 0;
  };
  explicit PaneitzOperator(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  void check_field(const Field& f) const;

  std::shared_ptr<const State> state_;
};

/// Paneitz symbol per coefficient on a model discretization:
/// (sum mu_a)^2 - sum t_a mu_a + ((n-4)/2) Q with t_a = 4 A_a - (n-2) sigma_1.
Eigen::VectorXd paneitz_symbol(const Discretization& disc);

PaneitzOperator assemble(DiscPtr disc);
PaneitzOperator conformal_operator(const PaneitzOperator& base, const Field& u);

Field apply(const PaneitzOperator& P, const Field& f);
Field solve(const PaneitzOperator& P, const Field& rhs);
double min_eigenvalue(const PaneitzOperator& P);
/// int g P f dv in the operator's metric.
double w22_inner(const PaneitzOperator& P, const Field& f, const Field& g);

}  // namespace qcurv

#include "qcurv/paneitz.hpp"

#include "qcurv/error.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>

namespace qcurv {

namespace {

// Basis values at all nodes, one column per mode.
Eigen::MatrixXd synthesis_matrix(const Discretization& d) {
  Eigen::MatrixXd Phi(d.num_nodes(), d.num_modes());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d.num_modes());
  for (Eigen::Index j = 0; j < d.num_modes(); ++j) {
    e(j) = 1;
    Phi.col(j) = d.backward(e);
    e(j) = 0;
  }
  return Phi;
}

void check_size(const Discretization& d, Eigen::Index cap) {
  if (d.num_modes() > cap)
    throw Error(ErrorKind::Unsupported,
                fmt::format("dense matrix of {} modes exceeds the cap of {}", d.num_modes(), cap));
}

}  // namespace

Eigen::VectorXd paneitz_symbol(const Discretization& disc) {
  const auto& model = disc.model();
  const int n = model.dim;
  CurvatureBundle c = curvature_data(model);
  Eigen::VectorXd lam = disc.neg_laplacian();
  Eigen::VectorXd sym = lam.cwiseAbs2();
  for (std::size_t a = 0; a < disc.axes().size(); ++a) {
    double t = 4.0 * disc.axes()[a].schouten - (n - 2) * c.sigma1;
    sym -= t * disc.axis_mu(a);
  }
  sym.array() += 0.5 * (n - 4) * c.q_curv;
  return sym;
}

double PaneitzOperator::exponent() const {
  int n = dim();
  return static_cast<double>(n + 4) / (n - 4);
}

Eigen::VectorXd PaneitzOperator::factor_nodal() const {
  if (is_conformal()) return state_->factor;
  return Eigen::VectorXd::Ones(disc().num_nodes());
}

Eigen::VectorXd PaneitzOperator::density_nodal() const {
  int n = dim();
  if (!is_conformal()) return Eigen::VectorXd::Ones(disc().num_nodes());
  return state_->factor.array().pow(2.0 * n / (n - 4));
}

void PaneitzOperator::check_field(const Field& f) const {
  if (f.disc_ptr() != state_->disc)
    throw Error(ErrorKind::DiscretizationMismatch, "field and operator use different discretizations");
}

Field PaneitzOperator::apply(const Field& f) const {
  check_field(f);
  const auto& d = disc();
  if (!is_conformal()) return Field::from_coeffs(disc_ptr(), symbol().cwiseProduct(f.coeffs()));
  const Eigen::VectorXd& U = state_->factor;
  Eigen::VectorXd x = d.forward(U.cwiseProduct(f.nodal()));
  Eigen::VectorXd y = d.backward(symbol().cwiseProduct(x));
  return Field::from_nodal(disc_ptr(), y.cwiseQuotient(U.array().pow(exponent()).matrix()));
}

void PaneitzOperator::require_positive() const {
  double lo = state_->min_symbol;
  double hi = state_->symbol.cwiseAbs().maxCoeff();
  if (!(lo > 1e-14 * hi))
    throw Error(ErrorKind::NonPositiveOperator,
                fmt::format("operator is not positive: spectrum spans [{:.6g}, {:.6g}]", lo, hi));
}

Field PaneitzOperator::solve(const Field& rhs) const {
  check_field(rhs);
  require_positive();
  const auto& d = disc();
  if (!is_conformal()) return Field::from_coeffs(disc_ptr(), rhs.coeffs().cwiseQuotient(symbol()));
  const Eigen::VectorXd& U = state_->factor;
  Eigen::VectorXd z = d.forward(U.array().pow(exponent()).matrix().cwiseProduct(rhs.nodal()));
  Eigen::VectorXd x = d.backward(z.cwiseQuotient(symbol()));
  return Field::from_nodal(disc_ptr(), x.cwiseQuotient(U));
}

Eigen::MatrixXd PaneitzOperator::matrix(Eigen::Index max_size) const {
  const auto& d = disc();
  check_size(d, max_size);
  if (!is_conformal()) return symbol().asDiagonal();
  Eigen::MatrixXd Phi = synthesis_matrix(d);
  Eigen::MatrixXd T(d.num_modes(), d.num_modes());
  for (Eigen::Index j = 0; j < d.num_modes(); ++j) T.col(j) = d.forward(state_->factor.cwiseProduct(Phi.col(j)));
  Eigen::MatrixXd M = T.transpose() * symbol().asDiagonal() * T;
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd PaneitzOperator::mass_matrix(Eigen::Index max_size) const {
  const auto& d = disc();
  check_size(d, max_size);
  if (!is_conformal()) return Eigen::MatrixXd::Identity(d.num_modes(), d.num_modes());
  Eigen::MatrixXd Phi = synthesis_matrix(d);
  Eigen::VectorXd w = d.weights().cwiseProduct(density_nodal());
  Eigen::MatrixXd B = Phi.transpose() * w.asDiagonal() * Phi;
  return 0.5 * (B + B.transpose());
}

double PaneitzOperator::min_eigenvalue() const {
  if (!is_conformal()) return state_->min_symbol;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix(), mass_matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NonFinite, "generalized eigensolve failed");
  return es.eigenvalues()(0);
}

double PaneitzOperator::integrate(const Field& f) const {
  check_field(f);
  if (!is_conformal()) return qcurv::integrate(f);
  return disc().weights().cwiseProduct(density_nodal()).dot(f.nodal());
}

PaneitzOperator assemble(DiscPtr disc) {
  auto s = std::make_shared<PaneitzOperator::State>();
  s->curvature = curvature_data(disc->model());
  s->symbol = paneitz_symbol(*disc);
  s->min_symbol = s->symbol.minCoeff();
  s->disc = std::move(disc);
  return PaneitzOperator(std::move(s));
}

PaneitzOperator conformal_operator(const PaneitzOperator& base, const Field& u) {
  base.check_field(u);
  double lo = u.nodal().minCoeff();
  if (!(lo > 0))
    throw Error(ErrorKind::NonPositiveFactor, fmt::format("conformal factor must be positive, min = {:.6g}", lo));
  auto s = std::make_shared<PaneitzOperator::State>(*base.state_);
  Eigen::VectorXd U = base.factor_nodal().cwiseProduct(u.nodal());
  if ((U.array() == 1.0).all())
    s->factor.resize(0);
  else
    s->factor = std::move(U);
  return PaneitzOperator(std::move(s));
}

Field apply(const PaneitzOperator& P, const Field& f) { return P.apply(f); }
Field solve(const PaneitzOperator& P, const Field& rhs) { return P.solve(rhs); }
double min_eigenvalue(const PaneitzOperator& P) { return P.min_eigenvalue(); }

double w22_inner(const PaneitzOperator& P, const Field& f, const Field& g) {
  P.require_positive();
  require_same_disc(f, g);
  if (f.disc_ptr() != P.disc_ptr())
    throw Error(ErrorKind::DiscretizationMismatch, "field and operator use different discretizations");
  if (!P.is_conformal()) return g.coeffs().dot(P.symbol().cwiseProduct(f.coeffs()));
  const auto& d = P.disc();
  Eigen::VectorXd U = P.factor_nodal();
  Eigen::VectorXd x = d.forward(U.cwiseProduct(f.nodal()));
  Eigen::VectorXd y = d.forward(U.cwiseProduct(g.nodal()));
  return y.dot(P.symbol().cwiseProduct(x));
}

}  // namespace qcurv

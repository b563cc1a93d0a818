#include "qcurv/flow.hpp"

#include "qcurv/conformal.hpp"
#include "qcurv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace qcurv {

namespace {

struct Powers {
  Eigen::VectorXd up;  // signed |u|^p
  double volume;       // int |u|^{p+1}
};

Powers signed_powers(const Discretization& d, const Eigen::VectorXd& nodal, double p) {
  Powers out;
  out.up.resize(nodal.size());
  Eigen::VectorXd absq(nodal.size());
  for (Eigen::Index i = 0; i < nodal.size(); ++i) {
    double a = std::abs(nodal(i));
    double ap = std::pow(a, p);
    out.up(i) = std::copysign(ap, nodal(i));
    absq(i) = ap * a;
  }
  out.volume = d.weights().dot(absq);
  return out;
}

}  // namespace

double mu_of(const PaneitzOperator& P, const Field& u) {
  const int n = P.dim();
  double E = w22_inner(P, u, u);
  Field pw = pointwise(u, [n](double x) { return std::pow(std::abs(x), 2.0 * n / (n - 4)); });
  double V = P.integrate(pw);
  if (!(V > 0)) throw Error(ErrorKind::InvalidArgument, "mu of the zero field");
  return E / V;
}

Field flow_rhs(const PaneitzOperator& P, const Field& u) {
  double mu = mu_of(P, u);
  Field up = pointwise(u, maps::signed_power(P.exponent()));
  return P.solve(up) * mu - u;
}

QFlow::QFlow(PaneitzOperator P, const Field& u0, FlowOptions opt)
    : P_(std::move(P)),
      opt_(opt),
      dopri_([this](double, const Eigen::VectorXd& y) { return rhs(y); },
             [this](const Eigen::VectorXd& err, const Eigen::VectorXd&, const Eigen::VectorXd& y1) {
               return err.norm() / (opt_.tol * y1.norm());
             }) {
  if (P_.is_conformal()) throw Error(ErrorKind::Unsupported, "the flow runs on a model background operator");
  if (!(opt_.tol > 0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  P_.require_positive();
  if (u0.disc_ptr() != P_.disc_ptr())
    throw Error(ErrorKind::DiscretizationMismatch, "initial data and operator use different discretizations");
  y_ = u0.coeffs();
  Eigen::VectorXd nodal = P_.disc().backward(y_);
  if (!(nodal.minCoeff() > 0))
    throw Error(ErrorKind::Precondition, fmt::format("initial data must be positive, min = {:.6g}", nodal.minCoeff()));
  state_.u = Field::from_coeffs(P_.disc_ptr(), y_);
  state_.t = 0;
  Pu0_nodal_ = P_.disc().backward(P_.symbol().cwiseProduct(y_));
  k1_ = rhs(y_);
  fPf_ = k1_.dot(P_.symbol().cwiseProduct(k1_));
  record_ = make_record(y_, k1_, 0.0, 0.0);
  dt_next_ = opt_.dt_initial;
}

Eigen::VectorXd QFlow::rhs(const Eigen::VectorXd& y) const {
  const auto& d = P_.disc();
  Eigen::VectorXd nodal = d.backward(y);
  Powers pw = signed_powers(d, nodal, P_.exponent());
  double E = y.dot(P_.symbol().cwiseProduct(y));
  double mu = E / pw.volume;
  return mu * d.forward(pw.up).cwiseQuotient(P_.symbol()) - y;
}

MonitorRecord QFlow::make_record(const Eigen::VectorXd& y, const Eigen::VectorXd& f, double t,
                                 double cumulative) const {
  const auto& d = P_.disc();
  const int n = P_.dim();
  Eigen::VectorXd nodal = d.backward(y);
  Powers pw = signed_powers(d, nodal, P_.exponent());
  MonitorRecord r;
  r.t = t;
  r.energy = y.dot(P_.symbol().cwiseProduct(y));
  r.volume = pw.volume;
  r.mu = r.energy / r.volume;
  r.quotient = r.energy / std::pow(r.volume, (n - 4.0) / n);
  r.min_u = nodal.minCoeff();
  r.residual = f.norm();
  Eigen::VectorXd Pu = d.backward(P_.symbol().cwiseProduct(y));
  r.lower_bound_slack = (Pu - std::exp(-t) * Pu0_nodal_).minCoeff();
  r.cumulative_st = cumulative;
  r.l2_mass = y.squaredNorm();
  return r;
}

double QFlow::relative_residual() const { return k1_.norm() / y_.norm(); }

Field QFlow::current_rhs() const { return Field::from_coeffs(P_.disc_ptr(), k1_); }

const MonitorRecord& QFlow::step(double dt_target) {
  if (!(dt_target > 0)) throw Error(ErrorKind::InvalidArgument, "step target must be positive");
  last_ = dopri_.step(state_.t, y_, k1_, dt_target);
  Eigen::VectorXd nodal = P_.disc().backward(last_.y1);
  if (!(nodal.minCoeff() > 0))
    throw Error(ErrorKind::PositivityLoss,
                fmt::format("u lost positivity at t = {:.17g}: min u = {:.6g}", state_.t + last_.h, nodal.minCoeff()));
  double fPf_new = last_.k1_next.dot(P_.symbol().cwiseProduct(last_.k1_next));
  double cumulative = record_.cumulative_st + 0.5 * last_.h * (fPf_ + fPf_new);
  y_ = last_.y1;
  k1_ = last_.k1_next;
  fPf_ = fPf_new;
  state_.t += last_.h;
  state_.u = Field::from_coeffs(P_.disc_ptr(), y_);
  record_ = make_record(y_, k1_, state_.t, cumulative);
  dt_next_ = last_.h_next;
  return record_;
}

RunSummary run(const PaneitzOperator& P, const Field& u0, double t_end, const FlowOptions& opt,
               const RecordSink& sink) {
  QFlow flow(P, u0, opt);
  const int n = P.dim();
  RunSummary s;
  auto emit = [&](const MonitorRecord& r) {
    s.records.push_back(r);
    if (sink) sink(r);
  };
  emit(flow.record());
  const double max0 = std::log(flow.state().u.max_nodal());
  const double E0 = flow.record().energy;
  if (opt.q0) s.volume_bound = std::pow(E0 / *opt.q0, static_cast<double>(n) / (n - 4));

  s.growth_rate = 0;
  bool grown = false;
  double dt = opt.dt_initial;
  std::size_t steps = 0;
  while (flow.relative_residual() > opt.threshold && flow.state().t < t_end) {
    if (++steps > opt.max_steps) break;
    double target = std::min(dt, t_end - flow.state().t);
    bool clipped = target < dt;
    emit(flow.step(target));
    // a step clipped to land on t_end says nothing about the natural step size
    if (!clipped || flow.last_step().rejected) dt = flow.suggested_dt();
    double rate = (std::log(flow.state().u.max_nodal()) - max0) / flow.state().t;
    s.growth_rate = grown ? std::max(s.growth_rate, rate) : rate;
    grown = true;
  }
  s.converged = flow.relative_residual() <= opt.threshold;
  s.relative_residual = flow.relative_residual();
  s.final_state = flow.state();

  const double V0exp = std::pow(s.records.front().volume, (n - 4.0) / n);
  for (const auto& r : s.records) {
    s.l2_constant = std::max(s.l2_constant, std::pow(r.volume, (n - 4.0) / n) / r.l2_mass);
    if (s.volume_bound && r.volume > *s.volume_bound * (1 + 1e-9)) s.volume_bound_ok = false;
  }
  s.l2_floor = V0exp / s.l2_constant;
  return s;
}

Stationarity stationarity(const PaneitzOperator& P, const Field& u0) {
  Field u = u0.projected();
  Stationarity s;
  s.mu_bar = mu_of(P, u);
  Field up = pointwise(u, maps::signed_power(P.exponent()));
  Field gap = P.apply(u) - up * s.mu_bar;
  s.residual = std::sqrt(integrate(pointwise(gap, maps::square())) / integrate(pointwise(u, maps::square())));
  Field Q = conformal_Q(P, u);
  s.q_mean = Q.nodal().mean();
  s.q_spread = (Q.max_nodal() - Q.min_nodal()) / std::abs(s.q_mean);
  s.min_R = conformal_R(u).min_nodal();
  return s;
}

RescaleReport rescale_check(const PaneitzOperator& P, const Field& u0, double t_end, double tol,
                            std::size_t samples) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "rescale_check needs at least 2 samples");
  const auto& d = P.disc();
  const Eigen::Index N = d.num_modes();
  const double p = P.exponent();
  std::vector<double> times(samples);
  for (std::size_t j = 0; j < samples; ++j) times[j] = t_end * static_cast<double>(j) / (samples - 1);

  // normalized trajectory, sampled by dense output
  FlowOptions opt;
  opt.tol = tol;
  QFlow flow(P, u0, opt);
  std::vector<Eigen::VectorXd> direct(samples);
  direct[0] = u0.projected().nodal();
  {
    std::size_t j = 1;
    double dt = opt.dt_initial;
    while (j < samples) {
      flow.step(std::min(dt, t_end - flow.state().t));
      dt = flow.suggested_dt();
      const auto& st = flow.last_step();
      double t1 = st.t0 + st.h;
      while (j < samples && (times[j] <= t1 || (j + 1 == samples && t1 >= t_end * (1 - 1e-15)))) {
        double theta = std::clamp((times[j] - st.t0) / st.h, 0.0, 1.0);
        direct[j] = d.backward(st.at(theta));
        ++j;
      }
    }
  }

  // Unnormalized flow with v(0) = kappa u0, written against the normalized time t:
  // dv/dt = nu(v) (-v + P^{-1}|v|^p), ds/dt = nu(v).  nu(v(0)) = 1/2 pushes v towards
  // blow-up, where s(t) saturates and v grows like e^t, instead of towards collapse,
  // where t(s) stays bounded.
  double mu0 = mu_of(P, u0);
  double kappa = std::pow(2.0 * mu0, 1.0 / (p - 1));
  const Eigen::VectorXd& sym = P.symbol();
  auto rhs = [&](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd c = y.head(N);
    Eigen::VectorXd nodal = d.backward(c);
    Powers pw = signed_powers(d, nodal, p);
    double nu = c.dot(sym.cwiseProduct(c)) / pw.volume;
    Eigen::VectorXd out(N + 1);
    out.head(N) = nu * (d.forward(pw.up).cwiseQuotient(sym) - c);
    out(N) = nu;
    return out;
  };
  auto ratio = [&](const Eigen::VectorXd& err, const Eigen::VectorXd&, const Eigen::VectorXd& y1) {
    double rv = err.head(N).norm() / (tol * y1.head(N).norm());
    double rs = std::abs(err(N)) / (tol * std::max(1.0, std::abs(y1(N))));
    return std::max(rv, rs);
  };
  Dopri45 dp(rhs, ratio);
  Eigen::VectorXd y(N + 1);
  y.head(N) = kappa * u0.coeffs();
  y(N) = 0;
  double t = 0, h = opt.dt_initial;
  Eigen::VectorXd k1 = rhs(t, y);

  RescaleReport rep;
  rep.kappa = kappa;
  rep.samples = samples;
  double disc = 0;
  std::size_t j = 1;
  while (j < samples) {
    Dopri45::Step st = dp.step(t, y, k1, std::min(h, t_end - t));
    double t1 = st.t0 + st.h;
    while (j < samples && (times[j] <= t1 || (j + 1 == samples && t1 >= t_end * (1 - 1e-15)))) {
      double theta = std::clamp((times[j] - st.t0) / st.h, 0.0, 1.0);
      Eigen::VectorXd v = st.at(theta);
      Eigen::VectorXd ur = d.backward(v.head(N)) * (std::exp(v(N) - times[j]) / kappa);
      disc = std::max(disc, (ur - direct[j]).cwiseAbs().maxCoeff());
      ++j;
    }
    t = t1;
    y = st.y1;
    k1 = st.k1_next;
    h = st.h_next;
  }
  rep.discrepancy = disc;
  rep.s_end = y(N);
  return rep;
}

}  // namespace qcurv

#pragma once

#include "qcurv/dopri.hpp"
#include "qcurv/paneitz.hpp"
#include "qcurv/spectral.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace qcurv {

struct MonitorRecord {
  double t = 0;
  double energy = 0;             // int u P u
  double volume = 0;             // int |u|^{2n/(n-4)}
  double mu = 0;
  double quotient = 0;
  double min_u = 0;
  double residual = 0;           // ||f||_{L2}
  double lower_bound_slack = 0;  // min over nodes of P u - e^{-t} P u(0)
  double cumulative_st = 0;      // int_0^t int f P f
  double l2_mass = 0;            // int u^2
};

struct FlowState {
  Field u;
  double t = 0;
};

struct FlowOptions {
  double tol = 1e-8;
  double threshold = 1e-6;  // on ||f|| / ||u||
  double dt_initial = 1e-2;
  std::size_t max_steps = 1000000;
  /// Discrete Paneitz-Sobolev constant for the volume upper bound, if known.
  std::optional<double> q0;
};

double mu_of(const PaneitzOperator& P, const Field& u);
/// f = -u + mu(u) P^{-1}(|u|^{(n+4)/(n-4)} sign u)
Field flow_rhs(const PaneitzOperator& P, const Field& u);

/// Integrator for the normalized flow on the coefficient vector of u.
class QFlow {
 public:
  QFlow(PaneitzOperator P, const Field& u0, FlowOptions opt = {});
  QFlow(const QFlow&) = delete;
  QFlow& operator=(const QFlow&) = delete;

  const FlowState& state() const { return state_; }
  const MonitorRecord& record() const { return record_; }
  double relative_residual() const;
  double suggested_dt() const { return dt_next_; }
  /// Dense output of the most recent accepted step.
  const Dopri45::Step& last_step() const { return last_; }
  /// Rhs f at the current state.
  Field current_rhs() const;

  /// One accepted adaptive step, trying `dt_target` first.  Halts (throws) on step
  /// underflow or loss of positivity.
  const MonitorRecord& step(double dt_target);

 private:
  Eigen::VectorXd rhs(const Eigen::VectorXd& y) const;
  MonitorRecord make_record(const Eigen::VectorXd& y, const Eigen::VectorXd& f, double t, double cumulative) const;

  PaneitzOperator P_;
  FlowOptions opt_;
  Dopri45 dopri_;
  FlowState state_;
  Eigen::VectorXd y_, k1_;
  Eigen::VectorXd Pu0_nodal_;
  MonitorRecord record_;
  double fPf_ = 0;
  double dt_next_ = 0;
  Dopri45::Step last_;
};

struct RunSummary {
  std::vector<MonitorRecord> records;
  FlowState final_state;
  bool converged = false;
  double relative_residual = 0;
  /// sup over t of (ln max u(t) - ln max u(0)) / t.
  double growth_rate = 0;
  /// max over the run of V^{(n-4)/n} / int u^2, and the resulting floor V(0)^{(n-4)/n} / that.
  double l2_constant = 0;
  double l2_floor = 0;
  std::optional<double> volume_bound;
  bool volume_bound_ok = true;
};

using RecordSink = std::function<void(const MonitorRecord&)>;

/// Steps until t_end or relative residual <= opt.threshold.
RunSummary run(const PaneitzOperator& P, const Field& u0, double t_end, const FlowOptions& opt = {},
               const RecordSink& sink = {});

struct Stationarity {
  double mu_bar = 0;
  /// ||P u - mu_bar u^{(n+4)/(n-4)}||_{L2} / ||u||_{L2}
  double residual = 0;
  /// (max Q - min Q) / mean Q for the metric u^{4/(n-4)} g
  double q_spread = 0;
  double q_mean = 0;
  double min_R = 0;
};

Stationarity stationarity(const PaneitzOperator& P, const Field& u);

struct RescaleReport {
  double discrepancy = 0;  // sup over samples and nodes
  double kappa = 0;        // v(0) = kappa u(0)
  double s_end = 0;        // unnormalized time s(t_end)
  std::size_t samples = 0;
};

/// Integrates the unnormalized flow from kappa u0 (reparametrized by t) and compares e^{s-t} v(s(t)) / kappa
/// with the normalized trajectory at `samples` uniform times in [0, t_end].
RescaleReport rescale_check(const PaneitzOperator& P, const Field& u0, double t_end, double tol,
                            std::size_t samples = 101);

}  // namespace qcurv

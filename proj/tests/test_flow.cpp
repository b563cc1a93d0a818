#include "qcurv/dopri.hpp"
#include "qcurv/error.hpp"
#include "qcurv/flow.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qcurv;

namespace {
const double pi = std::numbers::pi;

PaneitzOperator product(int n = 5, int N = 32) {
  return assemble(build_discretization(ModelManifold::circle_cross_sphere(n, 2 * pi), Symmetry::CircleOnly, N));
}

Field wave(const PaneitzOperator& P, double a) {
  return Field::sample(P.disc_ptr(), [a](const Point& x) { return 1 + a * std::cos(x.coords[0]); }).projected();
}
}  // namespace

TEST_CASE("mu of constants") {
  auto S = assemble(build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 16));
  CHECK(mu_of(S, Field::constant(S.disc_ptr(), 1.0)) == doctest::Approx(105.0 / 16).epsilon(1e-13));
  auto P = product();
  CHECK(mu_of(P, Field::constant(P.disc_ptr(), 1.0)) == doctest::Approx(25.0 / 16).epsilon(1e-13));
  auto P6 = product(6);
  Field u = wave(P6, 0.2);
  CHECK(mu_of(P6, u * 2.0) == doctest::Approx(mu_of(P6, u) * std::pow(2.0, -4.0)).epsilon(1e-12));
}

TEST_CASE("constants are stationary") {
  auto P = product();
  for (double c : {1.0, 0.3, 4.0}) {
    Field f = flow_rhs(P, Field::constant(P.disc_ptr(), c));
    CHECK(f.coeffs().norm() < 1e-12 * c);
  }
  Stationarity s = stationarity(P, Field::constant(P.disc_ptr(), 2.0));
  CHECK(s.residual < 1e-12);
  CHECK(s.q_spread < 1e-12);
  CHECK(s.min_R > 0);
}

TEST_CASE("rhs is W22 orthogonal to u") {
  auto P = product();
  Field u = wave(P, 0.2);
  Field f = flow_rhs(P, u);
  CHECK(std::abs(w22_inner(P, u, f)) < 1e-12 * w22_inner(P, u, u));
  CHECK(w22_inner(P, f, f) > 0);
}

TEST_CASE("volume rate identity") {
  // dV/dt = (p+1)/mu int f P f
  auto P = product();
  Field u = wave(P, 0.2);
  Field f = flow_rhs(P, u);
  const double p = P.exponent();
  auto V = [&](const Field& w) {
    return integrate(pointwise(w, [p](double x) { return std::pow(std::abs(x), p + 1); }));
  };
  const double h = 1e-4;
  double dV = (V(u + f * h) - V(u - f * h)) / (2 * h);
  double expect = (p + 1) / mu_of(P, u) * w22_inner(P, f, f);
  CHECK(dV == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("flow conserves energy and increases volume") {
  auto P = product();
  FlowOptions opt;
  opt.tol = 1e-9;
  QFlow flow(P, wave(P, 0.1), opt);
  const double E0 = flow.record().energy;
  double V = flow.record().volume;
  double mu = flow.record().mu;
  double dt = 1e-2;
  for (int i = 0; i < 40; ++i) {
    const MonitorRecord& r = flow.step(dt);
    dt = flow.suggested_dt();
    CHECK(std::abs(r.energy - E0) <= 10 * opt.tol * E0);
    CHECK(r.volume >= V - 1e-12 * V);
    CHECK(r.mu <= mu + 1e-12 * mu);
    CHECK(r.min_u > 0);
    V = r.volume;
    mu = r.mu;
  }
  CHECK(flow.state().t > 0);
}

TEST_CASE("run stops at once on a stationary point") {
  auto S = assemble(build_discretization(ModelManifold::round_sphere(5), Symmetry::ZonalOnly, 16));
  RunSummary s = run(S, Field::constant(S.disc_ptr(), 1.0), 10.0);
  CHECK(s.converged);
  CHECK(s.records.size() == 1);
  CHECK(s.final_state.t == 0);
}

TEST_CASE("flow rejects nonpositive data") {
  auto P = product();
  Field u = wave(P, 1.5);
  CHECK_THROWS_AS(QFlow(P, u), Error);
}

TEST_CASE("unnormalized flow matches after rescaling") {
  auto P = product(5, 16);
  RescaleReport r = rescale_check(P, wave(P, 0.1), 1.0, 1e-10, 11);
  CHECK(r.discrepancy < 1e-6);
  CHECK(r.s_end > 0);
}

TEST_CASE("dopri45 integrates exponential decay") {
  Dopri45 dp([](double, const Eigen::VectorXd& y) { Eigen::VectorXd d = -y; return d; },
             [](const Eigen::VectorXd& err, const Eigen::VectorXd&, const Eigen::VectorXd& y1) {
               return err.norm() / (1e-10 * std::max(1.0, y1.norm()));
             });
  Eigen::VectorXd y(1);
  y << 1.0;
  double t = 0, h = 0.1;
  Eigen::VectorXd k1 = -y;
  Eigen::VectorXd mid;
  while (t < 1.0 - 1e-14) {
    Dopri45::Step st = dp.step(t, y, k1, std::min(h, 1.0 - t));
    if (st.t0 <= 0.5 && st.t0 + st.h >= 0.5) mid = st.at((0.5 - st.t0) / st.h);
    t = st.t0 + st.h;
    y = st.y1;
    k1 = st.k1_next;
    h = st.h_next;
  }
  CHECK(y(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  REQUIRE(mid.size() == 1);
  CHECK(mid(0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
}

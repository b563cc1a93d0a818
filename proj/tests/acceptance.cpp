// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "qcurv/bubbles.hpp"
#include "qcurv/conformal.hpp"
#include "qcurv/error.hpp"
#include "qcurv/flow.hpp"
#include "qcurv/green.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <string>

using namespace qcurv;
namespace fs = std::filesystem;

namespace {

const double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double cn(int n) { return 1.0 / (2.0 * (n - 2) * (n - 4) * sphere_area(n - 1)); }

PaneitzOperator sphere(int n, int N) {
  return assemble(build_discretization(ModelManifold::round_sphere(n), Symmetry::ZonalOnly, N));
}
PaneitzOperator product_circle(int n, double L, int N) {
  return assemble(build_discretization(ModelManifold::circle_cross_sphere(n, L), Symmetry::CircleOnly, N));
}
PaneitzOperator product_2d(double L, int circle, int zonal) {
  return assemble(build_discretization(ModelManifold::circle_cross_sphere(5, L), Symmetry::CircleZonal2D, zonal, circle));
}

// C1
Outcome curvature() {
  Outcome o;
  for (int n = 5; n <= 8; ++n) {
    auto c = curvature_data(ModelManifold::round_sphere(n));
    bool ok = c.q_exact == Rational(n * (n * n - 4), 8) && c.scalar_exact == Rational(n * (n - 1));
    if (!ok) o.pass = false;
  }
  for (int n = 5; n <= 6; ++n) {
    auto c = curvature_data(ModelManifold::circle_cross_sphere(n, 2 * pi));
    bool ok = c.q_exact == Rational(n * n * (n - 4), 8) && c.scalar_exact == Rational((n - 1) * (n - 2));
    if (!ok) o.pass = false;
  }
  auto t = curvature_data(ModelManifold::flat_torus(5, 1.0));
  if (t.q_exact != Rational(0) || t.scalar_exact != Rational(0)) o.pass = false;
  o.detail = "S^n n=5..8, S^1 x S^{n-1} n=5,6, T^5 exact";
  return o;
}

// C2
Outcome spectrum() {
  Outcome o;
  double worst = 0;
  for (int n : {5, 6, 8}) {
    auto P = sphere(n, 32);
    const auto& deg = P.disc().axes()[0].degree;
    for (Eigen::Index i = 0; i < P.disc().num_modes(); ++i) {
      double k = deg(i);
      double h = k + n / 2.0;
      double expect = (h + 1) * h * (h - 1) * (h - 2);
      worst = std::max(worst, std::abs(P.symbol()(i) - expect) / expect);
    }
  }
  auto P = product_circle(5, 2 * pi, 32);
  const auto& deg = P.disc().axes()[0].degree;
  for (Eigen::Index i = 0; i < P.disc().num_modes(); ++i) {
    double k2 = static_cast<double>(deg(i)) * deg(i);
    double expect = (k2 + 0.25) * (k2 + 6.25);
    worst = std::max(worst, std::abs(P.symbol()(i) - expect) / expect);
  }
  o.pass = worst <= 1e-12;
  o.detail = fmt::format("max relative eigenvalue error {:.3g} (k <= 31)", worst);
  return o;
}

// C3
Outcome positivity() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> pw(1, 6);
  auto S = sphere(5, 64);
  auto C = product_circle(5, 2 * pi, 64);
  double lam = std::min(min_eigenvalue(S), min_eigenvalue(C));
  if (!(lam > 0)) o.pass = false;
  double worst = INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const bool on_sphere = trial % 2 == 0;
    const PaneitzOperator& P = on_sphere ? S : C;
    double a = uni(rng), b = uni(rng), shift = 2 * pi * uni(rng);
    int m1 = pw(rng), m2 = pw(rng);
    Field f = Field::sample(P.disc_ptr(), [&](const Point& x) {
      double c = x.coords[0];
      if (on_sphere) return a * std::pow(1 + std::cos(c), m1) + b * std::pow(1 - std::cos(c), m2);
      return a * std::pow(1 + std::cos(c - shift), m1) + b * std::pow(1 + std::cos(c), m2);
    });
    Field u = P.solve(f.projected());
    worst = std::min(worst, u.min_nodal() / u.max_abs());
  }
  if (!(worst > 0)) o.pass = false;
  auto G = product_2d(2 * pi, 256, 128);
  Point pole{{0.0, 0.0}};
  Field g = greens_function(G, pole, {.filtered = true});
  const double h = G.disc().grid_length();
  double gmin = INFINITY;
  for (Eigen::Index i = 0; i < G.disc().num_nodes(); ++i)
    if (geodesic_distance(G.disc().model(), pole, G.disc().node_point(i)) > 3 * h) gmin = std::min(gmin, g.nodal()(i));
  if (!(gmin > 0)) o.pass = false;
  o.detail = fmt::format("lambda_min {:.4g}, min relative solution over 100 sources {:.3g}, min G beyond 3h {:.3g}",
                         lam, worst, gmin);
  return o;
}

struct FlowRun {
  RunSummary summary;
  Stationarity stat;
  double pu_scale = 0;
  double amplification = 0;  // ||P f|| / ||f|| at the final state
};

FlowRun flow_run() {
  auto P = product_circle(5, 2 * pi, 64);
  Field u0 = Field::sample(P.disc_ptr(), [](const Point& x) { return 1 + 0.1 * std::cos(x.coords[0]); });
  FlowOptions opt;
  opt.tol = 1e-8;
  opt.threshold = 1e-6;
  FlowRun r;
  r.summary = run(P, u0, 200.0, opt);
  r.stat = stationarity(P, r.summary.final_state.u);
  r.pu_scale = P.apply(u0.projected()).max_abs();
  Field f = flow_rhs(P, r.summary.final_state.u);
  r.amplification = P.apply(f).coeffs().norm() / f.coeffs().norm();
  return r;
}

// C4
Outcome flow_monotone(const FlowRun& r) {
  Outcome o;
  const auto& rec = r.summary.records;
  double E0 = rec.front().energy, drift = 0, worst_slack = INFINITY;
  bool mono = true;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    drift = std::max(drift, std::abs(rec[i].energy - E0) / E0);
    worst_slack = std::min(worst_slack, rec[i].lower_bound_slack);
    if (i == 0) continue;
    const auto &a = rec[i - 1], &b = rec[i];
    if (b.volume < a.volume * (1 - 1e-9) || b.mu > a.mu * (1 + 1e-9) || b.quotient > a.quotient * (1 + 1e-9))
      mono = false;
  }
  o.pass = drift <= 1e-6 && mono && worst_slack >= -1e-8 * r.pu_scale;
  o.detail = fmt::format("{} steps, energy drift {:.3g}, monotone {}, min lower-bound slack {:.3g}", rec.size() - 1,
                         drift, mono ? "yes" : "no", worst_slack);
  return o;
}

// C5
Outcome flow_limit(const FlowRun& r) {
  Outcome o;
  o.pass = r.summary.converged && r.stat.residual <= 1e-5 && r.stat.q_spread <= 1e-4 && r.stat.min_R > 0;
  o.detail = fmt::format(
      "converged {} at t = {:.4g} with ||f||/||u|| = {:.3g}; stationarity residual {:.3g} (bound 1e-5, ||Pf||/||f|| = "
      "{:.3g}), Q spread {:.3g}, min R {:.4g}",
      r.summary.converged ? "yes" : "no", r.summary.final_state.t, r.summary.relative_residual, r.stat.residual,
      r.amplification, r.stat.q_spread, r.stat.min_R);
  return o;
}

// C6
Outcome rescaling() {
  auto P = product_circle(5, 2 * pi, 64);
  Field u0 = Field::sample(P.disc_ptr(), [](const Point& x) { return 1 + 0.1 * std::cos(x.coords[0]); }).projected();
  RescaleReport r = rescale_check(P, u0, 5.0, 1e-10);
  Outcome o;
  o.pass = r.discrepancy <= 1e-5;
  o.detail = fmt::format("sup discrepancy {:.3g} over {} samples, s(5) = {:.5g}", r.discrepancy, r.samples, r.s_end);
  return o;
}

// C7
Outcome green_expansion() {
  Outcome o;
  std::vector<double> t;
  for (int i = 0; i <= 80; ++i) t.push_back(0.15 + 0.65 * i / 80.0);
  GreenExpansion tor = fit_radial_samples(t, torus_green_axis(5, 2 * pi, 128, t), 5);
  double torus_ratio = tor.leading_coeff / cn(5);
  if (std::abs(torus_ratio - 1) > 0.01) o.pass = false;

  auto S = sphere(5, 256);
  FitWindow w = default_window(S.disc());
  GreenExpansion s = fit_expansion(greens_function(S, Point{{0.0}}), Point{{0.0}}, w);
  double floor = 1e-3 * s.leading_coeff * std::pow(w.r_min, -1.0);
  if (!(std::abs(s.alpha) <= floor)) o.pass = false;

  std::string prod;
  for (double L : {2 * pi, pi}) {
    auto P = product_2d(L, 512, 256);
    Point pole{{0.0, 0.0}};
    GreenExpansion e = fit_expansion(greens_function(P, pole, {.filtered = true}), pole, default_window(P.disc()));
    if (!(e.alpha > 0 && e.stable)) o.pass = false;
    prod += fmt::format(", L = {:.4g}: alpha/c {:.4g} ({})", L, e.alpha / e.leading_coeff,
                        e.stable ? "stable" : "unstable");
  }
  o.detail = fmt::format("torus lead/c {:.5f}, S^5 |alpha| {:.3g} <= {:.3g}{}", torus_ratio, std::abs(s.alpha), floor,
                         prod);
  return o;
}

// C8
Outcome bubble_correction() {
  Outcome o;
  double worst = 0;
  for (int n = 5; n <= 8; ++n) {
    for (double e : {0.05, 0.3, 1.0}) {
      auto U = [&](auto r) { return pow(e * e + r * r, -(n - 4) / 2.0); };
      for (double r : {0.01, 0.1, 0.5, 2.0}) {
        double rhs = bubble_constant(n) * std::pow(e, 4) * std::pow(e * e + r * r, -(n + 4) / 2.0);
        worst = std::max(worst, std::abs(radial_bilaplacian(U, n, r) - rhs) / rhs);
      }
    }
  }
  auto P = sphere(8, 1024);
  BubbleSpec spec;
  spec.center = Point{{0.0}};
  spec.variant = BubbleVariant::Corrected;
  spec.eps = 0.0785;
  spec.delta = 0.785;
  CorrectionReport r = correction_report(P, spec, corrected_bubble(P, spec));
  o.pass = worst <= 1e-9 && r.min_u > 0 && r.admissible;
  o.detail = fmt::format("bilaplacian error {:.3g}; S^8 corrected: min u {:.4g}, min R {:.4g}, sup diff {:.4g}, {}",
                         worst, r.min_u, r.min_R, r.sup_diff, r.admissible ? "admissible" : "not admissible");
  return o;
}

// C9
Outcome deficits() {
  Outcome o;
  auto P = product_2d(2 * pi, 512, 256);
  Point pole{{0.0, 0.0}};
  GreenData gd{greens_function(P, pole, {.filtered = true}), {}};
  gd.expansion = fit_expansion(gd.G, pole, default_window(P.disc()));
  BubbleSpec spec;
  spec.center = pole;
  spec.variant = BubbleVariant::Glued;
  spec.inner_delta = 0.75;
  DeficitReport rep = deficit_scan(P, spec, {0.2, 0.1, 0.05, 0.025}, &gd);
  bool positive = true;
  for (const auto& row : rep.rows) positive = positive && row.deficit > 0;
  bool rate = std::abs(rep.fit_exponent - 1.0) <= 0.2;

  auto S = sphere(5, 512);
  BubbleSpec st;
  st.center = Point{{0.0}};
  st.delta = INFINITY;
  st.chart = BubbleChart::Stereographic;
  st.eps = 0.1;
  double gap = std::abs(quotient(S, standard_bubble(S.disc_ptr(), st).projected()).quotient / euclidean_Sn(5) - 1);
  SnReport sn = euclidean_Sn_report(5);

  o.pass = positive && rate && gap <= 0.01 && sn.relative_change <= 1e-8;
  std::string defs;
  for (const auto& row : rep.rows) defs += fmt::format(" {:.4g}", row.deficit);
  o.detail = fmt::format("glued deficits{} exponent {:.4g}; S^5 gap {:.3g}; S_n doubling change {:.3g}", defs,
                         rep.fit_exponent, gap, sn.relative_change);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// C10
Outcome determinism(const std::string& cli, const fs::path& work) {
  Outcome o;
  fs::create_directories(work);
  const fs::path cfg = work / "random_flow.ini";
  std::ofstream(cfg) << "[model]\nkind = product\nn = 5\n[discretization]\nsymmetry = circle_zonal\n"
                        "mode_count = 16\ncircle_mode_count = 16\n[flow]\nt_end = 2\nu0 = 1 + 0.05*random(3)\n";
  auto run_once = [&](const std::string& tag) {
    fs::path out = work / tag;
    fs::remove_all(out);
    std::string cmd = fmt::format("\"{}\" flow --config \"{}\" --seed 7 --out \"{}\" > \"{}\" 2>&1", cli, cfg.string(),
                                  out.string(), (work / (tag + ".log")).string());
    return std::system(cmd.c_str());
  };
  int a = run_once("first"), b = run_once("second");
  if (a != 0 || b != 0) {
    o.pass = false;
    o.detail = fmt::format("CLI exit codes {} and {}", a, b);
    return o;
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(work / "first")) {
    ++files;
    fs::path other = work / "second" / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      o.pass = false;
      o.detail = fmt::format("{} differs between runs", e.path().filename().string());
      return o;
    }
  }
  o.pass = files > 0;
  o.detail = fmt::format("{} output files byte-identical across two seeded runs", files);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli, work = "acceptance_work";
  app.add_option("--cli", cli, "path to the qcurv executable")->required();
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    if (!o.pass) ++failures;
    fmt::print("{} C{} {}: {}\n", o.pass ? "PASS" : "FAIL", id, name, o.detail);
    std::fflush(stdout);
  };

  report(1, "model curvature", curvature);
  report(2, "Paneitz spectrum", spectrum);
  report(3, "positivity", positivity);
  FlowRun fr;
  std::string flow_error;
  try {
    fr = flow_run();
  } catch (const std::exception& e) {
    flow_error = e.what();
  }
  auto guarded = [&](Outcome (*f)(const FlowRun&)) {
    return [&, f] {
      if (!flow_error.empty()) throw std::runtime_error(flow_error);
      return f(fr);
    };
  };
  report(4, "flow monotonicity", guarded(flow_monotone));
  report(5, "flow limit", guarded(flow_limit));
  report(6, "rescaling", rescaling);
  report(7, "Green expansion", green_expansion);
  report(8, "bubble correction", bubble_correction);
  report(9, "Sobolev deficits", deficits);
  report(10, "determinism", [&] { return determinism(cli, fs::path(work)); });
  fmt::print("{} of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}

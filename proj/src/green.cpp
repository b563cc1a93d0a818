#include "qcurv/green.hpp"

#include "qcurv/error.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qcurv {

namespace {

void require_axis_pole(const Discretization& d, const Point& pole) {
  std::vector<double> xc = d.axis_coordinates(pole);
  for (std::size_t a = 0; a < d.axes().size(); ++a) {
    if (d.axes()[a].kind != Axis::Kind::Zonal) continue;
    double th = xc[a];
    if (std::abs(th) > 1e-12 && std::abs(th - std::numbers::pi) > 1e-12)
      throw Error(ErrorKind::Precondition, "zonal discretizations only resolve poles on the symmetry axis");
  }
}

struct Fit {
  Eigen::Vector3d coef;
  double residual = 0;
  double condition = 0;
};

Fit least_squares(const std::vector<double>& r, const std::vector<double>& g, int n) {
  const auto m = static_cast<Eigen::Index>(r.size());
  if (m < 8) throw Error(ErrorKind::FitFailure, fmt::format("fit window holds {} nodes, need at least 8", m));
  Eigen::MatrixXd A(m, 3);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, 0) = std::pow(r[i], 4 - n);
    A(i, 1) = 1;
    A(i, 2) = r[i];
    b(i) = g[i];
  }
  Eigen::Vector3d scale = A.colwise().norm().transpose();
  Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Fit f;
  f.condition = sv(0) / sv(2);
  if (!(f.condition <= 1e10))
    throw Error(ErrorKind::FitFailure, fmt::format("design matrix condition {:.3g} exceeds 1e10", f.condition));
  Eigen::Vector3d xs = svd.solve(b);
  f.coef = xs.cwiseQuotient(scale);
  f.residual = (A * f.coef - b).norm() / b.norm();
  return f;
}

void collect(const Field& G, const Point& pole, double lo, double hi, std::vector<double>& r,
             std::vector<double>& g) {
  const auto& d = G.disc();
  r.clear();
  g.clear();
  for (Eigen::Index i = 0; i < d.num_nodes(); ++i) {
    double dist = geodesic_distance(d.model(), pole, d.node_point(i));
    if (dist >= lo && dist <= hi) {
      r.push_back(dist);
      g.push_back(G.nodal()(i));
    }
  }
}

}  // namespace

Field greens_function(const PaneitzOperator& P, const Point& pole, const GreenOptions& opt) {
  const auto& d = P.disc();
  require_axis_pole(d, pole);
  Eigen::VectorXd delta = d.basis_at(pole);
  if (opt.filtered) delta = delta.cwiseProduct(d.spectral_filter(opt.filter_strength, opt.filter_order));
  Field src = Field::from_coeffs(P.disc_ptr(), std::move(delta));
  return P.solve(src);
}

FitWindow default_window(const Discretization& disc) {
  double h = disc.grid_length();
  double inj = injectivity_radius(disc.model());
  return {std::max(4 * h, inj / 40), inj / 4 - h};
}

GreenExpansion fit_radial_samples(const std::vector<double>& r, const std::vector<double>& g, int n,
                                  double fit_tol) {
  if (r.size() != g.size()) throw Error(ErrorKind::InvalidArgument, "sample size mismatch");
  Fit f = least_squares(r, g, n);
  GreenExpansion e;
  e.leading_coeff = f.coef(0);
  e.alpha = f.coef(1);
  e.r_coeff = f.coef(2);
  e.fit_residual = f.residual;
  e.condition = f.condition;
  e.nodes_used = r.size();
  e.reliable = f.residual <= fit_tol;
  auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  e.window = {*lo, *hi};
  e.alpha_shifted = e.alpha;
  e.stable = true;
  return e;
}

GreenExpansion fit_expansion(const Field& G, const Point& pole, const FitWindow& window, double fit_tol) {
  const auto& d = G.disc();
  const int n = d.model().dim;
  const double h = d.grid_length();
  const double inj = injectivity_radius(d.model());
  if (window.r_min < 2 * h * (1 - 1e-12))
    throw Error(ErrorKind::Precondition,
                fmt::format("r_min = {:.6g} is below two grid lengths ({:.6g})", window.r_min, 2 * h));
  if (window.r_max > inj / 4 * (1 + 1e-12))
    throw Error(ErrorKind::Precondition,
                fmt::format("r_max = {:.6g} exceeds a quarter of the injectivity radius ({:.6g})", window.r_max, inj / 4));
  if (!(window.r_max > window.r_min)) throw Error(ErrorKind::Precondition, "empty fit window");
  require_axis_pole(d, pole);

  std::vector<double> r, g;
  collect(G, pole, window.r_min, window.r_max, r, g);
  GreenExpansion e = fit_radial_samples(r, g, n, fit_tol);
  e.pole = pole;
  e.window = window;

  collect(G, pole, window.r_min + h, std::min(window.r_max + h, inj / 4), r, g);
  Fit s = least_squares(r, g, n);
  e.alpha_shifted = s.coef(1);
  double floor = 1e-3 * std::abs(e.leading_coeff) * std::pow(window.r_min, 4 - n);
  double gap = std::abs(e.alpha - e.alpha_shifted);
  e.stable = gap <= 0.1 * std::abs(e.alpha) || (std::abs(e.alpha) <= floor && std::abs(e.alpha_shifted) <= floor);
  return e;
}

MassScan mass_scan(const PaneitzOperator& P, const std::vector<Point>& poles, const FitWindow& window,
                   const GreenOptions& opt) {
  if (poles.empty()) throw Error(ErrorKind::InvalidArgument, "mass scan needs at least one pole");
  MassScan out;
  double lo = INFINITY, hi = -INFINITY, scale = 0;
  for (const auto& p : poles) {
    Field G = greens_function(P, p, opt);
    GreenExpansion e = fit_expansion(G, p, window);
    lo = std::min(lo, e.alpha);
    hi = std::max(hi, e.alpha);
    out.noise = std::max(out.noise, std::abs(e.alpha - e.alpha_shifted));
    scale = std::max(scale, std::abs(e.leading_coeff));
    out.expansions.push_back(std::move(e));
  }
  out.alpha_spread = hi - lo;
  out.homogeneous = out.alpha_spread <= 2 * out.noise + 1e-12 * scale;
  return out;
}

std::vector<double> torus_green_axis(int n, double side, int K, const std::vector<double>& t) {
  if (n < 5) throw Error(ErrorKind::InvalidArgument, "torus oracle needs n >= 5");
  if (K < 8) throw Error(ErrorKind::InvalidArgument, "lattice cutoff too small");
  const std::size_t M = static_cast<std::size_t>(K) * K;
  // r_{n-1}(m): number of ways to write m as a sum of n-1 squares, m <= K^2
  std::vector<double> count(M + 1, 0.0);
  count[0] = 1;
  for (int d = 0; d < n - 1; ++d) {
    std::vector<double> next(M + 1, 0.0);
    for (std::size_t m = 0; m <= M; ++m) {
      if (count[m] == 0) continue;
      for (int j = 0; static_cast<std::size_t>(j) * j + m <= M; ++j)
        next[m + static_cast<std::size_t>(j) * j] += count[m] * (j == 0 ? 1 : 2);
    }
    count.swap(next);
  }
  std::vector<double> h(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k1 = 0; k1 <= K; ++k1) {
    double acc = 0;
    const std::size_t k1sq = static_cast<std::size_t>(k1) * k1;
    for (std::size_t m = 0; m + k1sq <= M; ++m) {
      if (count[m] == 0 || (k1 == 0 && m == 0)) continue;
      double q = static_cast<double>(m + k1sq);
      double sigma = std::exp(-36.0 * std::pow(std::sqrt(q) / K, 16));
      acc += count[m] * sigma / (q * q);
    }
    h[static_cast<std::size_t>(k1)] = acc;
  }
  const double w = 2 * std::numbers::pi / side;
  const double pref = 1.0 / (std::pow(side, n) * std::pow(w, 4));
  std::vector<double> out;
  out.reserve(t.size());
  for (double x : t) {
    double g = h[0];
    for (int k1 = 1; k1 <= K; ++k1) g += 2 * h[static_cast<std::size_t>(k1)] * std::cos(w * k1 * x);
    out.push_back(pref * g);
  }
  return out;
}

}  // namespace qcurv

#include "qcurv/bubbles.hpp"

#include "qcurv/conformal.hpp"
#include "qcurv/error.hpp"
#include "qcurv/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qcurv {

namespace {

template <class T>
T psi(const T& t) {
  using std::exp;
  if (t <= 0) return T(0);
  return exp(-1 / t);
}

// 1 at t >= 1, 0 at t <= 0
template <class T>
T step(const T& t) {
  T a = psi(t), b = psi(1 - t);
  return a / (a + b);
}

bool is_sphere(const ModelManifold& m) { return m.kind == ModelKind::RoundSphere; }

}  // namespace

const char* to_string(BubbleVariant v) {
  switch (v) {
    case BubbleVariant::Standard: return "standard";
    case BubbleVariant::Corrected: return "corrected";
    case BubbleVariant::Glued: return "glued";
  }
  return "unknown";
}

BubbleVariant bubble_variant_from_string(const std::string& s) {
  if (s == "standard") return BubbleVariant::Standard;
  if (s == "corrected") return BubbleVariant::Corrected;
  if (s == "glued") return BubbleVariant::Glued;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown bubble variant '{}'", s));
}

void BubbleSpec::validate(const ModelManifold& model) const {
  const double inj = injectivity_radius(model);
  if (!(eps > 0) || !std::isfinite(eps)) throw Error(ErrorKind::Precondition, "eps must be positive");
  if (chart == BubbleChart::Stereographic && !is_sphere(model))
    throw Error(ErrorKind::Precondition, "the stereographic chart needs the round sphere");
  if (variant == BubbleVariant::Glued) {
    if (!(inner_delta > eps))
      throw Error(ErrorKind::Precondition, fmt::format("glued bubble needs eps < inner_delta ({} vs {})", eps, inner_delta));
    if (2 * inner_delta > inj * (1 + 1e-12))
      throw Error(ErrorKind::Precondition,
                  fmt::format("2 inner_delta = {} exceeds the injectivity radius {}", 2 * inner_delta, inj));
    return;
  }
  if (std::isinf(delta)) {
    if (chart != BubbleChart::Stereographic)
      throw Error(ErrorKind::Precondition, "an infinite cutoff radius needs the stereographic chart");
    return;
  }
  if (!(delta > 0)) throw Error(ErrorKind::Precondition, "delta must be positive");
  if (eps > delta / 10 * (1 + 1e-12))
    throw Error(ErrorKind::Precondition, fmt::format("eps = {} exceeds delta/10 = {}", eps, delta / 10));
  if (delta > inj / 4 * (1 + 1e-12))
    throw Error(ErrorKind::Precondition, fmt::format("delta = {} exceeds inj/4 = {}", delta, inj / 4));
}

double cutoff(double r, double delta) {
  if (std::isinf(delta)) return 1.0;
  return step((2 * delta - r) / delta);
}

std::array<double, 4> cutoff_derivative_bounds(double delta) {
  using namespace boost::math::differentiation;
  std::array<double, 4> sup{};
  const int M = 4000;
  for (int i = 1; i < M; ++i) {
    auto t = make_fvar<double, 4>(static_cast<double>(i) / M);
    auto h = step(t);
    for (int k = 1; k <= 4; ++k) sup[k - 1] = std::max(sup[k - 1], std::abs(static_cast<double>(h.derivative(k))));
  }
  for (int k = 1; k <= 4; ++k) sup[k - 1] *= std::pow(delta, -k);
  return sup;
}

double bubble_constant(int n) { return n * (n - 4.0) * (n * n - 4.0); }

double bubble_profile(int n, double eps, double r, BubbleChart chart) {
  double base;
  if (chart == BubbleChart::Geodesic) {
    base = eps * eps + r * r;
  } else {
    double c = std::cos(r / 2), s = std::sin(r / 2);
    base = eps * eps * c * c + 4 * s * s;
  }
  return std::pow(base, -(n - 4.0) / 2);
}

Field standard_bubble(const DiscPtr& disc, const BubbleSpec& spec) {
  const auto& model = disc->model();
  spec.validate(model);
  const int n = model.dim;
  return Field::sample(disc, [&](const Point& x) {
    double r = geodesic_distance(model, spec.center, x);
    return cutoff(r, spec.delta) * bubble_profile(n, spec.eps, r, spec.chart);
  });
}

Field corrected_bubble(const PaneitzOperator& P, const BubbleSpec& spec) {
  const auto& model = P.disc().model();
  spec.validate(model);
  if (std::isinf(spec.delta)) throw Error(ErrorKind::Precondition, "corrected bubble needs a finite cutoff");
  const int n = model.dim;
  const double bn = bubble_constant(n), e4 = std::pow(spec.eps, 4);
  Field src = Field::sample(P.disc_ptr(), [&](const Point& x) {
    double r = geodesic_distance(model, spec.center, x);
    return cutoff(r, spec.delta) * bn * e4 * std::pow(spec.eps * spec.eps + r * r, -(n + 4.0) / 2);
  });
  return P.solve(src);
}

CorrectionReport correction_report(const PaneitzOperator& P, const BubbleSpec& spec, const Field& u_hat) {
  const auto& d = P.disc();
  const auto& model = d.model();
  const int n = model.dim;
  CorrectionReport rep;
  rep.profile = n > 8 ? fmt::format("(eps^2+r^2)^(-{}/2)", n - 8) : n == 8 ? "log(1/(eps^2+r^2))" : "1";
  Eigen::VectorXd ub = u_hat.projected().nodal();
  for (Eigen::Index i = 0; i < d.num_nodes(); ++i) {
    double r = geodesic_distance(model, spec.center, d.node_point(i));
    if (r > spec.delta) continue;
    double diff = std::abs(ub(i) - bubble_profile(n, spec.eps, r));
    double q = spec.eps * spec.eps + r * r;
    double shape = n > 8 ? std::pow(q, -(n - 8.0) / 2) : n == 8 ? std::max(std::log(1 / q), 1.0) : 1.0;
    rep.sup_diff = std::max(rep.sup_diff, diff);
    rep.constant = std::max(rep.constant, diff / shape);
  }
  rep.min_u = ub.minCoeff();
  if (rep.min_u > 0) {
    Field uh = u_hat.projected();
    Field R = conformal_R(uh);
    Field Q = conformal_Q(P, uh);
    rep.min_R = R.min_nodal();
    rep.min_Q = Q.min_nodal();
    // sign Q = sign P u; judge it against the scale of P u, since dividing by u^p
    // magnifies roundoff where u is small
    Field Pu = P.apply(uh);
    rep.admissible = rep.min_R > 0 && nonnegative_at_nodes(Pu.nodal(), Pu.max_abs());
  } else {
    rep.min_R = rep.min_Q = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

GluedBubble glued_bubble(const PaneitzOperator& P, const BubbleSpec& spec, const Field& G,
                         const GreenExpansion& expansion) {
  const auto& model = P.disc().model();
  spec.validate(model);
  if (G.disc_ptr() != P.disc_ptr())
    throw Error(ErrorKind::DiscretizationMismatch, "Green's function and operator use different discretizations");
  if (!(expansion.leading_coeff > 0))
    throw Error(ErrorKind::Precondition, "fitted leading coefficient must be positive");
  const int n = model.dim;
  GluedBubble out;
  out.beta = expansion.alpha / expansion.leading_coeff;
  const double cn_alt = 1.0 / ((n - 2.0) * (n - 4.0) * sphere_area(n - 1));
  out.beta_alt = expansion.alpha / cn_alt;
  if (out.beta <= 0 && !is_sphere(model))
    out.warnings.push_back(fmt::format("beta = {:.6g} is not positive on a model not conformal to the sphere", out.beta));
  if (!expansion.reliable)
    out.warnings.push_back(fmt::format("Green fit residual {:.3g} above tolerance", expansion.fit_residual));
  if (!expansion.stable) out.warnings.push_back("Green fit constant term unstable under window shift");

  const auto& d = P.disc();
  Eigen::VectorXd v(d.num_nodes());
  const double lead = expansion.leading_coeff;
  for (Eigen::Index i = 0; i < d.num_nodes(); ++i) {
    double r = geodesic_distance(model, spec.center, d.node_point(i));
    double chi = cutoff(r, spec.inner_delta);
    double inner = chi > 0 ? bubble_profile(n, spec.eps, r, spec.chart) + out.beta : 0.0;
    v(i) = chi * inner + (1 - chi) * G.nodal()(i) / lead;
  }
  out.u = Field::from_nodal(P.disc_ptr(), std::move(v));
  return out;
}

SnReport euclidean_Sn_report(int n, int quad_points, double lambda) {
  if (n < 5) throw Error(ErrorKind::InvalidArgument, "S_n needs n >= 5");
  if (quad_points < 16) throw Error(ErrorKind::InvalidArgument, "too few quadrature points");
  if (!(lambda > 0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  const double area = sphere_area(n - 1);
  const double p = 2.0 * n / (n - 4);
  auto U = [n, lambda](auto r) {
    using std::pow;
    return pow(1 + lambda * lambda * r * r, -(n - 4.0) / 2);
  };
  auto eval = [&](int M) {
    GaussRule g = gauss_legendre(M, 0.0, 1.0);
    double num = 0, den = 0;
    for (Eigen::Index i = 0; i < g.x.size(); ++i) {
      double x = g.x[i];
      double r = x / (1 - x);
      double jac = 1 / ((1 - x) * (1 - x));
      double lap = radial_laplacian(U, n, r);
      double rn = std::pow(r, n - 1);
      num += g.w[i] * lap * lap * rn * jac;
      den += g.w[i] * std::pow(U(r), p) * rn * jac;
    }
    return area * num / std::pow(area * den, (n - 4.0) / n);
  };
  SnReport rep;
  rep.quad_points = quad_points;
  rep.value = eval(quad_points);
  rep.refined = eval(2 * quad_points);
  rep.relative_change = std::abs(rep.refined - rep.value) / std::abs(rep.refined);
  if (!(rep.relative_change <= 1e-8))
    throw Error(ErrorKind::NoConvergence,
                fmt::format("radial quadrature changed by {:.3g} under doubling", rep.relative_change));
  return rep;
}

double euclidean_Sn(int n, int quad_points) { return euclidean_Sn_report(n, quad_points).refined; }

double sobolev_constant_closed_form(int n) {
  return n * (n - 4.0) * (n * n - 4.0) / 16 * std::pow(sphere_area(n), 4.0 / n);
}

DeficitReport deficit_scan(const PaneitzOperator& P, const BubbleSpec& base, const std::vector<double>& eps_list,
                           const GreenData* green) {
  if (eps_list.empty()) throw Error(ErrorKind::InvalidArgument, "empty eps list");
  const int n = P.dim();
  DeficitReport rep;
  rep.variant = base.variant;
  rep.Sn = euclidean_Sn(n);
  if (base.variant == BubbleVariant::Glued && !green)
    throw Error(ErrorKind::Precondition, "glued bubbles need Green data");
  for (double eps : eps_list) {
    BubbleSpec spec = base;
    spec.eps = eps;
    Field u;
    switch (base.variant) {
      case BubbleVariant::Standard: u = standard_bubble(P.disc_ptr(), spec); break;
      case BubbleVariant::Corrected: u = corrected_bubble(P, spec); break;
      case BubbleVariant::Glued: {
        GluedBubble gb = glued_bubble(P, spec, green->G, green->expansion);
        for (auto& w : gb.warnings)
          if (std::find(rep.warnings.begin(), rep.warnings.end(), w) == rep.warnings.end()) rep.warnings.push_back(w);
        u = gb.u;
        break;
      }
    }
    QuotientReport q = quotient(P, u.projected());
    rep.rows.push_back({eps, q.quotient, rep.Sn - q.quotient});
  }
  std::vector<double> lx, ly;
  for (const auto& r : rep.rows)
    if (r.deficit > 0) {
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(r.deficit));
    }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.fit_exponent = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace qcurv

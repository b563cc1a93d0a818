#pragma once

#include "qcurv/green.hpp"
#include "qcurv/paneitz.hpp"
#include "qcurv/spectral.hpp"

#include <boost/math/differentiation/autodiff.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace qcurv {

enum class BubbleVariant { Standard, Corrected, Glued };

const char* to_string(BubbleVariant v);
BubbleVariant bubble_variant_from_string(const std::string& s);

/// How the distance to the center enters the profile.
///   Geodesic:      (eps^2 + r^2)^{-(n-4)/2}
///   Stereographic: (eps^2 cos^2(r/2) + 4 sin^2(r/2))^{-(n-4)/2}, the Euclidean
///                  bubble carried to the round sphere by stereographic projection.
enum class BubbleChart { Geodesic, Stereographic };

struct BubbleSpec {
  double eps = 0.1;
  Point center;
  /// Outer cutoff radius: eta = 1 on r <= delta, 0 on r >= 2 delta.  Infinity disables it
  /// (stereographic chart on the sphere only).
  double delta = 0.5;
  /// Inner gluing radius (Glued only).
  double inner_delta = 0.75;
  BubbleVariant variant = BubbleVariant::Standard;
  BubbleChart chart = BubbleChart::Geodesic;

  /// Throws Precondition on scale violations for `model`.
  void validate(const ModelManifold& model) const;
};

/// Smooth cutoff: 1 for r <= delta, 0 for r >= 2 delta, built from exp(-1/t).
double cutoff(double r, double delta);

/// sup |d^k eta / dr^k| for k = 1..4; each scales as delta^{-k}.
std::array<double, 4> cutoff_derivative_bounds(double delta);

/// n(n-4)(n^2-4)
double bubble_constant(int n);

double bubble_profile(int n, double eps, double r, BubbleChart chart = BubbleChart::Geodesic);

Field standard_bubble(const DiscPtr& disc, const BubbleSpec& spec);

struct CorrectionReport {
  double sup_diff = 0;      // sup |u_hat - u_eps| over r <= delta
  double constant = 0;      // fitted C in the bound
  std::string profile;      // shape of the bound
  double min_u = 0;
  double min_R = 0;
  double min_Q = 0;
  bool admissible = false;  // u_hat > 0, R > 0, Q >= 0 (relative tolerance)
};

/// u_hat = P^{-1}(eta b_n eps^4 (eps^2 + r^2)^{-(n+4)/2}).
Field corrected_bubble(const PaneitzOperator& P, const BubbleSpec& spec);
CorrectionReport correction_report(const PaneitzOperator& P, const BubbleSpec& spec, const Field& u_hat);

struct GluedBubble {
  Field u;
  double beta = 0;        // alpha / leading_coeff
  double beta_alt = 0;    // alpha / c_n with c_n = 1/((n-2)(n-4)|S^{n-1}|)
  std::vector<std::string> warnings;
};

/// chi (u_eps + beta) + (1 - chi) G / leading_coeff with chi the cutoff at inner_delta.
GluedBubble glued_bubble(const PaneitzOperator& P, const BubbleSpec& spec, const Field& G,
                         const GreenExpansion& expansion);

/// Radial Delta^2 of f in R^n at r > 0; f is called with a 4th-order autodiff variable.
template <class F>
double radial_bilaplacian(F&& f, int n, double r) {
  using namespace boost::math::differentiation;
  auto y = f(make_fvar<double, 4>(r));
  const double d1 = y.derivative(1), d2 = y.derivative(2), d3 = y.derivative(3), d4 = y.derivative(4);
  const double a = n - 1, b = (n - 1.0) * (n - 3.0);
  return d4 + 2 * a * d3 / r + b * d2 / (r * r) - b * d1 / (r * r * r);
}

template <class F>
double radial_laplacian(F&& f, int n, double r) {
  using namespace boost::math::differentiation;
  auto y = f(make_fvar<double, 2>(r));
  return y.derivative(2) + (n - 1) * y.derivative(1) / r;
}

struct SnReport {
  double value = 0;
  double refined = 0;         // with doubled quadrature
  double relative_change = 0;
  int quad_points = 0;
};

/// Euclidean Paneitz-Sobolev quotient of U(x) = (1 + lambda^2 |x|^2)^{-(n-4)/2}.
SnReport euclidean_Sn_report(int n, int quad_points = 200, double lambda = 1.0);
double euclidean_Sn(int n, int quad_points = 200);
/// n(n-4)(n^2-4)/16 |S^n|^{4/n}
double sobolev_constant_closed_form(int n);

struct DeficitRow {
  double eps = 0;
  double quotient = 0;
  double deficit = 0;
};

struct DeficitReport {
  BubbleVariant variant = BubbleVariant::Standard;
  double Sn = 0;
  std::vector<DeficitRow> rows;
  /// slope of log deficit vs log eps; NaN if fewer than two positive deficits
  double fit_exponent = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

/// Green data for the Glued variant.
struct GreenData {
  Field G;
  GreenExpansion expansion;
};

DeficitReport deficit_scan(const PaneitzOperator& P, const BubbleSpec& base, const std::vector<double>& eps_list,
                           const GreenData* green = nullptr);

}  // namespace qcurv

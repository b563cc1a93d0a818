#pragma once

#include "qcurv/paneitz.hpp"
#include "qcurv/spectral.hpp"

#include <vector>

namespace qcurv {

struct GreenOptions {
  /// Damp the truncated eigen-expansion by exp(-strength (k/K)^order) per axis.
  /// Off by default so the reproducing property holds exactly.
  bool filtered = false;
  double filter_strength = 36.0;
  int filter_order = 16;
};

/// Solution of P G = band-limited delta at `pole`.
Field greens_function(const PaneitzOperator& P, const Point& pole, const GreenOptions& opt = {});

struct FitWindow {
  double r_min = 0;
  double r_max = 0;
};

struct GreenExpansion {
  Point pole;
  double leading_coeff = 0;  // coefficient of r^{4-n}
  double alpha = 0;          // constant term
  double r_coeff = 0;        // coefficient of r
  FitWindow window;
  double fit_residual = 0;   // relative RMS misfit of the three-term model
  double condition = 0;      // of the column-scaled design matrix
  std::size_t nodes_used = 0;
  bool reliable = false;     // fit_residual <= declared tolerance

  // window shifted outward by one grid length
  double alpha_shifted = 0;
  bool stable = false;       // |alpha - alpha_shifted| <= 10% |alpha|, or both below the noise floor
};

/// Default window: r_min = max(4 h, inj/40), r_max = inj/4 - h with h the grid length.
FitWindow default_window(const Discretization& disc);

/// Least-squares fit of G against {r^{4-n}, 1, r} over nodes with r in the window.
GreenExpansion fit_expansion(const Field& G, const Point& pole, const FitWindow& window,
                             double fit_tol = 1e-2);

/// Same fit over explicit samples (r_i, g_i); no window checks.
GreenExpansion fit_radial_samples(const std::vector<double>& r, const std::vector<double>& g, int n,
                                  double fit_tol = 1e-2);

struct MassScan {
  std::vector<GreenExpansion> expansions;
  double alpha_spread = 0;  // max - min alpha over poles
  double noise = 0;         // max |alpha - alpha_shifted| over poles
  bool homogeneous = false; // spread <= 2 noise (+ roundoff floor)
};

MassScan mass_scan(const PaneitzOperator& P, const std::vector<Point>& poles, const FitWindow& window,
                   const GreenOptions& opt = {.filtered = true});

/// Mean-zero Green's function of Delta^2 on the cubic torus (R / side Z)^n evaluated
/// along a coordinate axis at distances `t`, from the lattice sum truncated at |k| <= K
/// with a spherical exp(-36 (|k|/K)^16) filter.
std::vector<double> torus_green_axis(int n, double side, int K, const std::vector<double>& t);

}  // namespace qcurv

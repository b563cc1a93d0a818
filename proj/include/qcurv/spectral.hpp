#pragma once

#include "qcurv/models.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace qcurv {

enum class Symmetry { CircleOnly, ZonalOnly, CircleZonal2D, FullTorusFourier };

const char* to_string(Symmetry s);
Symmetry symmetry_from_string(const std::string& s);

/// One tensor factor of a discretization.
struct Axis {
  enum class Kind { Fourier, Zonal };

  Kind kind = Kind::Fourier;
  int modes = 0;
  int nodes = 0;
  double length = 0;      // Fourier period
  int sphere_dim = 0;     // Zonal: dimension m of the sphere S^m carrying the polar angle
  double schouten = 0;    // Schouten eigenvalue on the directions this axis spans

  Eigen::VectorXd coord;   // node coordinate (s, or polar angle theta)
  Eigen::VectorXd weight;  // quadrature weight per node (zonal: includes |S^{m-1}|)
  Eigen::MatrixXd basis;   // nodes x modes, orthonormal under `weight`
  Eigen::MatrixXd dbasis;  // d/ds or d/dtheta of the basis at the nodes
  Eigen::VectorXd mu;      // eigenvalue of -Laplacian per mode
  Eigen::VectorXi degree;  // frequency (Fourier) or polynomial degree (zonal)

  Eigen::RowVectorXd eval(double c) const;
};

class Discretization;
using DiscPtr = std::shared_ptr<const Discretization>;

/// `mode_count` real modes per axis; `circle_modes` (if > 0) overrides the count on
/// the circle axis of CircleZonal2D.
DiscPtr build_discretization(const ModelManifold& model, Symmetry symmetry, int mode_count,
                             int circle_modes = 0);

/// Immutable tensor-product spectral discretization of a model manifold.
///
/// Coefficients and nodal values are stored row-major with the first axis
/// outermost.  Directions not carried by any axis contribute the constant
/// `measure_factor` to the volume form.
class Discretization {
 public:
  const ModelManifold& model() const { return model_; }
  Symmetry symmetry() const { return symmetry_; }
  int mode_count() const { return mode_count_; }
  const std::vector<Axis>& axes() const { return axes_; }
  double measure_factor() const { return measure_factor_; }

  Eigen::Index num_modes() const { return num_modes_; }
  Eigen::Index num_nodes() const { return num_nodes_; }

  /// Full nodal quadrature weights (volume density included).
  const Eigen::VectorXd& weights() const { return weights_; }
  /// -Laplacian eigenvalue per coefficient.
  const Eigen::VectorXd& neg_laplacian() const { return neg_lap_; }
  /// Contribution of axis `a` to the -Laplacian eigenvalue per coefficient.
  Eigen::VectorXd axis_mu(std::size_t a) const;
  /// Product of per-axis exp(-strength (k/K)^order) factors.
  Eigen::VectorXd spectral_filter(double strength = 36.0, int order = 16) const;

  Eigen::VectorXd forward(const Eigen::VectorXd& nodal) const;
  Eigen::VectorXd backward(const Eigen::VectorXd& coeffs) const;
  /// Nodal values of the derivative along axis `a` (arc length).
  Eigen::VectorXd backward_derivative(const Eigen::VectorXd& coeffs, std::size_t a) const;

  /// Coordinates of `p` along each axis.
  std::vector<double> axis_coordinates(const Point& p) const;
  /// Basis functions evaluated at `p`; also the coefficients of the band-limited delta at `p`.
  Eigen::VectorXd basis_at(const Point& p) const;

  Point node_point(Eigen::Index i) const;
  double node_coordinate(Eigen::Index i, std::size_t a) const;
  /// Largest node spacing over all axes.
  double grid_length() const;

  friend DiscPtr build_discretization(const ModelManifold&, Symmetry, int, int);

 private:
  Discretization() = default;

  Eigen::VectorXd apply_axes(const Eigen::VectorXd& in, bool to_nodes, int deriv_axis) const;

  ModelManifold model_;
  Symmetry symmetry_ = Symmetry::ZonalOnly;
  int mode_count_ = 0;
  std::vector<Axis> axes_;
  double measure_factor_ = 1;
  Eigen::Index num_modes_ = 0;
  Eigen::Index num_nodes_ = 0;
  Eigen::VectorXd weights_;
  Eigen::VectorXd neg_lap_;
};

/// Scalar field: coefficients plus the nodal values it was built from.
///
/// Fields built from coefficients are band-limited and consistent.  Fields built
/// from nodal samples keep the samples and carry their projection as coefficients.
class Field {
 public:
  Field() = default;

  static Field from_coeffs(DiscPtr disc, Eigen::VectorXd coeffs);
  static Field from_nodal(DiscPtr disc, Eigen::VectorXd nodal);
  static Field constant(DiscPtr disc, double c);
  static Field sample(DiscPtr disc, const std::function<double(const Point&)>& f);

  const Discretization& disc() const { return *disc_; }
  const DiscPtr& disc_ptr() const { return disc_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  const Eigen::VectorXd& nodal() const { return nodal_; }

  Field projected() const;
  /// Max nodal gap between the stored values and the synthesized coefficients, relative.
  double consistency_error() const;
  double value_at(const Point& p) const;
  double min_nodal() const { return nodal_.minCoeff(); }
  double max_nodal() const { return nodal_.maxCoeff(); }
  double max_abs() const { return nodal_.cwiseAbs().maxCoeff(); }

  Field operator+(const Field& o) const;
  Field operator-(const Field& o) const;
  Field operator*(double s) const;

 private:
  DiscPtr disc_;
  Eigen::VectorXd coeffs_;
  Eigen::VectorXd nodal_;
};

void require_same_disc(const Field& a, const Field& b);

double integrate(const Field& f);
/// Sum of coefficient products; equals the L2 inner product of the band-limited parts.
double coeff_inner(const Field& f, const Field& g);
Field laplacian(const Field& f);

using ScalarMap = std::function<double(double)>;

namespace maps {
ScalarMap signed_power(double p);
ScalarMap power(double p);
ScalarMap square();
}  // namespace maps

/// Applies `map` at the nodes, then re-expands.
Field pointwise(const Field& f, const ScalarMap& map);
/// Nodal product f * g.
Field multiply(const Field& f, const Field& g);
/// |grad f|^2 at the nodes from spectral derivatives of the band-limited part.
Field gradient_squared(const Field& f);

}  // namespace qcurv

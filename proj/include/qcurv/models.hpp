#pragma once

#include <boost/rational.hpp>

#include <string>
#include <vector>

namespace qcurv {

using Rational = boost::rational<long long>;

enum class ModelKind { RoundSphere, FlatTorus, CircleCrossSphere };

const char* to_string(ModelKind kind);

/// Closed homogeneous model manifold.
///
/// RoundSphere: unit S^n.  FlatTorus: R^n / (side_1 Z x ... x side_n Z).
/// CircleCrossSphere: S^1(L) x S^{n-1} with unit sphere factor.
struct ModelManifold {
  ModelKind kind = ModelKind::RoundSphere;
  int dim = 5;
  /// Torus side lengths (dim entries) or {L} for the product; empty for the sphere.
  std::vector<double> sizes;

  static ModelManifold round_sphere(int n);
  static ModelManifold flat_torus(int n, double side);
  static ModelManifold flat_torus(std::vector<double> sides);
  static ModelManifold circle_cross_sphere(int n, double circle_length);

  /// Throws InvalidModel when the parameters do not describe a supported model.
  void validate() const;

  double circle_length() const;
  /// Dimension of the sphere factor (n for S^n, n-1 for the product, 0 for the torus).
  int sphere_dim() const;
  std::string describe() const;
};

/// A point on a model.
///
/// RoundSphere: {theta} (polar angle on a fixed meridian) or a unit vector in R^{n+1}.
/// CircleCrossSphere: {s, theta} or {s, unit vector in R^n}.
/// FlatTorus: n coordinates.
struct Point {
  std::vector<double> coords;
};

struct CurvatureBundle {
  std::vector<double> schouten_eigenvalues;
  std::vector<double> ricci_eigenvalues;
  double sigma1 = 0;
  double sigma2 = 0;
  double scalar = 0;
  double q_curv = 0;

  Rational sigma1_exact;
  Rational sigma2_exact;
  Rational scalar_exact;
  Rational q_exact;
};

struct Admissibility {
  bool admissible = false;
  std::string explanation;
};

/// Volume of the unit k-sphere, 2 pi^{(k+1)/2} / Gamma((k+1)/2).
double sphere_area(int k);

double volume(const ModelManifold& model);
double injectivity_radius(const ModelManifold& model);

CurvatureBundle curvature_data(const ModelManifold& model);

/// Q semi-positive and R >= 0 for the homogeneous model metric.
Admissibility is_positivity_admissible(const ModelManifold& model);

/// Polar angle of the sphere part of a point stored from `offset` on ({theta} or a unit vector).
double polar_angle(const std::vector<double>& coords, std::size_t offset);

double geodesic_distance(const ModelManifold& model, const Point& p, const Point& x);

}  // namespace qcurv

#include "qcurv/models.hpp"

#include "qcurv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qcurv {

namespace {

constexpr int kMaxDim = 64;

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// Angle between two sphere points; both polar-only points sit on one meridian.
double sphere_angle(const std::vector<double>& a, const std::vector<double>& b, std::size_t offset) {
  std::size_t na = a.size() - offset, nb = b.size() - offset;
  if (na == 1 || nb == 1) {
    if (na != nb)
      throw Error(ErrorKind::InvalidArgument, "sphere points must use the same representation");
    return std::abs(a[offset] - b[offset]);
  }
  if (na != nb) throw Error(ErrorKind::InvalidArgument, "sphere point dimension mismatch");
  double dot = 0, aa = 0, bb = 0;
  for (std::size_t i = offset; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  // atan2 form stays accurate for nearly equal and nearly antipodal points
  double cross2 = std::max(0.0, aa * bb - dot * dot);
  return std::atan2(std::sqrt(cross2), dot);
}

double circle_gap(double a, double b, double L) {
  double d = std::fmod(std::abs(a - b), L);
  return std::min(d, L - d);
}

}  // namespace

double polar_angle(const std::vector<double>& c, std::size_t offset) {
  if (c.size() <= offset) throw Error(ErrorKind::InvalidArgument, "point has no sphere coordinate");
  if (c.size() == offset + 1) return c[offset];
  double x0 = c[offset];
  double norm2 = 0;
  for (std::size_t i = offset; i < c.size(); ++i) norm2 += c[i] * c[i];
  return std::acos(std::clamp(x0 / std::sqrt(norm2), -1.0, 1.0));
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::RoundSphere: return "sphere";
    case ModelKind::FlatTorus: return "torus";
    case ModelKind::CircleCrossSphere: return "product";
  }
  return "unknown";
}

ModelManifold ModelManifold::round_sphere(int n) {
  ModelManifold m{ModelKind::RoundSphere, n, {}};
  m.validate();
  return m;
}

ModelManifold ModelManifold::flat_torus(int n, double side) {
  if (n < 1 || n > kMaxDim) throw Error(ErrorKind::InvalidModel, fmt::format("unsupported dimension {}", n));
  return flat_torus(std::vector<double>(static_cast<std::size_t>(n), side));
}

ModelManifold ModelManifold::flat_torus(std::vector<double> sides) {
  ModelManifold m{ModelKind::FlatTorus, static_cast<int>(sides.size()), std::move(sides)};
  m.validate();
  return m;
}

ModelManifold ModelManifold::circle_cross_sphere(int n, double circle_length) {
  ModelManifold m{ModelKind::CircleCrossSphere, n, {circle_length}};
  m.validate();
  return m;
}

void ModelManifold::validate() const {
  if (dim < 5 || dim > kMaxDim)
    throw Error(ErrorKind::InvalidModel, fmt::format("dimension must satisfy 5 <= n <= {}, got {}", kMaxDim, dim));
  auto positive = [](double v) { return std::isfinite(v) && v > 0; };
  switch (kind) {
    case ModelKind::RoundSphere:
      if (!sizes.empty()) throw Error(ErrorKind::InvalidModel, "round sphere has fixed unit radius");
      break;
    case ModelKind::FlatTorus:
      if (static_cast<int>(sizes.size()) != dim)
        throw Error(ErrorKind::InvalidModel, "torus needs one side length per dimension");
      for (double s : sizes)
        if (!positive(s)) throw Error(ErrorKind::InvalidModel, "torus side lengths must be positive");
      break;
    case ModelKind::CircleCrossSphere:
      if (sizes.size() != 1 || !positive(sizes[0]))
        throw Error(ErrorKind::InvalidModel, "product needs one positive circle length");
      break;
  }
}

double ModelManifold::circle_length() const {
  if (kind != ModelKind::CircleCrossSphere) throw Error(ErrorKind::Unsupported, "model has no circle factor");
  return sizes[0];
}

int ModelManifold::sphere_dim() const {
  switch (kind) {
    case ModelKind::RoundSphere: return dim;
    case ModelKind::CircleCrossSphere: return dim - 1;
    case ModelKind::FlatTorus: return 0;
  }
  return 0;
}

std::string ModelManifold::describe() const {
  switch (kind) {
    case ModelKind::RoundSphere: return fmt::format("S^{}", dim);
    case ModelKind::CircleCrossSphere: return fmt::format("S^1({:.17g})xS^{}", sizes[0], dim - 1);
    case ModelKind::FlatTorus: {
      bool cubic = std::all_of(sizes.begin(), sizes.end(), [&](double s) { return s == sizes[0]; });
      if (cubic) return fmt::format("T^{}({:.17g})", dim, sizes[0]);
      std::string out = fmt::format("T^{}(", dim);
      for (std::size_t i = 0; i < sizes.size(); ++i) out += fmt::format("{}{:.17g}", i ? "," : "", sizes[i]);
      return out + ")";
    }
  }
  return "?";
}

double sphere_area(int k) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double volume(const ModelManifold& model) {
  model.validate();
  switch (model.kind) {
    case ModelKind::RoundSphere: return sphere_area(model.dim);
    case ModelKind::CircleCrossSphere: return model.sizes[0] * sphere_area(model.dim - 1);
    case ModelKind::FlatTorus: {
      double v = 1;
      for (double s : model.sizes) v *= s;
      return v;
    }
  }
  return 0;
}

double injectivity_radius(const ModelManifold& model) {
  model.validate();
  switch (model.kind) {
    case ModelKind::RoundSphere: return std::numbers::pi;
    case ModelKind::CircleCrossSphere: return std::min(0.5 * model.sizes[0], std::numbers::pi);
    case ModelKind::FlatTorus: return 0.5 * *std::min_element(model.sizes.begin(), model.sizes.end());
  }
  return 0;
}

CurvatureBundle curvature_data(const ModelManifold& model) {
  model.validate();
  const int n = model.dim;
  std::vector<Rational> ricci(static_cast<std::size_t>(n), Rational(0));
  switch (model.kind) {
    case ModelKind::RoundSphere:
      std::fill(ricci.begin(), ricci.end(), Rational(n - 1));
      break;
    case ModelKind::CircleCrossSphere:
      // circle direction is flat; the unit S^{n-1} factor has Ric = (n-2) g
      for (int i = 1; i < n; ++i) ricci[static_cast<std::size_t>(i)] = Rational(n - 2);
      break;
    case ModelKind::FlatTorus:
      break;
  }
  Rational scalar(0);
  for (const auto& r : ricci) scalar += r;

  CurvatureBundle out;
  Rational s1(0), sq(0);
  for (const auto& r : ricci) {
    Rational a = (r - scalar / Rational(2 * (n - 1))) / Rational(n - 2);
    out.schouten_eigenvalues.push_back(to_double(a));
    out.ricci_eigenvalues.push_back(to_double(r));
    s1 += a;
    sq += a * a;
  }
  Rational s2 = (s1 * s1 - sq) / Rational(2);
  Rational q = Rational(4) * s2 + Rational(n - 4, 2) * s1 * s1;

  out.sigma1_exact = s1;
  out.sigma2_exact = s2;
  out.scalar_exact = scalar;
  out.q_exact = q;
  out.sigma1 = to_double(s1);
  out.sigma2 = to_double(s2);
  out.scalar = to_double(scalar);
  out.q_curv = to_double(q);
  return out;
}

Admissibility is_positivity_admissible(const ModelManifold& model) {
  try {
    model.validate();
  } catch (const Error& e) {
    return {false, e.what()};
  }
  auto c = curvature_data(model);
  if (c.q_exact < Rational(0)) return {false, "Q < 0 somewhere"};
  if (c.q_exact == Rational(0)) return {false, "Q ≡ 0 is not semi-positive"};
  if (c.scalar_exact < Rational(0)) return {false, "R < 0 somewhere"};
  return {true, "Q > 0 and R >= 0"};
}

double geodesic_distance(const ModelManifold& model, const Point& p, const Point& x) {
  const auto& a = p.coords;
  const auto& b = x.coords;
  switch (model.kind) {
    case ModelKind::RoundSphere: {
      if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidArgument, "empty sphere point");
      return sphere_angle(a, b, 0);
    }
    case ModelKind::CircleCrossSphere: {
      if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::InvalidArgument, "product point needs (s, theta)");
      double ds = circle_gap(a[0], b[0], model.sizes[0]);
      double dt = sphere_angle(a, b, 1);
      return std::hypot(ds, dt);
    }
    case ModelKind::FlatTorus: {
      if (a.size() != model.sizes.size() || b.size() != model.sizes.size())
        throw Error(ErrorKind::InvalidArgument, "torus point needs one coordinate per side");
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = circle_gap(a[i], b[i], model.sizes[i]);
        s += d * d;
      }
      return std::sqrt(s);
    }
  }
  return 0;
}

}  // namespace qcurv

#include "qcurv/spectral.hpp"

#include "qcurv/error.hpp"
#include "qcurv/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qcurv {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Axis fourier_axis(int N, double L, double schouten) {
  Axis ax;
  ax.kind = Axis::Kind::Fourier;
  ax.modes = N;
  ax.nodes = 2 * N;
  ax.length = L;
  ax.schouten = schouten;
  const int M = ax.nodes;
  ax.coord.resize(M);
  ax.weight = Eigen::VectorXd::Constant(M, L / M);
  for (int i = 0; i < M; ++i) ax.coord(i) = L * i / M;
  ax.basis.resize(M, N);
  ax.dbasis.resize(M, N);
  ax.mu.resize(N);
  ax.degree.resize(N);
  for (int j = 0; j < N; ++j) {
    int k = (j + 1) / 2;
    ax.degree(j) = k;
    double w = kTwoPi * k / L;
    ax.mu(j) = w * w;
  }
  for (int i = 0; i < M; ++i) {
    Eigen::RowVectorXd row = ax.eval(ax.coord(i));
    ax.basis.row(i) = row;
    for (int j = 0; j < N; ++j) {
      int k = ax.degree(j);
      double w = kTwoPi * k / L;
      double amp = std::sqrt(2.0 / L);
      double s = ax.coord(i);
      if (j == 0)
        ax.dbasis(i, j) = 0;
      else if (j % 2 == 1)
        ax.dbasis(i, j) = -amp * w * std::sin(w * s);
      else
        ax.dbasis(i, j) = amp * w * std::cos(w * s);
    }
  }
  return ax;
}

Axis zonal_axis(int N, int m, double schouten) {
  Axis ax;
  ax.kind = Axis::Kind::Zonal;
  ax.modes = N;
  ax.nodes = 2 * N;
  ax.sphere_dim = m;
  ax.schouten = schouten;
  const double a = 0.5 * (m - 2);
  const double shell = sphere_area(m - 1);
  GaussRule rule = gauss_jacobi(ax.nodes, a);
  ax.coord = rule.x.array().acos();
  ax.weight = shell * rule.w;
  Eigen::MatrixXd dP;
  Eigen::MatrixXd P = orthonormal_jacobi(rule.x, N, a, &dP);
  const double scale = 1.0 / std::sqrt(shell);
  ax.basis = scale * P;
  Eigen::VectorXd sin_t = ax.coord.array().sin();
  ax.dbasis = -scale * (sin_t.asDiagonal() * dP);
  ax.mu.resize(N);
  ax.degree.resize(N);
  for (int k = 0; k < N; ++k) {
    ax.degree(k) = k;
    ax.mu(k) = static_cast<double>(k) * (k + m - 1);
  }
  return ax;
}

// Apply `A` along axis `ax` of a row-major tensor with extents `dims`.
Eigen::VectorXd apply_along(const Eigen::VectorXd& in, std::vector<Eigen::Index>& dims, std::size_t ax,
                            const Eigen::MatrixXd& A) {
  Eigen::Index pre = 1, post = 1;
  for (std::size_t i = 0; i < ax; ++i) pre *= dims[i];
  for (std::size_t i = ax + 1; i < dims.size(); ++i) post *= dims[i];
  const Eigen::Index len = dims[ax], rows = A.rows();
  Eigen::VectorXd out(pre * rows * post);
  if (post == 1) {
    Eigen::Map<const RowMat> X(in.data(), pre, len);
    Eigen::Map<RowMat> Y(out.data(), pre, rows);
    Y.noalias() = X * A.transpose();
  } else {
    for (Eigen::Index p = 0; p < pre; ++p) {
      Eigen::Map<const RowMat> X(in.data() + p * len * post, len, post);
      Eigen::Map<RowMat> Y(out.data() + p * rows * post, rows, post);
      Y.noalias() = A * X;
    }
  }
  dims[ax] = rows;
  return out;
}

}  // namespace

const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::CircleOnly: return "circle";
    case Symmetry::ZonalOnly: return "zonal";
    case Symmetry::CircleZonal2D: return "circle_zonal";
    case Symmetry::FullTorusFourier: return "torus";
  }
  return "unknown";
}

Symmetry symmetry_from_string(const std::string& s) {
  if (s == "circle" || s == "CircleOnly") return Symmetry::CircleOnly;
  if (s == "zonal" || s == "ZonalOnly") return Symmetry::ZonalOnly;
  if (s == "circle_zonal" || s == "CircleZonal2D") return Symmetry::CircleZonal2D;
  if (s == "torus" || s == "FullTorusFourier") return Symmetry::FullTorusFourier;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown symmetry '{}'", s));
}

Eigen::RowVectorXd Axis::eval(double c) const {
  Eigen::RowVectorXd row(modes);
  if (kind == Kind::Fourier) {
    double amp = std::sqrt(2.0 / length);
    row(0) = 1.0 / std::sqrt(length);
    for (int j = 1; j < modes; ++j) {
      double w = kTwoPi * degree(j) / length;
      row(j) = (j % 2 == 1) ? amp * std::cos(w * c) : amp * std::sin(w * c);
    }
  } else {
    Eigen::VectorXd x(1);
    x(0) = std::cos(c);
    Eigen::MatrixXd P = orthonormal_jacobi(x, modes, 0.5 * (sphere_dim - 2));
    row = P.row(0) / std::sqrt(sphere_area(sphere_dim - 1));
  }
  return row;
}

DiscPtr build_discretization(const ModelManifold& model, Symmetry symmetry, int mode_count, int circle_modes) {
  model.validate();
  if (mode_count < 8) throw Error(ErrorKind::InvalidArgument, "mode_count ≥ 8");
  if (circle_modes != 0 && circle_modes < 8) throw Error(ErrorKind::InvalidArgument, "circle_mode_count ≥ 8");

  std::shared_ptr<Discretization> d(new Discretization());
  d->model_ = model;
  d->symmetry_ = symmetry;
  d->mode_count_ = mode_count;
  const int n = model.dim;

  auto incompatible = [&]() {
    return Error(ErrorKind::Unsupported,
                 fmt::format("symmetry {} is incompatible with model {}", to_string(symmetry), model.describe()));
  };

  switch (symmetry) {
    case Symmetry::ZonalOnly:
      if (model.kind == ModelKind::RoundSphere) {
        d->axes_.push_back(zonal_axis(mode_count, n, 0.5));
        d->measure_factor_ = 1;
      } else if (model.kind == ModelKind::CircleCrossSphere) {
        d->axes_.push_back(zonal_axis(mode_count, n - 1, 0.5));
        d->measure_factor_ = model.sizes[0];
      } else {
        throw incompatible();
      }
      break;
    case Symmetry::CircleOnly:
      if (model.kind != ModelKind::CircleCrossSphere) throw incompatible();
      d->axes_.push_back(fourier_axis(mode_count, model.sizes[0], -0.5));
      d->measure_factor_ = sphere_area(n - 1);
      break;
    case Symmetry::CircleZonal2D:
      if (model.kind != ModelKind::CircleCrossSphere) throw incompatible();
      d->axes_.push_back(fourier_axis(circle_modes > 0 ? circle_modes : mode_count, model.sizes[0], -0.5));
      d->axes_.push_back(zonal_axis(mode_count, n - 1, 0.5));
      d->measure_factor_ = 1;
      break;
    case Symmetry::FullTorusFourier:
      if (model.kind != ModelKind::FlatTorus) throw incompatible();
      for (double side : model.sizes) d->axes_.push_back(fourier_axis(mode_count, side, 0.0));
      d->measure_factor_ = 1;
      break;
  }

  d->num_modes_ = 1;
  d->num_nodes_ = 1;
  for (const auto& ax : d->axes_) {
    d->num_modes_ *= ax.modes;
    d->num_nodes_ *= ax.nodes;
  }

  d->weights_ = Eigen::VectorXd::Constant(d->num_nodes_, d->measure_factor_);
  Eigen::Index stride = d->num_nodes_;
  for (const auto& ax : d->axes_) {
    stride /= ax.nodes;
    for (Eigen::Index i = 0; i < d->num_nodes_; ++i) d->weights_(i) *= ax.weight((i / stride) % ax.nodes);
  }
  d->neg_lap_ = Eigen::VectorXd::Zero(d->num_modes_);
  for (std::size_t a = 0; a < d->axes_.size(); ++a) d->neg_lap_ += d->axis_mu(a);
  return d;
}

Eigen::VectorXd Discretization::axis_mu(std::size_t a) const {
  Eigen::Index stride = num_modes_;
  for (std::size_t b = 0; b <= a; ++b) stride /= axes_[b].modes;
  const auto& ax = axes_[a];
  Eigen::VectorXd out(num_modes_);
  for (Eigen::Index i = 0; i < num_modes_; ++i) out(i) = ax.mu((i / stride) % ax.modes);
  return out;
}

Eigen::VectorXd Discretization::spectral_filter(double strength, int order) const {
  Eigen::VectorXd out = Eigen::VectorXd::Ones(num_modes_);
  Eigen::Index stride = num_modes_;
  for (const auto& ax : axes_) {
    stride /= ax.modes;
    double K = ax.degree.maxCoeff() + 1.0;
    for (Eigen::Index i = 0; i < num_modes_; ++i) {
      double k = ax.degree((i / stride) % ax.modes) / K;
      out(i) *= std::exp(-strength * std::pow(k, order));
    }
  }
  return out;
}

Eigen::VectorXd Discretization::apply_axes(const Eigen::VectorXd& in, bool to_nodes, int deriv_axis) const {
  std::vector<Eigen::Index> dims;
  for (const auto& ax : axes_) dims.push_back(to_nodes ? ax.modes : ax.nodes);
  Eigen::VectorXd cur = in;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const auto& ax = axes_[a];
    if (to_nodes)
      cur = apply_along(cur, dims, a, static_cast<int>(a) == deriv_axis ? ax.dbasis : ax.basis);
    else
      cur = apply_along(cur, dims, a, ax.basis.transpose());
  }
  return cur;
}

Eigen::VectorXd Discretization::forward(const Eigen::VectorXd& nodal) const {
  if (nodal.size() != num_nodes_) throw Error(ErrorKind::DiscretizationMismatch, "nodal vector size mismatch");
  Eigen::VectorXd weighted = weights_.cwiseProduct(nodal);
  return apply_axes(weighted, false, -1) / std::sqrt(measure_factor_);
}

Eigen::VectorXd Discretization::backward(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != num_modes_) throw Error(ErrorKind::DiscretizationMismatch, "coefficient vector size mismatch");
  return apply_axes(coeffs, true, -1) / std::sqrt(measure_factor_);
}

Eigen::VectorXd Discretization::backward_derivative(const Eigen::VectorXd& coeffs, std::size_t a) const {
  if (coeffs.size() != num_modes_) throw Error(ErrorKind::DiscretizationMismatch, "coefficient vector size mismatch");
  return apply_axes(coeffs, true, static_cast<int>(a)) / std::sqrt(measure_factor_);
}

std::vector<double> Discretization::axis_coordinates(const Point& p) const {
  const auto& c = p.coords;
  switch (model_.kind) {
    case ModelKind::RoundSphere:
      return {polar_angle(c, 0)};
    case ModelKind::CircleCrossSphere: {
      if (c.size() < 2) throw Error(ErrorKind::InvalidArgument, "product point needs (s, theta)");
      double s = c[0];
      double th = polar_angle(c, 1);
      switch (symmetry_) {
        case Symmetry::CircleOnly: return {s};
        case Symmetry::ZonalOnly: return {th};
        default: return {s, th};
      }
    }
    case ModelKind::FlatTorus:
      if (c.size() != axes_.size()) throw Error(ErrorKind::InvalidArgument, "torus point dimension mismatch");
      return c;
  }
  return {};
}

Eigen::VectorXd Discretization::basis_at(const Point& p) const {
  std::vector<double> xc = axis_coordinates(p);
  Eigen::VectorXd out = Eigen::VectorXd::Constant(1, 1.0 / std::sqrt(measure_factor_));
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    Eigen::RowVectorXd row = axes_[a].eval(xc[a]);
    Eigen::VectorXd next(out.size() * row.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * row.size(), row.size()) = out(i) * row.transpose();
    out = std::move(next);
  }
  return out;
}

double Discretization::node_coordinate(Eigen::Index i, std::size_t a) const {
  Eigen::Index stride = num_nodes_;
  for (std::size_t b = 0; b <= a; ++b) stride /= axes_[b].nodes;
  return axes_[a].coord((i / stride) % axes_[a].nodes);
}

Point Discretization::node_point(Eigen::Index i) const {
  switch (model_.kind) {
    case ModelKind::RoundSphere:
      return Point{{node_coordinate(i, 0)}};
    case ModelKind::CircleCrossSphere:
      switch (symmetry_) {
        case Symmetry::CircleOnly: return Point{{node_coordinate(i, 0), 0.0}};
        case Symmetry::ZonalOnly: return Point{{0.0, node_coordinate(i, 0)}};
        default: return Point{{node_coordinate(i, 0), node_coordinate(i, 1)}};
      }
    case ModelKind::FlatTorus: {
      Point p;
      for (std::size_t a = 0; a < axes_.size(); ++a) p.coords.push_back(node_coordinate(i, a));
      return p;
    }
  }
  return {};
}

double Discretization::grid_length() const {
  double h = 0;
  for (const auto& ax : axes_) {
    if (ax.kind == Axis::Kind::Fourier) {
      h = std::max(h, ax.length / ax.nodes);
    } else {
      h = std::max(h, ax.coord(0));
      h = std::max(h, std::numbers::pi - ax.coord(ax.nodes - 1));
      for (int i = 1; i < ax.nodes; ++i) h = std::max(h, ax.coord(i) - ax.coord(i - 1));
    }
  }
  return h;
}

Field Field::from_coeffs(DiscPtr disc, Eigen::VectorXd coeffs) {
  if (!coeffs.allFinite()) throw Error(ErrorKind::NonFinite, "non-finite coefficients");
  Field f;
  f.nodal_ = disc->backward(coeffs);
  f.coeffs_ = std::move(coeffs);
  f.disc_ = std::move(disc);
  return f;
}

Field Field::from_nodal(DiscPtr disc, Eigen::VectorXd nodal) {
  if (!nodal.allFinite()) throw Error(ErrorKind::NonFinite, "non-finite nodal values");
  Field f;
  f.coeffs_ = disc->forward(nodal);
  f.nodal_ = std::move(nodal);
  f.disc_ = std::move(disc);
  return f;
}

Field Field::constant(DiscPtr disc, double c) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(disc->num_modes());
  coeffs(0) = c * disc->basis_at(disc->node_point(0))(0) * disc->weights().sum();
  return from_coeffs(std::move(disc), std::move(coeffs));
}

Field Field::sample(DiscPtr disc, const std::function<double(const Point&)>& fn) {
  Eigen::VectorXd v(disc->num_nodes());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = fn(disc->node_point(i));
  return from_nodal(std::move(disc), std::move(v));
}

Field Field::projected() const { return from_coeffs(disc_, coeffs_); }

double Field::consistency_error() const {
  Eigen::VectorXd back = disc_->backward(coeffs_);
  double scale = std::max(nodal_.cwiseAbs().maxCoeff(), 1e-300);
  return (back - nodal_).cwiseAbs().maxCoeff() / scale;
}

double Field::value_at(const Point& p) const { return disc_->basis_at(p).dot(coeffs_); }

Field Field::operator+(const Field& o) const {
  require_same_disc(*this, o);
  Field f;
  f.disc_ = disc_;
  f.coeffs_ = coeffs_ + o.coeffs_;
  f.nodal_ = nodal_ + o.nodal_;
  return f;
}

Field Field::operator-(const Field& o) const { return *this + o * -1.0; }

Field Field::operator*(double s) const {
  Field f;
  f.disc_ = disc_;
  f.coeffs_ = coeffs_ * s;
  f.nodal_ = nodal_ * s;
  return f;
}

void require_same_disc(const Field& a, const Field& b) {
  if (a.disc_ptr() != b.disc_ptr()) throw Error(ErrorKind::DiscretizationMismatch, "fields live on different discretizations");
}

double integrate(const Field& f) { return f.disc().weights().dot(f.nodal()); }

double coeff_inner(const Field& f, const Field& g) {
  require_same_disc(f, g);
  return f.coeffs().dot(g.coeffs());
}

Field laplacian(const Field& f) {
  return Field::from_coeffs(f.disc_ptr(), -f.disc().neg_laplacian().cwiseProduct(f.coeffs()));
}

namespace maps {

ScalarMap signed_power(double p) {
  return [p](double u) { return std::copysign(std::pow(std::abs(u), p), u); };
}

ScalarMap power(double p) {
  return [p](double u) { return std::pow(u, p); };
}

ScalarMap square() {
  return [](double u) { return u * u; };
}

}  // namespace maps

Field pointwise(const Field& f, const ScalarMap& map) {
  Eigen::VectorXd v = f.nodal().unaryExpr(map);
  if (!v.allFinite()) throw Error(ErrorKind::NonFinite, "pointwise map produced a non-finite value");
  return Field::from_nodal(f.disc_ptr(), std::move(v));
}

Field multiply(const Field& f, const Field& g) {
  require_same_disc(f, g);
  return Field::from_nodal(f.disc_ptr(), f.nodal().cwiseProduct(g.nodal()));
}

Field gradient_squared(const Field& f) {
  const auto& d = f.disc();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d.num_nodes());
  for (std::size_t a = 0; a < d.axes().size(); ++a) acc += d.backward_derivative(f.coeffs(), a).cwiseAbs2();
  return Field::from_nodal(f.disc_ptr(), std::move(acc));
}

}  // namespace qcurv

#pragma once

#include "qcurv/bubbles.hpp"
#include "qcurv/models.hpp"
#include "qcurv/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcurv {

/// Initial-data grammar: a sum of terms, each an optional coefficient times one of
///   1, cos(k*s), sin(k*s), zonal(k), random(k)
/// e.g. "1 + 0.1*cos(s) - 0.02*zonal(2)".  cos/sin act on the circle coordinate
/// (first coordinate on the torus) with k full periods; zonal(k) is the degree-k
/// zonal harmonic normalized to 1 at the pole; random(k) is a seeded combination of
/// the first k nonconstant modes with unit sup-norm scale.
struct InitialTerm {
  enum class Kind { Constant, Cos, Sin, Zonal, Random };
  Kind kind = Kind::Constant;
  double coeff = 1;
  int k = 0;
};

std::vector<InitialTerm> parse_initial(const std::string& text);
Field build_initial(const DiscPtr& disc, const std::vector<InitialTerm>& terms, std::uint64_t seed);

struct DiscretizationBlock {
  Symmetry symmetry = Symmetry::ZonalOnly;
  int mode_count = 64;
  int circle_mode_count = 0;
};

struct FlowBlock {
  double t_end = 200;
  double tol = 1e-8;
  double threshold = 1e-6;
  double dt_initial = 1e-2;
  std::size_t max_steps = 1000000;
  std::string u0 = "1";
  std::vector<InitialTerm> u0_terms;
};

struct GreenBlock {
  std::vector<Point> poles;
  std::optional<double> r_min;
  std::optional<double> r_max;
  bool filtered = true;
  double fit_tol = 1e-2;
};

struct BubbleBlock {
  BubbleVariant variant = BubbleVariant::Standard;
  BubbleChart chart = BubbleChart::Geodesic;
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  double delta = 0.5;
  double inner_delta = 0.75;
  Point center;
};

struct MaxPrincipleBlock {
  std::string u = "1";
  std::vector<InitialTerm> u_terms;
  int steps = 20;
};

struct OutputBlock {
  std::string dir = "out";
  bool jsonl = true;
  bool csv = true;
  bool dat = true;
};

struct ExperimentConfig {
  ModelManifold model;
  DiscretizationBlock discretization;
  std::optional<FlowBlock> flow;
  std::optional<GreenBlock> green;
  std::optional<BubbleBlock> bubble;
  std::optional<MaxPrincipleBlock> maxprinciple;
  OutputBlock output;
};

/// INI-style text: [section] headers, key = value lines, ';' comments.
/// Throws Error(Config) with a line number on syntax errors and the key name on range errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// "0 0 | 3.14159 0" -> points; coordinates accept "pi", "a*pi", "pi/b", "a*pi/b".
std::vector<Point> parse_points(const std::string& text);
double parse_coordinate(const std::string& text);

}  // namespace qcurv

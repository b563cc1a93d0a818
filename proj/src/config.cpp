#include "qcurv/config.hpp"

#include "qcurv/error.hpp"

#include <boost/math/special_functions/gegenbauer.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace qcurv {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

std::string trim(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), sp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), sp).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(fmt::format("{}: '{}' is not a number", key, v));
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(fmt::format("{}: '{}' is not an integer", key, v));
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(fmt::format("{}: '{}' is not a boolean", key, v));
}

// Section view that remembers which keys were read, to reject the rest.
class Section {
 public:
  Section(const pt::ptree& tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> get(const std::string& key) {
    seen_.insert(key);
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }
  double number(const std::string& key, double def) {
    auto v = get(key);
    return v ? to_double(qualified(key), *v) : def;
  }
  // number that may be written with pi
  double length(const std::string& key, double def);
  std::optional<double> maybe_number(const std::string& key) {
    auto v = get(key);
    if (!v) return std::nullopt;
    return to_double(qualified(key), *v);
  }
  long long integer(const std::string& key, long long def) {
    auto v = get(key);
    return v ? to_int(qualified(key), *v) : def;
  }
  bool boolean(const std::string& key, bool def) {
    auto v = get(key);
    return v ? to_bool(qualified(key), *v) : def;
  }
  std::string text(const std::string& key, const std::string& def) {
    auto v = get(key);
    return v ? *v : def;
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  void reject_unknown() const {
    for (const auto& [k, v] : tree_)
      if (!seen_.count(k)) fail(fmt::format("unknown key '{}' in section [{}]", k, name_));
  }

 private:
  const pt::ptree& tree_;
  std::string name_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) fail(fmt::format("range error: {} {}", key, rule));
}

double zonal_harmonic(int k, int m, double theta) {
  double lam = (m - 1) / 2.0;
  return boost::math::gegenbauer(static_cast<unsigned>(k), lam, std::cos(theta)) /
         boost::math::gegenbauer(static_cast<unsigned>(k), lam, 1.0);
}

}  // namespace

std::vector<InitialTerm> parse_initial(const std::string& text) {
  static const std::regex term_re(
      R"(^\s*([+-])?\s*(?:([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*(\*)?\s*)?)"
      R"((?:(cos|sin)\(\s*(?:([0-9]+)\s*\*\s*)?s\s*\)|(zonal|random)\(\s*([0-9]+)\s*\))?)");
  std::vector<InitialTerm> out;
  std::string rest = trim(text);
  if (rest.empty()) fail("initial data: empty expression");
  bool first = true;
  while (!rest.empty()) {
    std::smatch m;
    if (!std::regex_search(rest, m, term_re) || m.length(0) == 0)
      fail(fmt::format("initial data: cannot parse '{}'", rest));
    if (!first && !m[1].matched) fail(fmt::format("initial data: expected '+' or '-' before '{}'", rest));
    bool has_num = m[2].matched, has_func = m[4].matched || m[6].matched;
    if (!has_num && !has_func) fail(fmt::format("initial data: cannot parse '{}'", rest));
    if (m[3].matched && !has_func) fail(fmt::format("initial data: dangling '*' in '{}'", rest));
    if (has_num && has_func && !m[3].matched) fail(fmt::format("initial data: missing '*' in '{}'", rest));
    InitialTerm t;
    t.coeff = has_num ? std::stod(m[2].str()) : 1.0;
    if (m[1].matched && m[1].str() == "-") t.coeff = -t.coeff;
    if (m[4].matched) {
      t.kind = m[4].str() == "cos" ? InitialTerm::Kind::Cos : InitialTerm::Kind::Sin;
      t.k = m[5].matched ? std::stoi(m[5].str()) : 1;
    } else if (m[6].matched) {
      t.kind = m[6].str() == "zonal" ? InitialTerm::Kind::Zonal : InitialTerm::Kind::Random;
      t.k = std::stoi(m[7].str());
      if (t.kind == InitialTerm::Kind::Random && t.k < 1) fail("initial data: random(k) needs k >= 1");
    }
    out.push_back(t);
    rest = trim(m.suffix().str());
    first = false;
  }
  return out;
}

Field build_initial(const DiscPtr& disc, const std::vector<InitialTerm>& terms, std::uint64_t seed) {
  const auto& model = disc->model();
  const bool has_circle = model.kind != ModelKind::RoundSphere;
  const bool has_zonal = model.kind != ModelKind::FlatTorus;
  const int m = model.sphere_dim();
  const double period = model.kind == ModelKind::FlatTorus ? model.sizes[0]
                        : model.kind == ModelKind::CircleCrossSphere ? model.circle_length()
                                                                      : 0.0;

  // draw all random coefficients up front so the sampling order cannot matter
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  struct Drawn {
    std::vector<double> a, b, z;
  };
  std::vector<Drawn> drawn(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if ((t.kind == InitialTerm::Kind::Cos || t.kind == InitialTerm::Kind::Sin) && !has_circle)
      fail("initial data: cos/sin need a circle coordinate");
    if (t.kind == InitialTerm::Kind::Zonal && !has_zonal) fail("initial data: zonal(k) needs a sphere factor");
    if (t.kind != InitialTerm::Kind::Random) continue;
    int count = 0;
    for (int j = 1; j <= t.k; ++j) {
      if (has_circle) {
        drawn[i].a.push_back(uni(rng));
        drawn[i].b.push_back(uni(rng));
        count += 2;
      }
      if (has_zonal) {
        drawn[i].z.push_back(uni(rng));
        count += 1;
      }
    }
    for (auto* v : {&drawn[i].a, &drawn[i].b, &drawn[i].z})
      for (double& x : *v) x /= count;
  }

  const double pi = std::numbers::pi;
  return Field::sample(disc, [&](const Point& p) {
    double s = has_circle ? p.coords[0] : 0.0;
    double theta = 0;
    if (model.kind == ModelKind::RoundSphere) theta = polar_angle(p.coords, 0);
    if (model.kind == ModelKind::CircleCrossSphere) theta = polar_angle(p.coords, 1);
    double w = has_circle ? 2 * pi / period : 0.0;
    double v = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& t = terms[i];
      switch (t.kind) {
        case InitialTerm::Kind::Constant: v += t.coeff; break;
        case InitialTerm::Kind::Cos: v += t.coeff * std::cos(t.k * w * s); break;
        case InitialTerm::Kind::Sin: v += t.coeff * std::sin(t.k * w * s); break;
        case InitialTerm::Kind::Zonal: v += t.coeff * zonal_harmonic(t.k, m, theta); break;
        case InitialTerm::Kind::Random: {
          double r = 0;
          for (int j = 1; j <= t.k; ++j) {
            if (has_circle)
              r += drawn[i].a[j - 1] * std::cos(j * w * s) + drawn[i].b[j - 1] * std::sin(j * w * s);
            if (has_zonal) r += drawn[i].z[j - 1] * zonal_harmonic(j, m, theta);
          }
          v += t.coeff * r;
          break;
        }
      }
    }
    return v;
  });
}

namespace {

double coordinate_value(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  const double pi = std::numbers::pi;
  // [sign][a*]pi[/b]
  static const std::regex form(R"(^([+-]?)\s*(?:([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*\*\s*)?pi(?:\s*/\s*([0-9]*\.?[0-9]+))?$)");
  std::smatch m;
  if (std::regex_match(s, m, form)) {
    double v = pi;
    if (m[2].matched) v *= std::stod(m[2].str());
    if (m[3].matched) v /= std::stod(m[3].str());
    return m[1].str() == "-" ? -v : v;
  }
  return to_double(key, s);
}

}  // namespace

double parse_coordinate(const std::string& raw) { return coordinate_value("coordinate", raw); }

double Section::length(const std::string& key, double def) {
  auto v = get(key);
  return v ? coordinate_value(qualified(key), *v) : def;
}

std::vector<Point> parse_points(const std::string& text) {
  std::vector<Point> out;
  for (const auto& item : split(text, '|')) {
    if (item.empty()) fail("empty point in list");
    Point p;
    std::stringstream ss(item);
    std::string tok;
    while (ss >> tok) p.coords.push_back(parse_coordinate(tok));
    out.push_back(std::move(p));
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(fmt::format("syntax error at line {}: {}", e.line(), e.message()));
  }
  static const std::set<std::string> known{"model", "discretization", "flow", "green", "bubble", "maxprinciple",
                                           "output"};
  for (const auto& [name, sec] : tree) {
    if (!known.count(name)) {
      if (sec.empty()) fail(fmt::format("key '{}' outside of any section", name));
      fail(fmt::format("unknown section [{}]", name));
    }
  }
  ExperimentConfig cfg;
  const double two_pi = 2 * std::numbers::pi;

  const pt::ptree empty;
  auto section = [&](const char* name) -> const pt::ptree& {
    auto it = tree.find(name);
    return it == tree.not_found() ? empty : it->second;
  };
  // read_ini drops sections without keys, so headers are collected separately
  std::set<std::string> headers;
  {
    static const std::regex header(R"(^\s*\[\s*([^\]]*?)\s*\]\s*$)");
    std::istringstream in(text);
    std::string line;
    std::smatch m;
    while (std::getline(in, line))
      if (std::regex_match(line, m, header)) headers.insert(m[1].str());
  }
  for (const auto& name : headers)
    if (!known.count(name)) fail(fmt::format("unknown section [{}]", name));
  auto present = [&](const char* name) { return headers.count(name) > 0; };

  if (!present("model")) fail("missing [model] section");
  {
    Section s(section("model"), "model");
    std::string kind = s.text("kind", "");
    long long n = s.integer("n", 5);
    require(n >= 5 && n <= 64, "model.n", "must satisfy 5 ≤ n ≤ 64");
    if (kind == "sphere") {
      cfg.model = ModelManifold::round_sphere(static_cast<int>(n));
      cfg.discretization.symmetry = Symmetry::ZonalOnly;
    } else if (kind == "product") {
      double L = s.length("length", two_pi);
      require(L > 0 && std::isfinite(L), "model.length", "must be positive");
      cfg.model = ModelManifold::circle_cross_sphere(static_cast<int>(n), L);
      cfg.discretization.symmetry = Symmetry::CircleOnly;
    } else if (kind == "torus") {
      double side = s.length("side", two_pi);
      require(side > 0 && std::isfinite(side), "model.side", "must be positive");
      cfg.model = ModelManifold::flat_torus(static_cast<int>(n), side);
      cfg.discretization.symmetry = Symmetry::FullTorusFourier;
    } else {
      fail(fmt::format("model.kind must be sphere, product or torus (got '{}')", kind));
    }
    s.reject_unknown();
  }
  {
    Section s(section("discretization"), "discretization");
    if (auto sym = s.get("symmetry")) {
      try {
        cfg.discretization.symmetry = symmetry_from_string(*sym);
      } catch (const Error& e) {
        fail(fmt::format("discretization.symmetry: {}", e.what()));
      }
    }
    long long N = s.integer("mode_count", 64);
    require(N >= 8, "mode_count", fmt::format("≥ 8 (got {})", N));
    require(N <= 8192, "mode_count", fmt::format("≤ 8192 (got {})", N));
    cfg.discretization.mode_count = static_cast<int>(N);
    long long C = s.integer("circle_mode_count", 0);
    require(C == 0 || (C >= 8 && C <= 8192), "circle_mode_count", "must be 0 or in [8, 8192]");
    cfg.discretization.circle_mode_count = static_cast<int>(C);
    s.reject_unknown();
  }

  if (present("flow")) {
    Section s(section("flow"), "flow");
    FlowBlock f;
    f.t_end = s.number("t_end", f.t_end);
    require(f.t_end > 0 && std::isfinite(f.t_end), "flow.t_end", "must be positive");
    f.tol = s.number("tol", f.tol);
    require(f.tol > 0 && f.tol <= 1e-2, "flow.tol", "must lie in (0, 1e-2]");
    f.threshold = s.number("threshold", f.threshold);
    require(f.threshold > 0, "flow.threshold", "must be positive");
    f.dt_initial = s.number("dt_initial", f.dt_initial);
    require(f.dt_initial > 0, "flow.dt_initial", "must be positive");
    long long ms = s.integer("max_steps", static_cast<long long>(f.max_steps));
    require(ms >= 1, "flow.max_steps", "must be ≥ 1");
    f.max_steps = static_cast<std::size_t>(ms);
    f.u0 = s.text("u0", f.u0);
    f.u0_terms = parse_initial(f.u0);
    s.reject_unknown();
    cfg.flow = std::move(f);
  }
  if (present("green")) {
    Section s(section("green"), "green");
    GreenBlock g;
    g.poles = parse_points(s.text("poles", cfg.model.kind == ModelKind::RoundSphere ? "0" : "0 0"));
    g.r_min = s.maybe_number("r_min");
    g.r_max = s.maybe_number("r_max");
    if (g.r_min) require(*g.r_min > 0, "green.r_min", "must be positive");
    if (g.r_min && g.r_max) require(*g.r_max > *g.r_min, "green.r_max", "must exceed green.r_min");
    g.filtered = s.boolean("filtered", g.filtered);
    g.fit_tol = s.number("fit_tol", g.fit_tol);
    require(g.fit_tol > 0, "green.fit_tol", "must be positive");
    s.reject_unknown();
    cfg.green = std::move(g);
  }
  if (present("bubble")) {
    Section s(section("bubble"), "bubble");
    BubbleBlock b;
    try {
      b.variant = bubble_variant_from_string(s.text("variant", "standard"));
    } catch (const Error& e) {
      fail(fmt::format("bubble.variant: {}", e.what()));
    }
    std::string chart = s.text("chart", "geodesic");
    if (chart == "geodesic") b.chart = BubbleChart::Geodesic;
    else if (chart == "stereographic") b.chart = BubbleChart::Stereographic;
    else fail(fmt::format("bubble.chart must be geodesic or stereographic (got '{}')", chart));
    if (auto e = s.get("eps")) {
      b.eps.clear();
      for (const auto& tok : split(*e, ',')) b.eps.push_back(to_double("bubble.eps", tok));
    }
    require(!b.eps.empty(), "bubble.eps", "must list at least one value");
    for (double e : b.eps) require(e > 0, "bubble.eps", "values must be positive");
    if (auto d = s.get("delta")) b.delta = *d == "inf" ? INFINITY : coordinate_value("bubble.delta", *d);
    require(b.delta > 0, "bubble.delta", "must be positive");
    b.inner_delta = s.length("inner_delta", b.inner_delta);
    require(b.inner_delta > 0, "bubble.inner_delta", "must be positive");
    auto centers = parse_points(s.text("center", cfg.model.kind == ModelKind::RoundSphere ? "0" : "0 0"));
    if (centers.size() != 1) fail("bubble.center must be a single point");
    b.center = centers.front();
    s.reject_unknown();
    cfg.bubble = std::move(b);
  }
  if (present("maxprinciple")) {
    Section s(section("maxprinciple"), "maxprinciple");
    MaxPrincipleBlock mp;
    mp.u = s.text("u", mp.u);
    mp.u_terms = parse_initial(mp.u);
    long long steps = s.integer("steps", mp.steps);
    require(steps >= 2 && steps <= 100000, "maxprinciple.steps", "must lie in [2, 100000]");
    mp.steps = static_cast<int>(steps);
    s.reject_unknown();
    cfg.maxprinciple = std::move(mp);
  }
  {
    Section s(section("output"), "output");
    cfg.output.dir = s.text("dir", cfg.output.dir);
    if (auto f = s.get("formats")) {
      cfg.output.jsonl = cfg.output.csv = cfg.output.dat = false;
      for (const auto& tok : split(*f, ',')) {
        if (tok == "jsonl") cfg.output.jsonl = true;
        else if (tok == "csv") cfg.output.csv = true;
        else if (tok == "dat") cfg.output.dat = true;
        else fail(fmt::format("output.formats: unknown format '{}'", tok));
      }
    }
    s.reject_unknown();
  }

  // operator-based commands need a positive Paneitz operator
  if (cfg.flow || cfg.green || cfg.bubble || cfg.maxprinciple) {
    Admissibility a = is_positivity_admissible(cfg.model);
    if (!a.admissible)
      fail(fmt::format("admissibility error: {} is not admissible: {}", cfg.model.describe(), a.explanation));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qcurv

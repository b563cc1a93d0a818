#include "qcurv/commands.hpp"

#include "qcurv/bubbles.hpp"
#include "qcurv/conformal.hpp"
#include "qcurv/error.hpp"
#include "qcurv/flow.hpp"
#include "qcurv/green.hpp"
#include "qcurv/paneitz.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

namespace qcurv {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string point_text(const Point& p) {
  std::string out;
  for (std::size_t i = 0; i < p.coords.size(); ++i) out += (i ? " " : "") + num(p.coords[i]);
  return out;
}

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write {}", (dir_ / name).string()));
    return f;
  }
  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
};

void write_dat(const OutputDir& out, const std::string& name, const std::vector<double>& x,
               const std::vector<double>& y) {
  auto f = out.open(name);
  for (std::size_t i = 0; i < x.size(); ++i) fmt::print(f, "{} {}\n", num(x[i]), num(y[i]));
}

void require_axis_symmetry(const ExperimentConfig& cfg, const char* what) {
  if (cfg.model.kind == ModelKind::CircleCrossSphere && cfg.discretization.symmetry != Symmetry::CircleZonal2D)
    throw Error(ErrorKind::Config, fmt::format("{} on the product needs discretization.symmetry = circle_zonal", what));
}

FitWindow window_for(const ExperimentConfig& cfg, const Discretization& d) {
  FitWindow w = default_window(d);
  if (cfg.green && cfg.green->r_min) w.r_min = *cfg.green->r_min;
  if (cfg.green && cfg.green->r_max) w.r_max = *cfg.green->r_max;
  return w;
}

int cmd_info(const ExperimentConfig& cfg, const OutputDir& out, std::ostream& log) {
  const auto& m = cfg.model;
  CurvatureBundle c = curvature_data(m);
  Admissibility a = is_positivity_admissible(m);
  auto rat = [](const Rational& r) {
    return r.denominator() == 1 ? fmt::format("{}", r.numerator()) : fmt::format("{}/{}", r.numerator(), r.denominator());
  };
  fmt::print(log, "model       {}\n", m.describe());
  fmt::print(log, "n           {}\n", m.dim);
  fmt::print(log, "Q = {} ({})\n", rat(c.q_exact), num(c.q_curv));
  fmt::print(log, "R = {} ({})\n", rat(c.scalar_exact), num(c.scalar));
  fmt::print(log, "sigma1 = {}, sigma2 = {}\n", rat(c.sigma1_exact), rat(c.sigma2_exact));
  fmt::print(log, "volume = {}, injectivity radius = {}\n", num(volume(m)), num(injectivity_radius(m)));
  fmt::print(log, "admissible = {}", a.admissible ? "true" : "false");
  if (!a.explanation.empty()) fmt::print(log, " ({})", a.explanation);
  fmt::print(log, "\n");

  json j;
  j["model"] = m.describe();
  j["n"] = m.dim;
  j["Q"] = rat(c.q_exact);
  j["R"] = rat(c.scalar_exact);
  j["sigma1"] = rat(c.sigma1_exact);
  j["sigma2"] = rat(c.sigma2_exact);
  j["schouten_eigenvalues"] = c.schouten_eigenvalues;
  j["volume"] = volume(m);
  j["injectivity_radius"] = injectivity_radius(m);
  j["admissible"] = a.admissible;
  j["explanation"] = a.explanation;
  auto f = out.open("info.json");
  f << j.dump(2) << "\n";
  return 0;
}

int cmd_flow(const ExperimentConfig& cfg, const RunOptions& opt, const OutputDir& out, std::ostream& log) {
  if (!cfg.flow) throw Error(ErrorKind::Config, "flow needs a [flow] section");
  const FlowBlock& fb = *cfg.flow;
  DiscPtr d = make_discretization(cfg);
  PaneitzOperator P = assemble(d);
  Field u0 = build_initial(d, fb.u0_terms, opt.seed);

  FlowOptions fo;
  fo.tol = fb.tol;
  fo.threshold = fb.threshold;
  fo.dt_initial = fb.dt_initial;
  fo.max_steps = fb.max_steps;

  std::ofstream jsonl;
  if (cfg.output.jsonl) jsonl = out.open("monitors.jsonl");
  auto sink = [&](const MonitorRecord& r) {
    if (!cfg.output.jsonl) return;
    json j;
    j["t"] = r.t;
    j["energy"] = r.energy;
    j["volume"] = r.volume;
    j["mu"] = r.mu;
    j["quotient"] = r.quotient;
    j["min_u"] = r.min_u;
    j["residual"] = r.residual;
    j["lower_bound_slack"] = r.lower_bound_slack;
    j["cumulative_st"] = r.cumulative_st;
    j["l2_mass"] = r.l2_mass;
    jsonl << j.dump() << "\n";
  };
  RunSummary s = run(P, u0, fb.t_end, fo, sink);
  if (jsonl.is_open()) jsonl.close();

  const auto& first = s.records.front();
  const auto& last = s.records.back();
  double drift = 0;
  for (const auto& r : s.records) drift = std::max(drift, std::abs(r.energy - first.energy) / first.energy);
  Stationarity st = stationarity(P, s.final_state.u);

  fmt::print(log, "flow on {} ({} modes): t = {}, steps = {}, converged = {}\n", cfg.model.describe(), d->num_modes(),
             num(last.t), s.records.size() - 1, s.converged);
  fmt::print(log, "relative residual {:.3e}, energy drift {:.3e}, min u {:.6g}, Q spread {:.3e}\n",
             s.relative_residual, drift, last.min_u, st.q_spread);

  if (cfg.output.csv) {
    auto f = out.open("flow_summary.csv");
    fmt::print(f,
               "model,n,t_final,steps,converged,relative_residual,energy_drift,mu_final,quotient_final,min_u,"
               "growth_rate,l2_floor,cumulative_st,endgame_residual,q_spread,min_R\n");
    fmt::print(f, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", cfg.model.describe(), cfg.model.dim,
               num(last.t), s.records.size() - 1, s.converged ? 1 : 0, num(s.relative_residual), num(drift),
               num(last.mu), num(last.quotient), num(last.min_u), num(s.growth_rate), num(s.l2_floor),
               num(last.cumulative_st), num(st.residual), num(st.q_spread), num(st.min_R));
  }
  if (cfg.output.dat) {
    std::vector<double> t;
    for (const auto& r : s.records) t.push_back(r.t);
    const std::vector<std::pair<const char*, double MonitorRecord::*>> fields{
        {"energy", &MonitorRecord::energy},     {"volume", &MonitorRecord::volume},
        {"mu", &MonitorRecord::mu},             {"quotient", &MonitorRecord::quotient},
        {"min_u", &MonitorRecord::min_u},       {"residual", &MonitorRecord::residual},
        {"lower_bound_slack", &MonitorRecord::lower_bound_slack},
        {"cumulative_st", &MonitorRecord::cumulative_st}, {"l2_mass", &MonitorRecord::l2_mass}};
    for (const auto& [name, field] : fields) {
      std::vector<double> y;
      for (const auto& r : s.records) y.push_back(r.*field);
      write_dat(out, fmt::format("flow_{}.dat", name), t, y);
    }
  }
  return 0;
}

int cmd_green(const ExperimentConfig& cfg, const OutputDir& out, std::ostream& log) {
  if (!cfg.green) throw Error(ErrorKind::Config, "green needs a [green] section");
  require_axis_symmetry(cfg, "green");
  const GreenBlock& gb = *cfg.green;
  DiscPtr d = make_discretization(cfg);
  PaneitzOperator P = assemble(d);
  FitWindow w = window_for(cfg, *d);
  GreenOptions go;
  go.filtered = gb.filtered;

  std::vector<GreenExpansion> rows;
  for (const auto& p : gb.poles) {
    Field G = greens_function(P, p, go);
    rows.push_back(fit_expansion(G, p, w, gb.fit_tol));
  }
  double lo = rows.front().alpha, hi = lo, noise = 0;
  for (const auto& e : rows) {
    lo = std::min(lo, e.alpha);
    hi = std::max(hi, e.alpha);
    noise = std::max(noise, std::abs(e.alpha - e.alpha_shifted));
  }
  for (const auto& e : rows) {
    fmt::print(log, "pole [{}]: leading {:.8g}, alpha {:.6g} (shifted {:.6g}), residual {:.2e}{}{}\n",
               point_text(e.pole), e.leading_coeff, e.alpha, e.alpha_shifted, e.fit_residual,
               e.reliable ? "" : " [unreliable]", e.stable ? "" : " [unstable]");
  }
  fmt::print(log, "alpha spread {:.3e}, noise {:.3e}\n", hi - lo, noise);

  if (cfg.output.csv) {
    auto f = out.open("green.csv");
    fmt::print(f, "model,n,pole,leading_coeff,alpha,r_min,r_max,fit_residual\n");
    for (const auto& e : rows)
      fmt::print(f, "{},{},{},{},{},{},{},{}\n", cfg.model.describe(), cfg.model.dim, point_text(e.pole),
                 num(e.leading_coeff), num(e.alpha), num(e.window.r_min), num(e.window.r_max), num(e.fit_residual));
  }
  return 0;
}

int cmd_bubble(const ExperimentConfig& cfg, const OutputDir& out, std::ostream& log) {
  if (!cfg.bubble) throw Error(ErrorKind::Config, "bubble needs a [bubble] section");
  require_axis_symmetry(cfg, "bubble");
  const BubbleBlock& bb = *cfg.bubble;
  DiscPtr d = make_discretization(cfg);
  PaneitzOperator P = assemble(d);
  BubbleSpec spec;
  spec.center = bb.center;
  spec.delta = bb.delta;
  spec.inner_delta = bb.inner_delta;
  spec.variant = bb.variant;
  spec.chart = bb.chart;

  std::optional<GreenData> green;
  if (bb.variant == BubbleVariant::Glued) {
    GreenOptions go;
    go.filtered = cfg.green ? cfg.green->filtered : true;
    Field G = greens_function(P, bb.center, go);
    GreenExpansion e = fit_expansion(G, bb.center, window_for(cfg, *d), cfg.green ? cfg.green->fit_tol : 1e-2);
    fmt::print(log, "green at center: leading {:.8g}, alpha {:.6g}, beta {:.6g}\n", e.leading_coeff, e.alpha,
               e.alpha / e.leading_coeff);
    green = GreenData{std::move(G), std::move(e)};
  }
  DeficitReport rep = deficit_scan(P, spec, bb.eps, green ? &*green : nullptr);
  for (const auto& w : rep.warnings) fmt::print(log, "warning: {}\n", w);
  fmt::print(log, "S_n = {}\n", num(rep.Sn));
  for (const auto& r : rep.rows) fmt::print(log, "eps {:<8g} F {:.12g} deficit {:.6e}\n", r.eps, r.quotient, r.deficit);
  fmt::print(log, "fitted exponent {}\n", num(rep.fit_exponent));

  if (bb.variant == BubbleVariant::Corrected) {
    for (double eps : bb.eps) {
      BubbleSpec s = spec;
      s.eps = eps;
      CorrectionReport c = correction_report(P, s, corrected_bubble(P, s));
      fmt::print(log, "eps {:<8g} sup|u_hat - u_eps| {:.6g}, C {:.6g} for {}, min u {:.6g}, min R {:.6g}, admissible {}\n",
                 eps, c.sup_diff, c.constant, c.profile, c.min_u, c.min_R, c.admissible);
    }
  }

  if (cfg.output.csv) {
    auto f = out.open("deficit.csv");
    fmt::print(f, "model,n,variant,eps,quotient,deficit,fit_exponent\n");
    for (const auto& r : rep.rows)
      fmt::print(f, "{},{},{},{},{},{},{}\n", cfg.model.describe(), cfg.model.dim, to_string(rep.variant), num(r.eps),
                 num(r.quotient), num(r.deficit), num(rep.fit_exponent));
  }
  if (cfg.output.dat) {
    std::vector<double> x, y;
    for (const auto& r : rep.rows) x.push_back(r.eps), y.push_back(r.deficit);
    write_dat(out, "deficit.dat", x, y);
  }
  return 0;
}

int cmd_maxprinciple(const ExperimentConfig& cfg, const RunOptions& opt, const OutputDir& out, std::ostream& log) {
  if (!cfg.maxprinciple) throw Error(ErrorKind::Config, "maxprinciple needs a [maxprinciple] section");
  DiscPtr d = make_discretization(cfg);
  PaneitzOperator P = assemble(d);
  Field u = build_initial(d, cfg.maxprinciple->u_terms, opt.seed);
  PathReport rep = maxprinciple_path(P, u, cfg.maxprinciple->steps);
  if (rep.first_failure)
    fmt::print(log, "first failure: {}\n", rep.failure_reason);
  else
    fmt::print(log, "u, Q and R stay positive along the whole path ({} points)\n", rep.points.size());
  if (cfg.output.csv) {
    auto f = out.open("maxprinciple.csv");
    fmt::print(f, "lambda,min_u,min_q_bound,min_q,min_r\n");
    for (const auto& p : rep.points)
      fmt::print(f, "{},{},{},{},{}\n", num(p.lambda), num(p.min_u), num(p.min_q_bound), num(p.min_q), num(p.min_r));
  }
  if (cfg.output.dat) {
    std::vector<double> x, y;
    for (const auto& p : rep.points) x.push_back(p.lambda), y.push_back(p.min_u);
    write_dat(out, "maxprinciple_min_u.dat", x, y);
  }
  return 0;
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::Info: return "info";
    case Command::Flow: return "flow";
    case Command::Green: return "green";
    case Command::Bubble: return "bubble";
    case Command::MaxPrinciple: return "maxprinciple";
  }
  return "unknown";
}

Command command_from_string(const std::string& s) {
  static const std::map<std::string, Command> table{{"info", Command::Info},
                                                     {"flow", Command::Flow},
                                                     {"green", Command::Green},
                                                     {"bubble", Command::Bubble},
                                                     {"maxprinciple", Command::MaxPrinciple}};
  auto it = table.find(s);
  if (it == table.end()) throw Error(ErrorKind::InvalidArgument, fmt::format("unknown subcommand '{}'", s));
  return it->second;
}

DiscPtr make_discretization(const ExperimentConfig& cfg) {
  return build_discretization(cfg.model, cfg.discretization.symmetry, cfg.discretization.mode_count,
                              cfg.discretization.circle_mode_count);
}

std::string error_json(const std::string& kind, const std::string& message) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  return j.dump();
}

int run_command(const ExperimentConfig& cfg, Command cmd, const RunOptions& opt, std::ostream& log) {
  OutputDir out(opt.out_dir ? fs::path(*opt.out_dir) : fs::path(cfg.output.dir));
  switch (cmd) {
    case Command::Info: return cmd_info(cfg, out, log);
    case Command::Flow: return cmd_flow(cfg, opt, out, log);
    case Command::Green: return cmd_green(cfg, out, log);
    case Command::Bubble: return cmd_bubble(cfg, out, log);
    case Command::MaxPrinciple: return cmd_maxprinciple(cfg, opt, out, log);
  }
  return 1;
}

}  // namespace qcurv

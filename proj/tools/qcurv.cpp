#include "qcurv/commands.hpp"
#include "qcurv/config.hpp"
#include "qcurv/error.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Q-curvature experiments on model manifolds"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"info", "curvature data and admissibility of the model"},
      {"flow", "run the normalized flow and stream monitors"},
      {"green", "Green's functions and their expansions"},
      {"bubble", "bubble quotients and Sobolev deficits"},
      {"maxprinciple", "positivity along the path from 1 to u"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    qcurv::ExperimentConfig cfg = qcurv::load_config(config_path);
    qcurv::RunOptions opt;
    opt.seed = seed;
    if (!out_dir.empty()) opt.out_dir = out_dir;
    return qcurv::run_command(cfg, qcurv::command_from_string(name), opt, std::cout);
  } catch (const qcurv::Error& e) {
    std::cerr << qcurv::error_json(qcurv::to_string(e.kind()), e.what()) << "\n";
    return e.kind() == qcurv::ErrorKind::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << qcurv::error_json("internal", e.what()) << "\n";
    return 1;
  }
}

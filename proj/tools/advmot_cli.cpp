// advmot: adversarial risk of multiclass classification via multimarginal transport.
//
//   advmot solve    --input data.csv --epsilon 0.3 [--mode exact|sinkhorn] [--eta 0.01]
//   advmot sweep    --input data.csv --config sweep.json
//   advmot classify --input data.csv --epsilon 0.5 --grid "-3,3,-3,3,50"
//   advmot validate [--seed 7]

#include "advmot/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Adversarial risk, robust classifiers and optimal attacks for labeled point clouds"};
  app.require_subcommand(1);

  std::string input, config_path, mode, out_dir, grid;
  double epsilon = -1.0, eta = -1.0;
  long long seed = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", input, "CSV with header x0,...,label[,weight]");
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--mode", mode, "exact or sinkhorn");
    sub->add_option("--epsilon", epsilon, "ball radius of the adversarial budget");
    sub->add_option("--eta", eta, "entropic regularization for sinkhorn mode");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--grid", grid, "xmin,xmax,ymin,ymax,res");
  };
  for (const char* name : {"solve", "sweep", "classify", "validate"}) {
    add_common(app.add_subcommand(name, std::string(name) + " subcommand"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : advmot::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  advmot::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = advmot::load_config(config_path);
    if (!input.empty()) cfg.input = input;
    if (!mode.empty()) cfg.solver.mode = advmot::parse_mode(mode);
    if (epsilon >= 0.0) cfg.cost = cfg.cost.is_ball() ? cfg.cost.with_epsilon(epsilon) : advmot::CostSpec::ball(epsilon);
    if (eta > 0.0) cfg.solver.eta = eta;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!grid.empty()) cfg.grid = advmot::parse_grid(grid);
  } catch (const std::exception& e) {
    std::cout << advmot::error_record("config", e.what()) << "\n";
    return advmot::kExitConfig;
  }
  return advmot::run_command(command, cfg, std::cout, std::cerr);
}

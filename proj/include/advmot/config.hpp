#ifndef ADVMOT_CONFIG_HPP_
#define ADVMOT_CONFIG_HPP_

#include "advmot/ground_cost.hpp"
#include "advmot/mot.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace advmot {

struct SolverConfig {
  MotMode mode = MotMode::Exact;
  double eta = 0.01;
  double tol = 1e-6;
  long max_iter = 10000;
};

/// 2-D bounding box sampled on a res x res lattice.
struct GridConfig {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  int res = 2;
};

/// Everything a subcommand needs. Populated from a JSON document, then
/// overridden by command-line flags.
struct RunConfig {
  std::string input;
  CostSpec cost = CostSpec::ball(0.3);
  SolverConfig solver;
  std::vector<double> sweep_epsilons;
  std::optional<GridConfig> grid;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::optional<int> num_classes;
  /// Rescale the input to total mass 1 after loading.
  bool normalize = false;
};

/// Parses {"input", "cost", "solver", "sweep", "grid", "out", "seed",
/// "num_classes", "normalize"}. Throws InputError on malformed documents.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// "xmin,xmax,ymin,ymax,res".
GridConfig parse_grid(const std::string& text);

MotMode parse_mode(const std::string& text);

/// Checks cross-field invariants (increasing grids, res >= 2, input present when needed).
void validate_config(const RunConfig& cfg, bool needs_input);

std::string config_to_json(const RunConfig& cfg);

}  // namespace advmot

#endif  // ADVMOT_CONFIG_HPP_

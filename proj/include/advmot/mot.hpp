#ifndef ADVMOT_MOT_HPP_
#define ADVMOT_MOT_HPP_

#include "advmot/barycenter.hpp"
#include "advmot/ground_cost.hpp"
#include "advmot/lp.hpp"
#include "advmot/measure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace advmot {

struct MotOptions {
  /// Cap on (n+1)^K tensor entries.
  double max_tensor_entries = 5e7;
  /// Cap on LP columns for the exact solve.
  double max_exact_columns = 3e5;
};

/// Ghost-augmented multimarginal problem: K copies of the marginal
/// nu = mu / (2 M) + delta_ghost / 2 and the cost tensor cbar(z) = B* of the
/// local measure (1/K) sum_l delta_{z_l}.
struct MotProblem {
  LabeledMeasure measure;
  CostSpec spec;
  int num_classes = 2;
  GhostIndex ghost{0};
  double total_mass = 0.0;
  Eigen::VectorXd nu;
  /// Flattened (n+1)^K tensor; coordinate j has stride (n+1)^j. +inf marks masked entries.
  Eigen::VectorXd tensor;
  std::size_t distinct_local_problems = 0;

  std::size_t base() const { return ghost.size(); }
  std::size_t num_entries() const { return static_cast<std::size_t>(tensor.size()); }
  std::vector<std::size_t> unravel(std::size_t linear) const;
  std::size_t ravel(std::span<const std::size_t> tuple) const;
  /// Entries of a tuple as labeled points (nullopt for the ghost).
  std::vector<std::optional<LabeledPoint>> entries(std::size_t linear) const;
};

MotProblem build_problem(const LabeledMeasure& m, const CostSpec& spec, const MotOptions& opt = {});

enum class MotMode { Exact, Entropic };

enum class MotStatus { Optimal, Converged, NotConverged, InfeasibleKernel, Failed };

std::string to_string(MotStatus s);
std::string to_string(MotMode m);

struct MotSolution {
  MotMode mode = MotMode::Exact;
  MotStatus status = MotStatus::Failed;
  double eta = 0.0;
  /// Dense coupling over the tensor.
  Eigen::VectorXd coupling;
  /// <cbar, coupling>.
  double value = 0.0;
  /// Entropic mode: value of the unrounded Sinkhorn coupling.
  double raw_value = 0.0;
  /// sum_j <phi_j, nu> for the reported potentials.
  double dual_value = 0.0;
  std::vector<Eigen::VectorXd> potentials;
  /// Largest l1 marginal error of the Sinkhorn iterate (before rounding).
  double marginal_residual = 0.0;
  long iterations = 0;
  double duality_gap = 0.0;

  std::size_t support_size(double threshold = 0.0) const;
};

MotSolution solve_exact(const MotProblem& p, const MotOptions& opt = {});

struct SinkhornOptions {
  double eta = 0.01;
  double tol = 1e-6;
  long max_iter = 10000;
  /// Round the iterate onto the transport polytope when no entry is masked.
  bool round = true;
};

MotSolution solve_sinkhorn(const MotProblem& p, const SinkhornOptions& opt = {});

/// K marginals of a coupling.
std::vector<Eigen::VectorXd> marginals(const MotProblem& p, const Eigen::VectorXd& coupling);

/// Largest sum_j phi_j(z_j) - cbar(z) over unmasked tuples.
double max_dual_violation(const MotProblem& p, const std::vector<Eigen::VectorXd>& potentials);

double dual_objective(const MotProblem& p, const std::vector<Eigen::VectorXd>& potentials);

struct DualCertificate {
  std::vector<Eigen::VectorXd> potentials;
  double shift = 0.0;
  double dual_value = 0.0;
  double max_violation = 0.0;
};

/// Shifts phi_1 down by the largest constraint violation so that the potentials
/// are feasible, then recomputes the dual objective.
DualCertificate extract_duals(const MotProblem& p, const MotSolution& sol);

/// Averages the coupling over coordinate permutations (all K! of them, or 720
/// seeded random ones when K! > 720). Potentials are averaged the same way.
MotSolution symmetrize(const MotProblem& p, const MotSolution& sol, std::uint64_t seed = 0);

/// B* = 2 M v and R* = M - 2 M v.
double bstar_from_value(const MotProblem& p, double v);
double risk_from_value(const MotProblem& p, double v);

}  // namespace advmot

#endif  // ADVMOT_MOT_HPP_

#ifndef ADVMOT_BARYCENTER_HPP_
#define ADVMOT_BARYCENTER_HPP_

#include "advmot/ground_cost.hpp"
#include "advmot/lp.hpp"
#include "advmot/measure.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace advmot {

/// Nested-set split of u in [0,1]^K (max u = 1) into r_A >= 0 with
/// sum_A r_A = 1 and sum_{A containing i} r_A = u_i. Only nonzero r_A are kept.
std::map<SubsetMask, double> decompose_mass(std::span<const double> u);

/// One active column of the stratified plan: a tuple with one atom per class
/// of `subset` (ordered by class), the mass it carries and its barycenter.
struct PlanEntry {
  SubsetMask subset = 0;
  std::vector<std::size_t> atoms;
  double mass = 0.0;
  double set_cost = 0.0;
  Point witness;
};

/// `mass` of atom `atom` is moved to `target`.
struct Move {
  std::size_t atom = 0;
  Point target;
  double mass = 0.0;
  double cost = 0.0;
};

struct AttackPlan {
  /// attacks[i-1] is the perturbed class-i measure.
  std::vector<PointMeasure> attacks;
  PointMeasure lambda;
  std::vector<Move> moves;
  /// sum_i C(mu_i, attacked mu_i) along the moves.
  double transport_cost = 0.0;
};

struct BarycenterOptions {
  std::size_t max_columns = 400'000;
  int max_classes = 8;
  LpTolerances lp;
};

struct BarycenterSolution {
  double value = 0.0;
  std::vector<PlanEntry> plan;
  PointMeasure lambda;
  std::vector<PointMeasure> attacks;
  std::vector<Move> moves;
  double transport_cost = 0.0;
  /// Row duals, one per atom of the input measure. They satisfy
  /// sum_{i in A} duals(x_i) <= 1 + c_A on every finite tuple.
  Eigen::VectorXd atom_duals;
  std::size_t num_columns = 0;
  /// sum_A prod_{i in A} n_i.
  double column_bound = 0.0;
  LpSolution lp;
};

/// Exact optimum of the stratified LP over all tuples with finite c_A.
/// Throws ResourceCapError when the number of finite columns exceeds the cap.
BarycenterSolution solve_generalized_barycenter(const LabeledMeasure& m, const CostSpec& spec,
                                                const BarycenterOptions& opt = {});

/// Rebuilds lambda, the attacked class measures and the moves from the plan.
AttackPlan reconstruct_attack(const LabeledMeasure& m, const std::vector<PlanEntry>& plan, const CostSpec& spec);
AttackPlan reconstruct_attack(const LabeledMeasure& m, const BarycenterSolution& sol, const CostSpec& spec);

/// A tuple entry moves `mass` (out of the 1/K it carries) to `target`.
struct LocalMove {
  std::size_t entry = 0;
  Point target;
  double mass = 0.0;
};

struct LocalSolution {
  double value = 0.0;
  std::vector<LocalMove> moves;
};

/// B* of (1/K) * sum over non-ghost entries of delta_{z_l}. Ghosts are nullopt.
LocalSolution local_value(std::span<const std::optional<LabeledPoint>> entries, int num_classes,
                          const CostSpec& spec);

}  // namespace advmot

#endif  // ADVMOT_BARYCENTER_HPP_

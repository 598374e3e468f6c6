#ifndef ADVMOT_LP_HPP_
#define ADVMOT_LP_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace advmot {

/// Opaque, lexicographically ordered column label.
using ColumnTag = std::vector<std::int64_t>;

/// min c.x  s.t.  A x = b, x >= 0.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd constraints;
  Eigen::VectorXd rhs;
  /// Optional; when present it has one entry per column and fixes the solve order.
  std::vector<ColumnTag> tags;

  Eigen::Index num_rows() const { return constraints.rows(); }
  Eigen::Index num_cols() const { return constraints.cols(); }
};

/// Every tolerance the solver uses, in one place.
struct LpTolerances {
  double primal_residual = 1e-9;         // times (1 + |b|_inf)
  double complementary_slackness = 1e-8;
  double duality_gap = 1e-8;             // times (1 + |obj|)
  double dual_feasibility = 1e-8;
  double reduced_cost = 1e-11;
  double pivot = 1e-11;
  double phase_one = 1e-9;               // times (1 + |b|_inf)
  int refactor_every = 50;
  long max_iterations = 2'000'000;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  Eigen::VectorXd primal;
  /// One per row, in the caller's row orientation: c - A^T y >= 0 at optimum.
  Eigen::VectorXd duals;
  double objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double complementary_slackness = 0.0;
  double duality_gap = 0.0;
  long iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

/// Two-phase revised simplex with Bland's rule. Columns are processed in tag
/// order (or input order if untagged), so results do not depend on how the
/// caller happened to order its columns.
LpSolution solve_lp(const LinearProgram& lp, const LpTolerances& tol = {});

}  // namespace advmot

#endif  // ADVMOT_LP_HPP_

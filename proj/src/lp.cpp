#include "advmot/lp.hpp"

#include "advmot/measure.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace advmot {

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

enum class RunResult { Optimal, Unbounded, IterationLimit, Singular };

// Columns 0..n-1 are structural, n..n+m-1 are the artificials (unit columns).
class RevisedSimplex {
 public:
  RevisedSimplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const LpTolerances& tol)
      : a_(a), b_(b), tol_(tol), m_(a.rows()), n_(a.cols()) {
    basis_.resize(static_cast<std::size_t>(m_));
    basic_.assign(static_cast<std::size_t>(n_ + m_), 0);
    for (Eigen::Index i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      basic_[n_ + i] = 1;
    }
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    xb_ = b_;
  }

  RunResult run(const Eigen::VectorXd& cost, bool artificials_may_enter) {
    Eigen::VectorXd cb(m_), y(m_), u(m_);
    long since_refactor = 0;
    while (true) {
      if (iterations_ >= tol_.max_iterations) return RunResult::IterationLimit;
      for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      y.noalias() = binv_.transpose() * cb;

      // Bland: first improving column.
      Eigen::Index enter = -1;
      const Eigen::Index limit = artificials_may_enter ? n_ + m_ : n_;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (basic_[j]) continue;
        const double d = cost[j] - (j < n_ ? y.dot(a_.col(j)) : y[j - n_]);
        if (d < -tol_.reduced_cost) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return RunResult::Optimal;

      column(enter, u);
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (u[i] <= tol_.pivot) continue;
        const double ratio = std::max(xb_[i], 0.0) / u[i];
        if (leave < 0 || ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return RunResult::Unbounded;

      pivot(leave, enter, u);
      ++iterations_;
      if (++since_refactor >= tol_.refactor_every) {
        if (!refactor()) return RunResult::Singular;
        since_refactor = 0;
      }
    }
  }

  // After phase one: pivot zero-level artificials out where possible. Rows whose
  // artificial cannot leave are linearly dependent on the others; the artificial
  // stays basic at zero and its row dual comes out as 0.
  void expel_artificials() {
    Eigen::VectorXd u(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      const Eigen::RowVectorXd row = binv_.row(i) * a_;
      Eigen::Index enter = -1;
      double best = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (basic_[j]) continue;
        if (std::abs(row[j]) > best) {
          best = std::abs(row[j]);
          enter = j;
        }
      }
      if (enter < 0) continue;
      column(enter, u);
      pivot(i, enter, u);
    }
    refactor();
  }

  bool refactor() {
    Eigen::MatrixXd bm(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) {
        bm.col(i) = a_.col(basis_[i]);
      } else {
        bm.col(i).setZero();
        bm(basis_[i] - n_, i) = 1.0;
      }
    }
    if (m_ == 0) return true;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bm);
    if (!(std::abs(lu.determinant()) > 0.0) || !std::isfinite(lu.determinant())) return false;
    binv_ = lu.inverse();
    xb_.noalias() = binv_ * b_;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (xb_[i] < 0.0 && xb_[i] > -1e-12) xb_[i] = 0.0;
    return binv_.allFinite();
  }

  double objective(const Eigen::VectorXd& cost) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) s += cost[basis_[i]] * xb_[i];
    return s;
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = std::max(xb_[i], 0.0);
    return x;
  }

  Eigen::VectorXd duals(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
    return binv_.transpose() * cb;
  }

  long iterations() const { return iterations_; }

 private:
  void column(Eigen::Index j, Eigen::VectorXd& u) const {
    if (j < n_) {
      u.noalias() = binv_ * a_.col(j);
    } else {
      u = binv_.col(j - n_);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index enter, const Eigen::VectorXd& u) {
    const double ur = u[r];
    binv_.row(r) /= ur;
    xb_[r] /= ur;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r || u[i] == 0.0) continue;
      binv_.row(i) -= u[i] * binv_.row(r);
      xb_[i] -= u[i] * xb_[r];
      if (xb_[i] < 0.0 && xb_[i] > -1e-12) xb_[i] = 0.0;
    }
    basic_[basis_[r]] = 0;
    basis_[r] = enter;
    basic_[enter] = 1;
  }

  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& b_;
  const LpTolerances& tol_;
  Eigen::Index m_, n_;
  std::vector<Eigen::Index> basis_;
  std::vector<char> basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  long iterations_ = 0;
};

LpStatus to_status(RunResult r) {
  switch (r) {
    case RunResult::Optimal: return LpStatus::Optimal;
    case RunResult::Unbounded: return LpStatus::Unbounded;
    case RunResult::IterationLimit: return LpStatus::IterationLimit;
    case RunResult::Singular: return LpStatus::NumericalFailure;
  }
  return LpStatus::NumericalFailure;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpTolerances& tol) {
  const Eigen::Index m = lp.num_rows(), n = lp.num_cols();
  if (lp.objective.size() != n || lp.rhs.size() != m) throw InputError("linear program dimensions are inconsistent");
  if (!lp.tags.empty() && static_cast<Eigen::Index>(lp.tags.size()) != n)
    throw InputError("linear program needs one tag per column");
  if (!lp.constraints.allFinite() || !lp.objective.allFinite() || !lp.rhs.allFinite())
    throw InputError("linear program entries must be finite");

  // Canonical column order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (!lp.tags.empty()) {
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return lp.tags[a] < lp.tags[b]; });
  }

  Eigen::MatrixXd a(m, n);
  Eigen::VectorXd c(n), b = lp.rhs;
  for (Eigen::Index k = 0; k < n; ++k) {
    a.col(k) = lp.constraints.col(order[k]);
    c[k] = lp.objective[order[k]];
  }
  Eigen::VectorXd sign = Eigen::VectorXd::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      sign[i] = -1.0;
      b[i] = -b[i];
      a.row(i) *= -1.0;
    }
  }
  const double bnorm = m > 0 ? b.cwiseAbs().maxCoeff() : 0.0;

  LpSolution sol;
  RevisedSimplex simplex(a, b, tol);

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  RunResult r = simplex.run(phase1, true);
  if (r != RunResult::Optimal) {
    sol.status = r == RunResult::Unbounded ? LpStatus::NumericalFailure : to_status(r);
    sol.iterations = simplex.iterations();
    return sol;
  }
  if (simplex.objective(phase1) > tol.phase_one * (1.0 + bnorm)) {
    sol.status = LpStatus::Infeasible;
    sol.iterations = simplex.iterations();
    return sol;
  }
  simplex.expel_artificials();

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  r = simplex.run(phase2, false);
  sol.iterations = simplex.iterations();
  if (r != RunResult::Optimal) {
    sol.status = to_status(r);
    return sol;
  }

  // Basic values at roundoff level are degenerate zeros; clearing them keeps
  // supports (and everything read back from them) free of 1e-17 atoms.
  Eigen::VectorXd xs = simplex.primal();
  const double zero_cut = 1e-14 * (1.0 + bnorm);
  for (auto& v : xs) if (std::abs(v) <= zero_cut) v = 0.0;
  const Eigen::VectorXd ys = simplex.duals(phase2);
  sol.primal.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) sol.primal[order[k]] = xs[k];
  sol.duals = ys.cwiseProduct(sign);

  // Certify against the problem as given.
  // Summed in canonical order so that the value does not depend on caller column order.
  sol.objective = c.dot(xs.head(n));
  sol.dual_objective = lp.rhs.dot(sol.duals);
  const Eigen::VectorXd slack = lp.objective - lp.constraints.transpose() * sol.duals;
  sol.primal_residual = m > 0 ? (lp.constraints * sol.primal - lp.rhs).cwiseAbs().maxCoeff() : 0.0;
  sol.complementary_slackness = n > 0 ? sol.primal.cwiseProduct(slack).cwiseAbs().maxCoeff() : 0.0;
  sol.duality_gap = std::abs(sol.objective - sol.dual_objective);
  const double min_slack = n > 0 ? slack.minCoeff() : 0.0;

  const bool certified = sol.primal_residual <= tol.primal_residual * (1.0 + bnorm) &&
                         sol.complementary_slackness <= tol.complementary_slackness &&
                         sol.duality_gap <= tol.duality_gap * (1.0 + std::abs(sol.objective)) &&
                         min_slack >= -tol.dual_feasibility;
  sol.status = certified ? LpStatus::Optimal : LpStatus::NumericalFailure;
  return sol;
}

}  // namespace advmot

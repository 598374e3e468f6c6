#ifndef ADVMOT_CLASSIFIER_HPP_
#define ADVMOT_CLASSIFIER_HPP_

#include "advmot/barycenter.hpp"
#include "advmot/mot.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace advmot {

/// psi_i on the data atoms, derived from MOT potentials or barycenter duals.
struct PotentialBundle {
  LabeledMeasure measure;
  /// psi of atom a (for the atom's own class).
  Eigen::VectorXd psi;
  /// Potentials phi_j on the n+1 marginal atoms, when built from MOT duals.
  std::vector<Eigen::VectorXd> phi;
  /// True for potentials coming from the entropic solver.
  bool approximate = false;
  /// sum_a psi(a) mu(a); equals B* for optimal exact duals.
  double dual_value = 0.0;
  /// Largest sum_{i in A} psi_i(x_i) - 1 - c_A seen during the feasibility check.
  double max_violation = 0.0;
  std::size_t checked_tuples = 0;
  bool exhaustive = false;

  double psi_plus(std::size_t atom) const { return std::max(psi[static_cast<Eigen::Index>(atom)], 0.0); }
};

struct PsiCheckOptions {
  double exhaustive_limit = 1e6;
  std::size_t samples = 100000;
  double fail_tolerance = 1e-6;
  std::uint64_t seed = 0;
};

/// psi_i(x) = sum_j phi_j(x, i) + sum_j phi_j(ghost), followed by a feasibility
/// check (exhaustive or sampled). Throws when a violation exceeds the tolerance.
PotentialBundle build_psi(const std::vector<Eigen::VectorXd>& phi, const LabeledMeasure& m, const CostSpec& spec,
                          bool approximate = false, const PsiCheckOptions& opt = {});

/// Uses per-atom duals of the stratified LP directly as psi.
PotentialBundle bundle_from_barycenter(const BarycenterSolution& sol, const LabeledMeasure& m, const CostSpec& spec,
                                       const PsiCheckOptions& opt = {});

/// Largest sum_{i in A} psi_i(x_i) - 1 - c_A; also reports how many tuples were visited.
double psi_violation(const LabeledMeasure& m, const Eigen::VectorXd& psi, const CostSpec& spec,
                     const PsiCheckOptions& opt, std::size_t* checked = nullptr, bool* exhaustive = nullptr);

struct Classification {
  /// f*_i for i = 1..K; -inf when no class-i atom can reach the query.
  std::vector<double> scores;
  /// argmax with lowest-index ties; 0 means abstain.
  int label = 0;
};

Classification classify(const PotentialBundle& bundle, const CostSpec& spec, const Point& query);

/// Aggregated attack with per-move provenance.
struct AttackMeasure {
  std::vector<PointMeasure> classes;
  std::vector<Move> moves;
  double transport_cost = 0.0;

  double class_mass(int label) const { return classes[static_cast<std::size_t>(label - 1)].mass(); }
};

/// Integrates the local optimal attacks of every coupling atom against pi.
AttackMeasure build_attack(const MotProblem& p, const MotSolution& sol, double threshold = 0.0);

AttackMeasure attack_from_barycenter(const BarycenterSolution& sol);

/// sum_i int f_i d(attack_i) for the given classifier f (one score vector per point query).
double classification_power(const PotentialBundle& bundle, const CostSpec& spec, const AttackMeasure& attack);

/// max_f B(f, attack): sum over points of max_i attack_i({x}).
double learner_best_response(const std::vector<PointMeasure>& attack);

struct SaddleReport {
  std::uint64_t seed = 0;
  int learner_trials = 0;
  int adversary_trials = 0;
  double value = 0.0;          // B(f*, attack*) + C(mu, attack*)
  double b_value = 0.0;
  double c_value = 0.0;
  double bstar = 0.0;
  double worst_learner_excess = -kInf;    // max of B(f, attack*) - B(f*, attack*)
  double worst_adversary_deficit = -kInf; // max of value - (B(f*, attack) + C(mu, attack))
  int learner_violations = 0;
  int adversary_violations = 0;
  bool value_matches = false;
  std::string first_violation;

  bool ok() const { return value_matches && learner_violations == 0 && adversary_violations == 0; }
};

struct SaddleOptions {
  int learner_trials = 1000;
  int adversary_trials = 1000;
  std::uint64_t seed = 12345;
  double tolerance = 1e-8;
  double value_tolerance = 1e-6;
};

/// Random learner and adversary deviations around (f*, attack*). Refuses
/// approximate (entropic) potentials.
SaddleReport verify_saddle(const PotentialBundle& bundle, const AttackMeasure& attack, const CostSpec& spec,
                           double bstar, const SaddleOptions& opt = {});

struct RiskResult {
  double bstar = 0.0;
  double risk = 0.0;
  std::string mode;
};

/// Exact mode uses the stratified LP; sinkhorn mode uses 2 M v_eta (a bound).
RiskResult adversarial_risk(const LabeledMeasure& m, const CostSpec& spec, MotMode mode,
                            const SinkhornOptions& sinkhorn = {});

}  // namespace advmot

#endif  // ADVMOT_CLASSIFIER_HPP_

#ifndef ADVMOT_REFERENCE_CASES_HPP_
#define ADVMOT_REFERENCE_CASES_HPP_

#include "advmot/ground_cost.hpp"
#include "advmot/measure.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace advmot {

/// Two-class value from the two-marginal transport LP over couplings of mu with
/// itself, cost (cost_eps + 1) / 2 where cost_eps is 0 for distinct labels with
/// reachable midpoint and 1 otherwise. Throws unless K = 2.
double binary_value(const LabeledMeasure& m, double epsilon, Metric metric = Metric::L2);

enum class ToyCaseId { Separated, CommonPoint, OnePair, PairwiseNoTriple_I, PairwiseNoTriple_II };

std::string to_string(ToyCaseId id);

/// Three labeled points (one per class) with a Ball cost.
struct ToyCase {
  ToyCaseId id = ToyCaseId::Separated;
  std::array<Point, 3> points;
  double epsilon = 1.0;
  std::array<double, 3> weights{};
  double expected_bstar = 0.0;
  std::string attack;
  std::string classifier;
  /// A distance sits exactly on 2 epsilon (or the enclosing radius on epsilon).
  bool boundary = false;
  std::string note;

  LabeledMeasure measure() const;
  CostSpec cost() const { return CostSpec::ball(epsilon); }
};

/// Identifies the case from the geometry; weights must be positive, sum to 1
/// and be sorted descending. Throws InputError when no case applies.
ToyCase classify_toy(const std::array<Point, 3>& points, double epsilon, const std::array<double, 3>& weights);

/// Concrete fixtures used by the tests and the validate command.
std::vector<ToyCase> toy_catalog();

/// JSON array of the catalog entries.
std::string catalog_to_json(const std::vector<ToyCase>& cases);

/// Named concrete geometries (epsilon = 1).
std::array<Point, 3> separated_triangle();   // side 4
std::array<Point, 3> clustered_triangle();   // all within 0.8 of the origin
std::array<Point, 3> one_pair_line();        // d12 = 1.5, third far away
std::array<Point, 3> pairwise_triangle();    // side 1.9, circumradius > 1

struct RandomInstance {
  LabeledMeasure measure;
  CostSpec spec;
};

/// Small random instance: 1..max_atoms atoms in [0,2]^d with random classes
/// and weights, K drawn from `classes`, ball or power cost.
RandomInstance random_instance(std::mt19937_64& rng, int max_atoms, const std::vector<int>& classes);

}  // namespace advmot

#endif  // ADVMOT_REFERENCE_CASES_HPP_

#include "advmot/reference_cases.hpp"

#include "advmot/lp.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace advmot {

double binary_value(const LabeledMeasure& m, double epsilon, Metric metric) {
  if (m.num_classes() != 2) throw InputError("binary_value needs exactly two classes");
  const CostSpec spec = CostSpec::ball(epsilon, metric);
  const auto n = static_cast<Eigen::Index>(m.size());
  LinearProgram lp;
  lp.constraints = Eigen::MatrixXd::Zero(2 * n, n * n);
  lp.objective.resize(n * n);
  lp.rhs.resize(2 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    lp.rhs[a] = m.atom(static_cast<std::size_t>(a)).weight;
    lp.rhs[n + a] = lp.rhs[a];
  }
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto& x = m.atom(static_cast<std::size_t>(a));
      const auto& y = m.atom(static_cast<std::size_t>(b));
      const std::array<Point, 2> pair{x.x, y.x};
      const bool meet = x.label != y.label && set_cost(spec, pair).finite();
      const Eigen::Index col = a * n + b;
      lp.objective[col] = ((meet ? 0.0 : 1.0) + 1.0) / 2.0;
      lp.constraints(a, col) = 1.0;
      lp.constraints(n + b, col) = 1.0;
    }
  }
  const LpSolution sol = solve_lp(lp);
  if (!sol.optimal()) throw std::runtime_error("binary transport LP failed: " + to_string(sol.status));
  return sol.objective;
}

std::string to_string(ToyCaseId id) {
  switch (id) {
    case ToyCaseId::Separated: return "1";
    case ToyCaseId::CommonPoint: return "2";
    case ToyCaseId::OnePair: return "3";
    case ToyCaseId::PairwiseNoTriple_I: return "4i";
    case ToyCaseId::PairwiseNoTriple_II: return "4ii";
  }
  return "?";
}

LabeledMeasure ToyCase::measure() const {
  std::vector<LabeledPoint> pts;
  for (int i = 0; i < 3; ++i) pts.push_back(LabeledPoint{points[i], i + 1, weights[i]});
  return LabeledMeasure::from_points(std::move(pts), 3);
}

ToyCase classify_toy(const std::array<Point, 3>& points, double epsilon, const std::array<double, 3>& w) {
  constexpr double tol = 1e-9;
  if (!(epsilon > 0.0)) throw InputError("toy cases need epsilon > 0");
  if (!(w[0] >= w[1] && w[1] >= w[2] && w[2] > 0.0)) throw InputError("toy weights must be positive and descending");
  if (std::abs(w[0] + w[1] + w[2] - 1.0) > 1e-12) throw InputError("toy weights must sum to 1");

  ToyCase tc;
  tc.points = points;
  tc.epsilon = epsilon;
  tc.weights = w;

  const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<bool, 3> close{};
  int n_close = 0;
  for (int q = 0; q < 3; ++q) {
    const double d = (points[pairs[q].first] - points[pairs[q].second]).norm();
    if (std::abs(d - 2.0 * epsilon) <= tol) tc.boundary = true;
    close[q] = d <= 2.0 * epsilon + tol;
    n_close += close[q];
  }
  Eigen::MatrixXd cols(points[0].size(), 3);
  for (int i = 0; i < 3; ++i) cols.col(i) = points[i];
  const double radius = min_enclosing_ball(cols).radius;
  if (std::abs(radius - epsilon) <= tol) tc.boundary = true;
  if (tc.boundary) tc.note = "boundary; expected value ambiguous";

  if (radius <= epsilon + tol) {
    tc.id = ToyCaseId::CommonPoint;
    tc.expected_bstar = w[0];
    tc.attack = "every class moved to a common point";
    tc.classifier = "class 1 on the common region";
  } else if (n_close == 0) {
    tc.id = ToyCaseId::Separated;
    tc.expected_bstar = 1.0;
    tc.attack = "identity";
    tc.classifier = "each point keeps its own class";
  } else if (n_close == 1) {
    tc.id = ToyCaseId::OnePair;
    int q = close[0] ? 0 : (close[1] ? 1 : 2);
    const int i = pairs[q].first, j = pairs[q].second, k = 3 - i - j;
    tc.expected_bstar = std::max(w[i], w[j]) + w[k];
    tc.attack = "the close pair meets at its midpoint; the far point stays";
    tc.classifier = "the heavier class of the pair wins the overlap";
  } else if (n_close == 3) {
    if (w[0] < w[1] + w[2]) {
      tc.id = ToyCaseId::PairwiseNoTriple_I;
      tc.expected_bstar = 0.5;
      tc.attack = "pairs meet at the three pairwise midpoints";
      tc.classifier = "weak partition with value 1/2 on each midpoint";
    } else {
      tc.id = ToyCaseId::PairwiseNoTriple_II;
      tc.expected_bstar = w[0];
      tc.attack = "classes 2 and 3 meet class 1 at their midpoints with it";
      tc.classifier = "class 1 wherever it is reachable";
    }
  } else {
    throw InputError("three-point geometry matches no reference case (two close pairs)");
  }
  return tc;
}

std::array<Point, 3> separated_triangle() {
  return {Point{{0.0, 0.0}}, Point{{4.0, 0.0}}, Point{{2.0, 2.0 * std::sqrt(3.0)}}};
}

std::array<Point, 3> clustered_triangle() {
  const double r = 0.8;
  return {Point{{0.0, r}}, Point{{-r * std::sqrt(3.0) / 2.0, -r / 2.0}}, Point{{r * std::sqrt(3.0) / 2.0, -r / 2.0}}};
}

std::array<Point, 3> one_pair_line() { return {Point{{0.0, 0.0}}, Point{{1.5, 0.0}}, Point{{10.0, 0.0}}}; }

std::array<Point, 3> pairwise_triangle() {
  const double s = 1.9;
  return {Point{{0.0, 0.0}}, Point{{s, 0.0}}, Point{{s / 2.0, s * std::sqrt(3.0) / 2.0}}};
}

std::vector<ToyCase> toy_catalog() {
  const std::array<double, 3> third{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const std::array<double, 3> a{0.5, 0.3, 0.2};
  const std::array<double, 3> b{0.6, 0.25, 0.15};
  const std::array<double, 3> c{0.4, 0.35, 0.25};
  return {
      classify_toy(separated_triangle(), 1.0, third),
      classify_toy(separated_triangle(), 1.0, a),
      classify_toy(clustered_triangle(), 1.0, a),
      classify_toy(one_pair_line(), 1.0, a),
      classify_toy(pairwise_triangle(), 1.0, c),
      classify_toy(pairwise_triangle(), 1.0, b),
      classify_toy(pairwise_triangle(), 1.0, a),
  };
}

std::string catalog_to_json(const std::vector<ToyCase>& cases) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& tc : cases) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : tc.points) pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    arr.push_back({{"case", to_string(tc.id)},
                   {"points", pts},
                   {"epsilon", tc.epsilon},
                   {"weights", tc.weights},
                   {"expected_B_star", tc.expected_bstar},
                   {"attack", tc.attack},
                   {"classifier", tc.classifier},
                   {"boundary", tc.boundary}});
  }
  return arr.dump(2);
}

RandomInstance random_instance(std::mt19937_64& rng, int max_atoms, const std::vector<int>& classes) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int k = classes[std::uniform_int_distribution<std::size_t>(0, classes.size() - 1)(rng)];
  const int n = std::uniform_int_distribution<int>(1, max_atoms)(rng);
  const int d = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<LabeledPoint> pts;
  for (int a = 0; a < n; ++a) {
    LabeledPoint p;
    if (!pts.empty() && unif(rng) < 0.15) {
      p.x = pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)].x;
    } else {
      p.x.resize(d);
      for (int q = 0; q < d; ++q) p.x[q] = 2.0 * unif(rng);
    }
    p.label = std::uniform_int_distribution<int>(1, k)(rng);
    p.weight = 0.1 + unif(rng);
    pts.push_back(std::move(p));
  }
  RandomInstance inst;
  inst.measure = LabeledMeasure::from_points(std::move(pts), k);
  const double pick = unif(rng);
  if (pick < 0.4) {
    inst.spec = CostSpec::ball(0.1 + 1.1 * unif(rng), Metric::L2);
  } else if (pick < 0.55) {
    inst.spec = CostSpec::ball(0.1 + 1.1 * unif(rng), Metric::LInf);
  } else if (pick < 0.8) {
    inst.spec = CostSpec::power(2, 0.5 + 1.5 * unif(rng));
  } else {
    inst.spec = CostSpec::power(1, 0.5 + 1.5 * unif(rng));
  }
  return inst;
}

}  // namespace advmot

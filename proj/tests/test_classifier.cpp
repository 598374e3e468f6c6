#include "advmot/barycenter.hpp"
#include "advmot/classifier.hpp"
#include "advmot/mot.hpp"
#include "advmot/reference_cases.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace advmot;
using oracle::pt;

namespace {

LabeledMeasure three(const std::array<Point, 3>& p, std::array<double, 3> w) {
  return LabeledMeasure::from_points({{p[0], 1, w[0]}, {p[1], 2, w[1]}, {p[2], 3, w[2]}}, 3);
}

struct Exact {
  LabeledMeasure m;
  CostSpec spec;
  MotProblem p;
  MotSolution sol;
  PotentialBundle bundle;
  AttackMeasure attack;
  double bstar;
};

Exact exact_pipeline(const LabeledMeasure& m, const CostSpec& spec) {
  Exact e{m, spec, build_problem(m, spec), {}, {}, {}, 0.0};
  e.sol = solve_exact(e.p);
  e.bundle = build_psi(extract_duals(e.p, e.sol).potentials, m, spec);
  e.attack = build_attack(e.p, e.sol);
  e.bstar = bstar_from_value(e.p, e.sol.value);
  return e;
}

}  // namespace

TEST_CASE("build_psi from zero potentials") {
  const auto m = three(pairwise_triangle(), {0.4, 0.35, 0.25});
  const auto b = build_psi(std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Zero(4)), m, CostSpec::ball(1.0));
  CHECK(b.psi.isZero());
  CHECK(b.max_violation <= 0.0);
  CHECK(b.exhaustive);
}

TEST_CASE("psi on the separated binary instance") {
  const auto m = LabeledMeasure::from_points({{pt(0, 0), 1, 0.5}, {pt(3, 0), 2, 0.5}}, 2);
  const auto e = exact_pipeline(m, CostSpec::ball(1.0));
  CHECK(e.bundle.psi[0] == doctest::Approx(1.0));
  CHECK(e.bundle.psi[1] == doctest::Approx(1.0));
  CHECK(e.bundle.dual_value == doctest::Approx(1.0));
  CHECK(e.bstar == doctest::Approx(1.0));

  const auto at_x1 = classify(e.bundle, e.spec, pt(0, 0));
  CHECK(at_x1.scores[0] == doctest::Approx(1.0));
  CHECK(at_x1.scores[1] == -kInf);
  CHECK(at_x1.label == 1);
  CHECK(classify(e.bundle, e.spec, pt(10, 10)).label == 0);
}

TEST_CASE("psi on the pairwise triangle") {
  const auto m = three(pairwise_triangle(), {0.4, 0.35, 0.25});
  const auto e = exact_pipeline(m, CostSpec::ball(1.0));
  CHECK(e.bundle.exhaustive);
  CHECK(e.bundle.max_violation <= 1e-9);
  // Pairs are finite and tight at optimum. The triple has infinite cost, so its
  // constraint is vacuous and the unique optimum psi = (1/2, 1/2, 1/2) sums to 3/2.
  for (int i = 0; i < 3; ++i) CHECK(e.bundle.psi[i] == doctest::Approx(0.5));
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) CHECK(e.bundle.psi[i] + e.bundle.psi[j] == doctest::Approx(1.0));
  CHECK(e.bundle.dual_value == doctest::Approx(0.5));
}

TEST_CASE("tie-break and abstain") {
  PotentialBundle b;
  b.measure = LabeledMeasure::from_points({{pt(0, 0), 1, 1.0}, {pt(2, 0), 2, 1.0}}, 2);
  b.psi = Eigen::Vector2d(0.5, 0.5);
  const auto c = classify(b, CostSpec::ball(1.0), pt(1, 0));
  CHECK(c.scores == std::vector<double>{0.5, 0.5});
  CHECK(c.label == 1);
  CHECK(classify(b, CostSpec::ball(1.0), pt(1, 5)).label == 0);
}

TEST_CASE("infeasible potentials are rejected") {
  const auto m = three(pairwise_triangle(), {0.4, 0.35, 0.25});
  std::vector<Eigen::VectorXd> phi(3, Eigen::VectorXd::Zero(4));
  phi[0].head(3).setConstant(0.9);
  CHECK_THROWS_WITH(build_psi(phi, m, CostSpec::ball(1.0)), doctest::Contains("re-project"));
}

TEST_CASE("attacks from the exact coupling") {
  SUBCASE("common point, equal weights") {
    const auto e = exact_pipeline(three(clustered_triangle(), {1.0 / 3, 1.0 / 3, 1.0 / 3}), CostSpec::ball(1.0));
    for (int i = 0; i < 3; ++i) {
      REQUIRE(e.attack.classes[i].size() == 1);
      CHECK(e.attack.classes[i].points[0] == e.attack.classes[0].points[0]);
      CHECK(e.attack.classes[i].weights[0] == doctest::Approx(1.0 / 3));
    }
  }
  SUBCASE("separated: identity") {
    const auto pts = separated_triangle();
    const auto e = exact_pipeline(three(pts, {0.5, 0.3, 0.2}), CostSpec::ball(1.0));
    for (int i = 0; i < 3; ++i) {
      REQUIRE(e.attack.classes[i].size() == 1);
      CHECK(e.attack.classes[i].points[0] == pts[i]);
    }
  }
  SUBCASE("binary, close: both classes meet at the midpoint") {
    const auto m = LabeledMeasure::from_points({{pt(0, 0), 1, 0.5}, {pt(1.5, 0), 2, 0.5}}, 2);
    const auto e = exact_pipeline(m, CostSpec::ball(1.0));
    for (int i = 0; i < 2; ++i) {
      REQUIRE(e.attack.classes[i].size() == 1);
      CHECK((e.attack.classes[i].points[0] - pt(0.75, 0)).norm() < 1e-12);
      CHECK(e.attack.class_mass(i + 1) == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("saddle holds on the three-point cases") {
  for (const auto& tc : toy_catalog()) {
    if (tc.id == ToyCaseId::Separated) continue;
    const auto e = exact_pipeline(tc.measure(), tc.cost());
    const auto rep = verify_saddle(e.bundle, e.attack, e.spec, e.bstar);
    INFO("case " << to_string(tc.id) << ": " << rep.first_violation);
    CHECK(rep.ok());
    CHECK(rep.worst_learner_excess <= 1e-8);
    CHECK(rep.worst_adversary_deficit <= 1e-8);
    CHECK(rep.value == doctest::Approx(tc.expected_bstar).epsilon(1e-9));
  }
}

TEST_CASE("saddle verifier refuses entropic potentials") {
  const auto m = three(pairwise_triangle(), {0.4, 0.35, 0.25});
  const auto p = build_problem(m, CostSpec::ball(1.0));
  const auto s = solve_sinkhorn(p);
  const auto b = build_psi(extract_duals(p, s).potentials, m, CostSpec::ball(1.0), true);
  CHECK(b.approximate);
  CHECK_THROWS(verify_saddle(b, build_attack(p, s), CostSpec::ball(1.0), 0.5));
}

TEST_CASE("moving mass of classes 2 and 3 to their meeting point helps the learner") {
  const auto pts = pairwise_triangle();
  const double w1 = 0.6, w2 = 0.25, w3 = 0.15, kappa = w1 - w2 - w3, eta = 0.05;
  const Point x12 = (pts[0] + pts[1]) / 2, x13 = (pts[0] + pts[2]) / 2, x23 = (pts[1] + pts[2]) / 2;
  REQUIRE((x23 - pts[1]).norm() <= 1.0);
  REQUIRE((x23 - pts[2]).norm() <= 1.0);

  const auto e = exact_pipeline(three(pts, {w1, w2, w3}), CostSpec::ball(1.0));
  CHECK(oracle::mass_near(e.attack.classes[0], x12) == doctest::Approx(w2));
  CHECK(oracle::mass_near(e.attack.classes[0], x13) == doctest::Approx(w3));
  CHECK(oracle::mass_near(e.attack.classes[0], pts[0]) == doctest::Approx(kappa));
  CHECK(learner_best_response(e.attack.classes) == doctest::Approx(w1));

  std::vector<PointMeasure> dev(3);
  dev[0].add(x12, w2);
  dev[0].add(x13, w3);
  dev[0].add(pts[0], kappa);
  dev[1].add(x12, w2 - eta);
  dev[1].add(x23, eta);
  dev[2].add(x13, w3 - eta);
  dev[2].add(x23, eta);
  const double response = learner_best_response(dev);
  CHECK(response == doctest::Approx(w1 + eta));
  CHECK(response > w1 + 1e-12);
}

TEST_CASE("no deterministic labeling reaches the optimum on the pairwise triangle") {
  const auto pts = pairwise_triangle();
  const std::vector<double> w = {0.4, 0.35, 0.25};
  const std::vector<Point> src(pts.begin(), pts.end());
  const std::vector<Point> targets = {pts[0], pts[1], pts[2], (pts[0] + pts[1]) / 2, (pts[0] + pts[2]) / 2,
                                      (pts[1] + pts[2]) / 2};
  double best = 0.0;
  std::vector<int> labels(6, 1);
  for (int code = 0; code < 729; ++code) {
    int c = code;
    for (auto& l : labels) {
      l = 1 + c % 3;
      c /= 3;
    }
    best = std::max(best, oracle::strong_partition_power(src, w, targets, labels, 1.0));
  }
  CHECK(best == doctest::Approx(0.4));
  CHECK(best < solve_generalized_barycenter(three(pts, {0.4, 0.35, 0.25}), CostSpec::ball(1.0)).value - 1e-9);
}

TEST_CASE("classifier and attack invariants on random instances") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 3.0);
  for (int t = 0; t < 40; ++t) {
    const auto inst = random_instance(rng, 5, {2, 3});
    const auto e = exact_pipeline(inst.measure, inst.spec);

    for (int q = 0; q < 30; ++q) {
      Point x(inst.measure.dim());
      for (auto& v : x) v = u(rng);
      // The lower bound 0 is specific to ball costs; power costs subtract a finite c.
      for (double s : classify(e.bundle, e.spec, x).scores) {
        CHECK((s == -kInf || s <= 1.0 + 1e-9));
        if (inst.spec.is_ball()) CHECK((s == -kInf || s >= -1e-12));
      }
    }
    for (int i = 1; i <= inst.measure.num_classes(); ++i)
      CHECK(std::abs(e.attack.class_mass(i) - inst.measure.class_mass(i)) <= 1e-8);
    for (const auto& mv : e.attack.moves) {
      const auto& x = inst.measure.atom(mv.atom).x;
      CHECK(std::isfinite(cost(inst.spec, x, mv.target)));
      if (inst.spec.is_ball()) CHECK(ground_distance(inst.spec, x, mv.target) <= inst.spec.epsilon() + 1e-9);
    }
    const double saddle_value = classification_power(e.bundle, e.spec, e.attack) + e.attack.transport_cost;
    CHECK(std::abs(saddle_value - e.bstar) <= 1e-6);

    const auto scaled = exact_pipeline(inst.measure.scaled(2.5), inst.spec);
    for (int q = 0; q < 20; ++q) {
      Point x(inst.measure.dim());
      for (auto& v : x) v = u(rng);
      CHECK(classify(e.bundle, e.spec, x).label == classify(scaled.bundle, e.spec, x).label);
    }
  }
}

TEST_CASE("adversarial risk examples") {
  std::vector<LabeledPoint> pts;
  for (int i = 1; i <= 4; ++i) pts.push_back({pt(0.1 * i, 0.05 * i), i, 0.25});
  const auto four = LabeledMeasure::from_points(pts, 4);
  CHECK(adversarial_risk(four, CostSpec::ball(1.0), MotMode::Exact).risk == doctest::Approx(0.75).epsilon(1e-12));

  const auto m = three(pairwise_triangle(), {0.4, 0.35, 0.25});
  CHECK(adversarial_risk(m, CostSpec::ball(0.0), MotMode::Exact).risk == doctest::Approx(0.0));

  const auto c3 = three(one_pair_line(), {0.5, 0.3, 0.2});
  const auto r = adversarial_risk(c3, CostSpec::ball(1.0), MotMode::Exact);
  CHECK(r.bstar == doctest::Approx(0.7));
  CHECK(r.risk == doctest::Approx(0.3));

  const auto approx = adversarial_risk(c3, CostSpec::ball(1.0), MotMode::Entropic);
  CHECK(approx.risk <= 0.3 + 1e-9);
}

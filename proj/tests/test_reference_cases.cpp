#include "advmot/barycenter.hpp"
#include "advmot/mot.hpp"
#include "advmot/reference_cases.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <json.hpp>

#include <random>

using namespace advmot;
using oracle::pt;

TEST_CASE("binary_value examples") {
  const auto close = LabeledMeasure::from_points({{pt(0, 0), 1, 0.5}, {pt(1.5, 0), 2, 0.5}}, 2);
  const auto far = LabeledMeasure::from_points({{pt(0, 0), 1, 0.5}, {pt(2.5, 0), 2, 0.5}}, 2);
  const auto single = LabeledMeasure::from_points({{pt(0, 0), 1, 0.6}, {pt(0.3, 0), 1, 0.4}}, 2);
  CHECK(binary_value(close, 1.0) == doctest::Approx(0.5));
  CHECK(binary_value(far, 1.0) == doctest::Approx(1.0));
  CHECK(binary_value(single, 1.0) == doctest::Approx(1.0));
  const auto k3 = LabeledMeasure::from_points({{pt(0, 0), 1, 1.0}}, 3);
  CHECK_THROWS_AS(binary_value(k3, 1.0), InputError);
}

TEST_CASE("classify_toy examples") {
  const std::array<double, 3> third = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  auto tc = classify_toy(separated_triangle(), 1.0, third);
  CHECK(tc.id == ToyCaseId::Separated);
  CHECK(tc.expected_bstar == 1.0);
  CHECK_FALSE(tc.boundary);

  tc = classify_toy(clustered_triangle(), 1.0, {0.5, 0.3, 0.2});
  CHECK(tc.id == ToyCaseId::CommonPoint);
  CHECK(tc.expected_bstar == 0.5);

  tc = classify_toy(one_pair_line(), 1.0, {0.5, 0.3, 0.2});
  CHECK(tc.id == ToyCaseId::OnePair);
  CHECK(tc.expected_bstar == doctest::Approx(0.7));

  // Pair (1,3) close instead: max(w1, w3) + w2.
  tc = classify_toy({pt(0, 0), pt(10, 0), pt(1.5, 0)}, 1.0, {0.5, 0.3, 0.2});
  CHECK(tc.expected_bstar == doctest::Approx(0.8));
  tc = classify_toy({pt(10, 0), pt(0, 0), pt(1.5, 0)}, 1.0, {0.5, 0.3, 0.2});
  CHECK(tc.expected_bstar == doctest::Approx(0.3 + 0.5));

  tc = classify_toy(pairwise_triangle(), 1.0, {0.4, 0.35, 0.25});
  CHECK(tc.id == ToyCaseId::PairwiseNoTriple_I);
  CHECK(tc.expected_bstar == 0.5);
  tc = classify_toy(pairwise_triangle(), 1.0, {0.6, 0.25, 0.15});
  CHECK(tc.id == ToyCaseId::PairwiseNoTriple_II);
  CHECK(tc.expected_bstar == 0.6);
}

TEST_CASE("side 2 eps equilateral is a flagged boundary of the pairwise case") {
  const std::array<Point, 3> tri = {pt(0, 0), pt(2, 0), pt(1, std::sqrt(3.0))};
  const auto tc = classify_toy(tri, 1.0, {0.4, 0.35, 0.25});
  CHECK(tc.id == ToyCaseId::PairwiseNoTriple_I);
  CHECK(tc.boundary);
  CHECK(tc.note == "boundary; expected value ambiguous");
  // Under closed balls the pairwise value is attained.
  CHECK(solve_generalized_barycenter(tc.measure(), tc.cost()).value == doctest::Approx(0.5));
}

TEST_CASE("geometry that matches no case") {
  // Two close pairs: a chain.
  const std::array<Point, 3> chain = {pt(0, 0), pt(1.8, 0), pt(3.6, 0)};
  CHECK_THROWS_AS(classify_toy(chain, 1.0, {0.5, 0.3, 0.2}), InputError);
  CHECK_THROWS_AS(classify_toy(separated_triangle(), 1.0, {0.2, 0.3, 0.5}), InputError);
}

TEST_CASE("catalog entries match both solvers") {
  const auto cat = toy_catalog();
  CHECK(cat.size() == 7);
  for (const auto& tc : cat) {
    INFO("case " << to_string(tc.id));
    CHECK_FALSE(tc.boundary);
    CHECK(std::abs(tc.weights[0] + tc.weights[1] + tc.weights[2] - 1.0) <= 1e-12);
    const auto m = tc.measure();
    CHECK(std::abs(solve_generalized_barycenter(m, tc.cost()).value - tc.expected_bstar) <= 1e-8);
    const auto p = build_problem(m, tc.cost());
    CHECK(std::abs(bstar_from_value(p, solve_exact(p).value) - tc.expected_bstar) <= 1e-7);
  }
}

TEST_CASE("the two pairwise formulas agree at w1 = w2 + w3") {
  const auto tc = classify_toy(pairwise_triangle(), 1.0, {0.5, 0.3, 0.2});
  CHECK(tc.expected_bstar == doctest::Approx(0.5));
  CHECK(solve_generalized_barycenter(tc.measure(), tc.cost()).value == doctest::Approx(0.5));
}

TEST_CASE("binary reduction on random two-class instances") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < 60; ++t) {
    std::vector<LabeledPoint> pts;
    const int n = 1 + t % 6;
    for (int a = 0; a < n; ++a) pts.push_back({pt(u(rng), u(rng)), 1 + static_cast<int>(u(rng) > 1.0), 0.1 + u(rng)});
    const auto m = LabeledMeasure::from_points(pts, 2);
    const double eps = 0.25 * (t % 5);
    const auto spec = CostSpec::ball(eps);
    const double b = binary_value(m, eps);
    CHECK(std::abs(b - solve_generalized_barycenter(m, spec).value) <= 1e-8);
    const auto p = build_problem(m, spec);
    CHECK(std::abs(b - bstar_from_value(p, solve_exact(p).value)) <= 1e-8);
  }
}

TEST_CASE("catalog exports as structured text") {
  const auto j = nlohmann::json::parse(catalog_to_json(toy_catalog()));
  REQUIRE(j.is_array());
  CHECK(j.size() == 7);
  CHECK(j[0]["case"] == "1");
  CHECK(j[4]["case"] == "4i");
  CHECK(j[5]["case"] == "4ii");
  CHECK(j[5]["expected_B_star"].get<double>() == 0.6);
}

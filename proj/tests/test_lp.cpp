#include "advmot/lp.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace advmot;

namespace {

LinearProgram make(std::initializer_list<double> c, Eigen::MatrixXd a, std::initializer_list<double> b) {
  LinearProgram lp;
  lp.objective = Eigen::Map<const Eigen::VectorXd>(std::data(c), static_cast<Eigen::Index>(c.size()));
  lp.constraints = std::move(a);
  lp.rhs = Eigen::Map<const Eigen::VectorXd>(std::data(b), static_cast<Eigen::Index>(b.size()));
  return lp;
}

// Random feasible, bounded LP: b = A x0 with x0 >= 0 and c >= 0.
LinearProgram random_lp(std::mt19937_64& rng, int m, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LinearProgram lp;
  lp.constraints = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return u(rng) < 0.4 ? 0.0 : std::round(4 * u(rng) - 1); });
  Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng) < 0.5 ? 0.0 : u(rng); });
  lp.rhs = lp.constraints * x0;
  lp.objective = Eigen::VectorXd::NullaryExpr(n, [&] { return std::round(5 * u(rng)) / 4; });
  return lp;
}

}  // namespace

TEST_CASE("tiny examples") {
  Eigen::MatrixXd a1(1, 1);
  a1 << 1;
  const auto s1 = solve_lp(make({1.0}, a1, {1.0}));
  CHECK(s1.status == LpStatus::Optimal);
  CHECK(s1.primal[0] == doctest::Approx(1.0));
  CHECK(s1.objective == doctest::Approx(1.0));

  Eigen::MatrixXd a2(1, 1);
  a2 << 0;
  CHECK(solve_lp(make({-1.0}, a2, {0.0})).status == LpStatus::Unbounded);

  Eigen::MatrixXd a3(2, 2);
  a3 << 1, 1, 1, -1;
  CHECK(solve_lp(make({1.0, 1.0}, a3, {1.0, 3.0})).status == LpStatus::Infeasible);
}

TEST_CASE("transportation problem with a redundant row") {
  // 2x2 transport, supplies (0.6, 0.4), demands (0.5, 0.5): 4 rows, rank 3.
  Eigen::MatrixXd a(4, 4);
  a << 1, 1, 0, 0,  //
      0, 0, 1, 1,   //
      1, 0, 1, 0,   //
      0, 1, 0, 1;
  const auto s = solve_lp(make({0.0, 1.0, 1.0, 0.0}, a, {0.6, 0.4, 0.5, 0.5}));
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(0.1));
  CHECK(s.dual_objective == doctest::Approx(0.1));
  const Eigen::VectorXd reduced = Eigen::VectorXd{{0.0, 1.0, 1.0, 0.0}} - a.transpose() * s.duals;
  CHECK(reduced.minCoeff() >= -1e-9);
}

TEST_CASE("certified residuals and strong duality on random LPs") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const int m = 1 + t % 7, n = m + t % 9;
    const auto lp = random_lp(rng, m, n);
    const auto s = solve_lp(lp);
    REQUIRE(s.optimal());
    const double bnorm = lp.rhs.lpNorm<Eigen::Infinity>();
    CHECK((lp.constraints * s.primal - lp.rhs).lpNorm<Eigen::Infinity>() <= 1e-9 * (1 + bnorm));
    CHECK(s.primal.minCoeff() >= -1e-12);
    CHECK(std::abs(s.objective - s.dual_objective) <= 1e-8 * (1 + std::abs(s.objective)));
    const Eigen::VectorXd reduced = lp.objective - lp.constraints.transpose() * s.duals;
    CHECK(reduced.minCoeff() >= -1e-8);
    CHECK(std::abs(reduced.dot(s.primal)) <= 1e-8);
  }
}

TEST_CASE("column permutation permutes the primal when tags fix the order") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    auto lp = random_lp(rng, 4, 10);
    lp.tags.resize(10);
    for (int j = 0; j < 10; ++j) lp.tags[j] = {j};
    const auto base = solve_lp(lp);
    REQUIRE(base.optimal());

    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    LinearProgram q = lp;
    for (int j = 0; j < 10; ++j) {
      q.objective[j] = lp.objective[perm[j]];
      q.constraints.col(j) = lp.constraints.col(perm[j]);
      q.tags[j] = lp.tags[perm[j]];
    }
    const auto s = solve_lp(q);
    REQUIRE(s.optimal());
    CHECK(s.objective == base.objective);
    for (int j = 0; j < 10; ++j) CHECK(s.primal[j] == base.primal[perm[j]]);
  }
}

TEST_CASE("identical input gives identical output") {
  std::mt19937_64 rng(9);
  const auto lp = random_lp(rng, 6, 15);
  const auto a = solve_lp(lp), b = solve_lp(lp);
  CHECK(a.primal == b.primal);
  CHECK(a.duals == b.duals);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("negative right-hand sides") {
  Eigen::MatrixXd a(1, 2);
  a << -1, -1;
  const auto s = solve_lp(make({2.0, 3.0}, a, {-1.0}));
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(2.0));
  CHECK(s.duals[0] == doctest::Approx(-2.0));
}

TEST_CASE("status strings") {
  CHECK(to_string(LpStatus::Optimal) == "optimal");
  CHECK(to_string(LpStatus::Infeasible) == "infeasible");
  CHECK(to_string(LpStatus::Unbounded) == "unbounded");
}

#ifndef ADVMOT_GROUND_COST_HPP_
#define ADVMOT_GROUND_COST_HPP_

#include "advmot/geometry.hpp"
#include "advmot/measure.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace advmot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Slack applied to every closed-ball test d(x, x') <= epsilon.
inline constexpr double kBallSlack = 1e-9;

/// 0 inside the closed epsilon-ball, +inf outside.
struct BallCost {
  double epsilon = 0.0;
  Metric metric = Metric::L2;
};

/// (1/tau) * |x - x'|^p, Euclidean, p in {1, 2}.
struct PowerCost {
  int p = 2;
  double tau = 1.0;
};

class CostSpec {
 public:
  CostSpec() = default;
  static CostSpec ball(double epsilon, Metric metric = Metric::L2);
  static CostSpec power(int p, double tau);

  bool is_ball() const { return std::holds_alternative<BallCost>(kind_); }
  const BallCost& as_ball() const { return std::get<BallCost>(kind_); }
  const PowerCost& as_power() const { return std::get<PowerCost>(kind_); }

  /// Ball radius, or 0 for power costs.
  double epsilon() const { return is_ball() ? as_ball().epsilon : 0.0; }

  /// Same cost with a different ball radius (power costs are returned unchanged).
  CostSpec with_epsilon(double epsilon) const;

  std::string describe() const;

 private:
  std::variant<BallCost, PowerCost> kind_{BallCost{}};
};

double ground_distance(const CostSpec& spec, const Point& x, const Point& y);

/// c(x, x'); +inf is a value, not an error. Throws InputError on dimension mismatch.
double cost(const CostSpec& spec, const Point& x, const Point& y);

/// Whether moving x to y stays inside the budget (finite cost).
bool reachable(const CostSpec& spec, const Point& x, const Point& y);

/// A function given by its values on finitely many support points.
struct SupportFunction {
  std::vector<Point> points;
  std::vector<double> values;
};

/// f^c(x) = min over support points x' of f(x') + c(x', x).
/// Returns +inf when no support point is reachable.
class CTransform {
 public:
  CTransform(CostSpec spec, SupportFunction f);
  double operator()(const Point& x) const;

 private:
  CostSpec spec_;
  SupportFunction f_;
};

/// g^cbar(x') = max over support points x of g(x) - c(x, x').
/// Returns -inf (the "unreachable" marker) when no support point is reachable.
class ConjugateCTransform {
 public:
  ConjugateCTransform(CostSpec spec, SupportFunction g);
  double operator()(const Point& x) const;

 private:
  CostSpec spec_;
  SupportFunction g_;
};

CTransform c_transform(const CostSpec& spec, SupportFunction f);
ConjugateCTransform conjugate_c_transform(const CostSpec& spec, SupportFunction g);

/// c_A(x_1..x_k) = inf_x' sum_i c(x', x_i) and its minimizer T_A.
struct SetCostResult {
  double value = kInf;
  std::optional<Point> witness;
  bool finite() const { return witness.has_value(); }
};

SetCostResult set_cost(const CostSpec& spec, std::span<const Point> points);

/// sum_i c(y, x_i).
double set_cost_at(const CostSpec& spec, const Point& y, std::span<const Point> points);

}  // namespace advmot

#endif  // ADVMOT_GROUND_COST_HPP_

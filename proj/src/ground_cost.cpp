#include "advmot/ground_cost.hpp"

#include <cmath>
#include <sstream>

namespace advmot {

CostSpec CostSpec::ball(double epsilon, Metric metric) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InputError("ball radius epsilon must be finite and >= 0");
  CostSpec s;
  s.kind_ = BallCost{epsilon, metric};
  return s;
}

CostSpec CostSpec::power(int p, double tau) {
  if (p != 1 && p != 2) throw InputError("power cost supports p in {1,2}");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("power cost scale tau must be > 0");
  CostSpec s;
  s.kind_ = PowerCost{p, tau};
  return s;
}

CostSpec CostSpec::with_epsilon(double epsilon) const {
  if (!is_ball()) return *this;
  return ball(epsilon, as_ball().metric);
}

std::string CostSpec::describe() const {
  std::ostringstream out;
  if (is_ball()) {
    out << "ball(epsilon=" << as_ball().epsilon << ", metric=" << (as_ball().metric == Metric::L2 ? "l2" : "linf")
        << ")";
  } else {
    out << "power(p=" << as_power().p << ", tau=" << as_power().tau << ")";
  }
  return out.str();
}

double ground_distance(const CostSpec& spec, const Point& x, const Point& y) {
  if (x.size() != y.size()) throw InputError("dimension mismatch in cost evaluation");
  const Metric m = spec.is_ball() ? spec.as_ball().metric : Metric::L2;
  return distance(x, y, m);
}

double cost(const CostSpec& spec, const Point& x, const Point& y) {
  const double d = ground_distance(spec, x, y);
  if (spec.is_ball()) return d <= spec.as_ball().epsilon + kBallSlack ? 0.0 : kInf;
  const auto& pw = spec.as_power();
  return (pw.p == 1 ? d : d * d) / pw.tau;
}

bool reachable(const CostSpec& spec, const Point& x, const Point& y) { return std::isfinite(cost(spec, x, y)); }

CTransform::CTransform(CostSpec spec, SupportFunction f) : spec_(std::move(spec)), f_(std::move(f)) {
  if (f_.points.empty()) throw InputError("c-transform of a function with empty support");
  if (f_.points.size() != f_.values.size()) throw InputError("support and values differ in length");
}

double CTransform::operator()(const Point& x) const {
  double best = kInf;
  for (std::size_t k = 0; k < f_.points.size(); ++k) best = std::min(best, f_.values[k] + cost(spec_, f_.points[k], x));
  return best;
}

ConjugateCTransform::ConjugateCTransform(CostSpec spec, SupportFunction g) : spec_(std::move(spec)), g_(std::move(g)) {
  if (g_.points.empty()) throw InputError("conjugate c-transform of a function with empty support");
  if (g_.points.size() != g_.values.size()) throw InputError("support and values differ in length");
}

double ConjugateCTransform::operator()(const Point& x) const {
  double best = -kInf;
  for (std::size_t k = 0; k < g_.points.size(); ++k) {
    const double c = cost(spec_, g_.points[k], x);
    if (std::isfinite(c)) best = std::max(best, g_.values[k] - c);
  }
  return best;
}

CTransform c_transform(const CostSpec& spec, SupportFunction f) { return CTransform(spec, std::move(f)); }

ConjugateCTransform conjugate_c_transform(const CostSpec& spec, SupportFunction g) {
  return ConjugateCTransform(spec, std::move(g));
}

double set_cost_at(const CostSpec& spec, const Point& y, std::span<const Point> points) {
  double s = 0.0;
  for (const auto& p : points) s += cost(spec, y, p);
  return s;
}

SetCostResult set_cost(const CostSpec& spec, std::span<const Point> points) {
  if (points.empty()) throw InputError("set cost needs at least one point");
  const auto dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw InputError("dimension mismatch in set cost");

  SetCostResult r;
  if (points.size() == 1) {
    r.value = 0.0;
    r.witness = points.front();
    return r;
  }
  Eigen::MatrixXd cols(dim, static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = points[k];

  if (spec.is_ball()) {
    const auto& b = spec.as_ball();
    const auto enc = b.metric == Metric::L2 ? min_enclosing_ball(cols) : min_enclosing_cube(cols);
    if (enc.radius <= b.epsilon + kBallSlack) {
      r.value = 0.0;
      r.witness = enc.center;
    }
    return r;
  }

  const auto& pw = spec.as_power();
  Point y = pw.p == 2 ? Point(cols.rowwise().mean()) : Point(geometric_median(cols));
  r.value = set_cost_at(spec, y, points);
  r.witness = std::move(y);
  return r;
}

}  // namespace advmot

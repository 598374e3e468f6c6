#include "advmot/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace advmot {

namespace {

struct TupleWalker {
  const LabeledMeasure& m;
  const Eigen::VectorXd& psi;
  const CostSpec& spec;
  double worst = -kInf;
  std::size_t visited = 0;

  void check(const std::vector<std::size_t>& atoms, double sum) {
    ++visited;
    if (sum <= 1.0) {
      worst = std::max(worst, sum - 1.0);
      return;
    }
    std::vector<Point> pts;
    for (auto a : atoms) pts.push_back(m.atom(a).x);
    const SetCostResult sc = set_cost(spec, pts);
    if (sc.finite()) worst = std::max(worst, sum - 1.0 - sc.value);
  }

  void walk(const std::vector<int>& labels, const std::vector<std::vector<std::size_t>>& by_class,
            std::vector<std::size_t>& cur, double sum) {
    if (cur.size() == labels.size()) {
      check(cur, sum);
      return;
    }
    for (auto a : by_class[labels[cur.size()] - 1]) {
      cur.push_back(a);
      walk(labels, by_class, cur, sum + psi[static_cast<Eigen::Index>(a)]);
      cur.pop_back();
    }
  }
};

}  // namespace

double psi_violation(const LabeledMeasure& m, const Eigen::VectorXd& psi, const CostSpec& spec,
                     const PsiCheckOptions& opt, std::size_t* checked, bool* exhaustive) {
  const int k = m.num_classes();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(k));
  std::vector<int> present;
  double prod = 1.0;
  for (int i = 1; i <= k; ++i) {
    by_class[i - 1] = m.class_indices(i);
    if (!by_class[i - 1].empty()) {
      present.push_back(i);
      prod *= static_cast<double>(by_class[i - 1].size());
    }
  }
  TupleWalker w{m, psi, spec};
  const bool full = prod <= opt.exhaustive_limit;
  const auto p = present.size();
  if (full) {
    for (SubsetMask s = 1; s < (SubsetMask{1} << p); ++s) {
      std::vector<int> labels;
      for (std::size_t q = 0; q < p; ++q)
        if ((s >> q) & 1u) labels.push_back(present[q]);
      std::vector<std::size_t> cur;
      w.walk(labels, by_class, cur, 0.0);
    }
  } else {
    std::mt19937_64 rng(opt.seed);
    std::vector<std::size_t> tuple(p);
    for (std::size_t r = 0; r < opt.samples; ++r) {
      for (std::size_t q = 0; q < p; ++q) {
        const auto& idx = by_class[present[q] - 1];
        tuple[q] = idx[std::uniform_int_distribution<std::size_t>(0, idx.size() - 1)(rng)];
      }
      for (SubsetMask s = 1; s < (SubsetMask{1} << p); ++s) {
        std::vector<std::size_t> atoms;
        double sum = 0.0;
        for (std::size_t q = 0; q < p; ++q) {
          if (!((s >> q) & 1u)) continue;
          atoms.push_back(tuple[q]);
          sum += psi[static_cast<Eigen::Index>(tuple[q])];
        }
        w.check(atoms, sum);
      }
    }
  }
  if (checked) *checked = w.visited;
  if (exhaustive) *exhaustive = full;
  return w.worst;
}

namespace {

PotentialBundle finish_bundle(PotentialBundle b, const CostSpec& spec, const PsiCheckOptions& opt) {
  b.dual_value = 0.0;
  for (std::size_t a = 0; a < b.measure.size(); ++a) b.dual_value += b.psi[static_cast<Eigen::Index>(a)] * b.measure.atom(a).weight;
  b.max_violation = psi_violation(b.measure, b.psi, spec, opt, &b.checked_tuples, &b.exhaustive);
  if (b.max_violation > opt.fail_tolerance) {
    std::ostringstream msg;
    msg << "duals not feasible; re-project (violation " << b.max_violation << ")";
    throw std::runtime_error(msg.str());
  }
  return b;
}

}  // namespace

PotentialBundle build_psi(const std::vector<Eigen::VectorXd>& phi, const LabeledMeasure& m, const CostSpec& spec,
                          bool approximate, const PsiCheckOptions& opt) {
  if (static_cast<int>(phi.size()) != m.num_classes()) throw InputError("need one potential per marginal");
  const auto base = static_cast<Eigen::Index>(m.size() + 1);
  double ghost_sum = 0.0;
  for (const auto& f : phi) {
    if (f.size() != base) throw InputError("potential length must be n+1");
    ghost_sum += f[base - 1];
  }
  PotentialBundle b;
  b.measure = m;
  b.phi = phi;
  b.approximate = approximate;
  b.psi.resize(static_cast<Eigen::Index>(m.size()));
  for (Eigen::Index a = 0; a < b.psi.size(); ++a) {
    double s = ghost_sum;
    for (const auto& f : phi) s += f[a];
    b.psi[a] = s;
  }
  return finish_bundle(std::move(b), spec, opt);
}

PotentialBundle bundle_from_barycenter(const BarycenterSolution& sol, const LabeledMeasure& m, const CostSpec& spec,
                                       const PsiCheckOptions& opt) {
  if (sol.atom_duals.size() != static_cast<Eigen::Index>(m.size())) throw InputError("dual vector does not match measure");
  PotentialBundle b;
  b.measure = m;
  b.psi = sol.atom_duals;
  return finish_bundle(std::move(b), spec, opt);
}

Classification classify(const PotentialBundle& bundle, const CostSpec& spec, const Point& query) {
  const int k = bundle.measure.num_classes();
  Classification out;
  out.scores.assign(static_cast<std::size_t>(k), -kInf);
  for (std::size_t a = 0; a < bundle.measure.size(); ++a) {
    const auto& atom = bundle.measure.atom(a);
    const double c = cost(spec, atom.x, query);
    if (!std::isfinite(c)) continue;
    auto& s = out.scores[static_cast<std::size_t>(atom.label - 1)];
    s = std::max(s, bundle.psi_plus(a) - c);
  }
  double best = -kInf;
  for (int i = 1; i <= k; ++i) {
    const double s = out.scores[static_cast<std::size_t>(i - 1)];
    if (!std::isfinite(s)) continue;
    if (out.label == 0 || s > best + 1e-12) {
      best = s;
      out.label = i;
    }
  }
  return out;
}

namespace {

void add_move(std::vector<std::vector<Move>>& per_atom, const Move& mv) {
  for (auto& existing : per_atom[mv.atom]) {
    if (coords_equal(existing.target, mv.target)) {
      existing.mass += mv.mass;
      return;
    }
  }
  per_atom[mv.atom].push_back(mv);
}

AttackMeasure assemble(const LabeledMeasure& m, const std::vector<std::vector<Move>>& per_atom, const CostSpec& spec) {
  AttackMeasure out;
  out.classes.resize(static_cast<std::size_t>(m.num_classes()));
  for (std::size_t a = 0; a < per_atom.size(); ++a) {
    for (Move mv : per_atom[a]) {
      mv.cost = cost(spec, m.atom(a).x, mv.target);
      out.classes[static_cast<std::size_t>(m.atom(a).label - 1)].add(mv.target, mv.mass);
      out.transport_cost += mv.mass * mv.cost;
      out.moves.push_back(std::move(mv));
    }
  }
  return out;
}

}  // namespace

AttackMeasure build_attack(const MotProblem& p, const MotSolution& sol, double threshold) {
  std::vector<std::vector<Move>> per_atom(p.measure.size());
  std::map<std::vector<std::size_t>, std::vector<Move>> memo;
  const double scale = 2.0 * p.total_mass;
  for (std::size_t t = 0; t < p.num_entries(); ++t) {
    const double w = sol.coupling[static_cast<Eigen::Index>(t)];
    if (!(w > threshold)) continue;
    const auto tuple = p.unravel(t);
    std::vector<std::size_t> key;
    for (auto a : tuple)
      if (!p.ghost.is_ghost(a)) key.push_back(a);
    if (key.empty()) continue;
    std::sort(key.begin(), key.end());
    auto it = memo.find(key);
    if (it == memo.end()) {
      const LocalSolution local = local_value(p.entries(t), p.num_classes, p.spec);
      std::vector<std::vector<Move>> local_atoms(p.measure.size());
      for (const auto& lm : local.moves) add_move(local_atoms, Move{tuple[lm.entry], lm.target, lm.mass, 0.0});
      std::vector<Move> flat;
      for (const auto& v : local_atoms) flat.insert(flat.end(), v.begin(), v.end());
      it = memo.emplace(key, std::move(flat)).first;
    }
    for (const auto& mv : it->second) add_move(per_atom, Move{mv.atom, mv.target, mv.mass * w * scale, 0.0});
  }
  return assemble(p.measure, per_atom, p.spec);
}

AttackMeasure attack_from_barycenter(const BarycenterSolution& sol) {
  AttackMeasure out;
  out.classes = sol.attacks;
  out.moves = sol.moves;
  out.transport_cost = sol.transport_cost;
  return out;
}

double classification_power(const PotentialBundle& bundle, const CostSpec& spec, const AttackMeasure& attack) {
  double b = 0.0;
  for (std::size_t i = 0; i < attack.classes.size(); ++i) {
    const auto& cls = attack.classes[i];
    for (std::size_t q = 0; q < cls.size(); ++q) {
      if (cls.weights[q] == 0.0) continue;
      b += classify(bundle, spec, cls.points[q]).scores[i] * cls.weights[q];
    }
  }
  return b;
}

double learner_best_response(const std::vector<PointMeasure>& attack) {
  PointMeasure support;
  for (const auto& cls : attack)
    for (const auto& x : cls.points) support.add(x, 0.0);
  double total = 0.0;
  for (const auto& x : support.points) {
    double best = 0.0;
    for (const auto& cls : attack) best = std::max(best, cls.weight_at(x));
    total += best;
  }
  return total;
}

namespace {

Point random_reachable(const Point& x, const CostSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto d = x.size();
  if (spec.is_ball()) {
    const double eps = spec.epsilon();
    if (spec.as_ball().metric == Metric::LInf) {
      Point y = x;
      for (Eigen::Index k = 0; k < d; ++k) y[k] += eps * (2.0 * unif(rng) - 1.0);
      return y;
    }
    Point dir(d);
    for (Eigen::Index k = 0; k < d; ++k) dir[k] = gauss(rng);
    const double nrm = dir.norm();
    if (nrm == 0.0) return x;
    const double r = eps * std::pow(unif(rng), 1.0 / static_cast<double>(d));
    return x + dir * (r / nrm);
  }
  const double scale = std::sqrt(spec.as_power().tau);
  Point y = x;
  for (Eigen::Index k = 0; k < d; ++k) y[k] += 0.5 * scale * gauss(rng);
  return y;
}

}  // namespace

SaddleReport verify_saddle(const PotentialBundle& bundle, const AttackMeasure& attack, const CostSpec& spec,
                           double bstar, const SaddleOptions& opt) {
  if (bundle.approximate) throw InputError("saddle verification needs exact potentials, not entropic ones");
  const LabeledMeasure& m = bundle.measure;
  const auto k = static_cast<std::size_t>(m.num_classes());
  SaddleReport rep;
  rep.seed = opt.seed;
  rep.learner_trials = opt.learner_trials;
  rep.adversary_trials = opt.adversary_trials;
  rep.bstar = bstar;
  rep.b_value = classification_power(bundle, spec, attack);
  rep.c_value = attack.transport_cost;
  rep.value = rep.b_value + rep.c_value;
  rep.value_matches = std::abs(rep.value - bstar) <= opt.value_tolerance;
  if (!rep.value_matches && rep.first_violation.empty()) {
    std::ostringstream msg;
    msg << "value " << rep.value << " differs from B* " << bstar;
    rep.first_violation = msg.str();
  }

  std::mt19937_64 rng(opt.seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Learner: random simplex-valued f on the support of the attack.
  PointMeasure support;
  for (const auto& cls : attack.classes)
    for (const auto& x : cls.points) support.add(x, 0.0);
  std::vector<std::vector<double>> mass_at(support.size(), std::vector<double>(k, 0.0));
  for (std::size_t s = 0; s < support.size(); ++s)
    for (std::size_t i = 0; i < k; ++i) mass_at[s][i] = attack.classes[i].weight_at(support.points[s]);
  for (int trial = 0; trial < opt.learner_trials; ++trial) {
    double b = 0.0;
    for (std::size_t s = 0; s < support.size(); ++s) {
      std::vector<double> f(k);
      if (unif(rng) < 0.25) {
        f[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
      } else {
        double tot = 0.0;
        for (auto& v : f) tot += (v = expo(rng));
        for (auto& v : f) v /= tot;
      }
      for (std::size_t i = 0; i < k; ++i) b += f[i] * mass_at[s][i];
    }
    const double excess = b - rep.b_value;
    rep.worst_learner_excess = std::max(rep.worst_learner_excess, excess);
    if (excess > opt.tolerance) {
      ++rep.learner_violations;
      if (rep.first_violation.empty()) {
        std::ostringstream msg;
        msg << "learner trial " << trial << " improves B by " << excess;
        rep.first_violation = msg.str();
      }
    }
  }

  // Adversary: every atom spreads its mass over reachable destinations.
  std::vector<std::vector<Point>> candidates(m.size());
  for (std::size_t a = 0; a < m.size(); ++a) {
    candidates[a].push_back(m.atom(a).x);
    for (const auto& x : support.points)
      if (reachable(spec, m.atom(a).x, x) && !coords_equal(x, m.atom(a).x)) candidates[a].push_back(x);
  }
  for (int trial = 0; trial < opt.adversary_trials; ++trial) {
    AttackMeasure dev;
    dev.classes.resize(k);
    for (std::size_t a = 0; a < m.size(); ++a) {
      const auto& atom = m.atom(a);
      std::vector<Point> dest;
      for (const auto& c : candidates[a])
        if (unif(rng) < 0.6) dest.push_back(c);
      const int extra = static_cast<int>(unif(rng) * 3.0);
      for (int e = 0; e < extra; ++e) dest.push_back(random_reachable(atom.x, spec, rng));
      if (dest.empty()) dest.push_back(candidates[a][std::uniform_int_distribution<std::size_t>(0, candidates[a].size() - 1)(rng)]);
      std::vector<double> w(dest.size());
      double tot = 0.0;
      for (auto& v : w) tot += (v = expo(rng));
      for (std::size_t q = 0; q < dest.size(); ++q) {
        const double mass = atom.weight * w[q] / tot;
        const double c = cost(spec, atom.x, dest[q]);
        if (!std::isfinite(c)) continue;  // numerically just outside the ball; skip
        dev.classes[static_cast<std::size_t>(atom.label - 1)].add(dest[q], mass);
        dev.moves.push_back(Move{a, dest[q], mass, c});
        dev.transport_cost += mass * c;
      }
    }
    // Keep per-class mass exact by leaving any skipped remainder at the source.
    for (std::size_t a = 0; a < m.size(); ++a) {
      double moved = 0.0;
      for (const auto& mv : dev.moves)
        if (mv.atom == a) moved += mv.mass;
      const double rest = m.atom(a).weight - moved;
      if (rest > 0.0) dev.classes[static_cast<std::size_t>(m.atom(a).label - 1)].add(m.atom(a).x, rest);
    }
    const double val = classification_power(bundle, spec, dev) + dev.transport_cost;
    const double deficit = rep.value - val;
    rep.worst_adversary_deficit = std::max(rep.worst_adversary_deficit, deficit);
    if (deficit > opt.tolerance) {
      ++rep.adversary_violations;
      if (rep.first_violation.empty()) {
        std::ostringstream msg;
        msg << "adversary trial " << trial << " lowers B + C by " << deficit;
        rep.first_violation = msg.str();
      }
    }
  }
  return rep;
}

RiskResult adversarial_risk(const LabeledMeasure& m, const CostSpec& spec, MotMode mode,
                            const SinkhornOptions& sinkhorn) {
  RiskResult r;
  r.mode = to_string(mode);
  if (mode == MotMode::Exact) {
    r.bstar = solve_generalized_barycenter(m, spec).value;
  } else {
    const MotProblem p = build_problem(m, spec);
    const MotSolution sol = solve_sinkhorn(p, sinkhorn);
    r.bstar = bstar_from_value(p, sol.value);
  }
  r.risk = m.total_mass() - r.bstar;
  return r;
}

}  // namespace advmot

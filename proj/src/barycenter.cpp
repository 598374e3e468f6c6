#include "advmot/barycenter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace advmot {

std::map<SubsetMask, double> decompose_mass(std::span<const double> u) {
  const auto k = u.size();
  if (k == 0 || k > static_cast<std::size_t>(kMaxClasses)) throw InputError("decompose_mass: bad vector length");
  double mx = 0.0;
  for (double v : u) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw InputError("decompose_mass: entries must lie in [0,1]");
    mx = std::max(mx, v);
  }
  if (std::abs(mx - 1.0) > 1e-12) throw InputError("decompose_mass: max entry must equal 1");

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });

  // Nested sets {order[j], ..., order[k-1]} get the increments of the sorted values.
  std::map<SubsetMask, double> r;
  SubsetMask tail = 0;
  for (std::size_t j = 0; j < k; ++j) tail |= SubsetMask{1} << order[j];
  double prev = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double v = std::clamp(u[order[j]], 0.0, 1.0);
    const double inc = (j + 1 == k ? 1.0 : v) - prev;
    if (inc > 0.0) r[tail] += inc;
    prev = j + 1 == k ? 1.0 : v;
    tail &= ~(SubsetMask{1} << order[j]);
  }
  return r;
}

namespace {

struct Column {
  SubsetMask subset;
  std::vector<std::size_t> atoms;
  double set_cost;
  Point witness;
};

// Depth-first over one atom per class of `labels`; Ball costs prune any partial
// tuple with a pair farther apart than 2 epsilon.
void enumerate_tuples(const LabeledMeasure& m, const CostSpec& spec, SubsetMask subset, const std::vector<int>& labels,
                      const std::vector<std::vector<std::size_t>>& by_class, std::vector<std::size_t>& current,
                      std::vector<Column>& out, std::size_t cap) {
  const std::size_t depth = current.size();
  if (depth == labels.size()) {
    std::vector<Point> pts;
    pts.reserve(depth);
    for (auto a : current) pts.push_back(m.atom(a).x);
    SetCostResult sc = set_cost(spec, pts);
    if (!sc.finite()) return;
    if (out.size() >= cap) {
      throw ResourceCapError("stratified LP exceeds the column cap of " + std::to_string(cap) + " finite tuples");
    }
    out.push_back(Column{subset, current, sc.value, std::move(*sc.witness)});
    return;
  }
  const double reach = spec.is_ball() ? 2.0 * spec.epsilon() + 2.0 * kBallSlack : kInf;
  for (auto a : by_class[labels[depth] - 1]) {
    bool ok = true;
    if (spec.is_ball()) {
      for (auto b : current) {
        if (ground_distance(spec, m.atom(a).x, m.atom(b).x) > reach) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    current.push_back(a);
    enumerate_tuples(m, spec, subset, labels, by_class, current, out, cap);
    current.pop_back();
  }
}

}  // namespace

AttackPlan reconstruct_attack(const LabeledMeasure& m, const std::vector<PlanEntry>& plan, const CostSpec& spec) {
  AttackPlan out;
  out.attacks.resize(static_cast<std::size_t>(m.num_classes()));
  for (const auto& e : plan) {
    out.lambda.add(e.witness, e.mass);
    for (auto a : e.atoms) {
      const auto& atom = m.atom(a);
      const double c = cost(spec, atom.x, e.witness);
      out.attacks[atom.label - 1].add(e.witness, e.mass);
      out.moves.push_back(Move{a, e.witness, e.mass, c});
      out.transport_cost += e.mass * c;
    }
  }
  return out;
}

AttackPlan reconstruct_attack(const LabeledMeasure& m, const BarycenterSolution& sol, const CostSpec& spec) {
  return reconstruct_attack(m, sol.plan, spec);
}

BarycenterSolution solve_generalized_barycenter(const LabeledMeasure& m, const CostSpec& spec,
                                                const BarycenterOptions& opt) {
  if (m.empty()) throw InputError("generalized barycenter of an empty measure");
  const int k = m.num_classes();
  if (k > opt.max_classes) {
    throw ResourceCapError("exact barycenter supports at most " + std::to_string(opt.max_classes) + " classes");
  }
  const SubsetTable table = enumerate_subsets(k);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) by_class[i - 1] = m.class_indices(i);

  BarycenterSolution sol;
  for (SubsetMask s : table.masks) {
    double prod = 1.0;
    for (int i : mask_labels(s)) prod *= static_cast<double>(by_class[i - 1].size());
    sol.column_bound += prod;
  }

  std::vector<Column> columns;
  for (SubsetMask s : table.masks) {
    const auto labels = mask_labels(s);
    std::vector<std::size_t> current;
    enumerate_tuples(m, spec, s, labels, by_class, current, columns, opt.max_columns);
  }
  sol.num_columns = columns.size();

  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = static_cast<Eigen::Index>(columns.size());
  LinearProgram lp;
  lp.constraints = Eigen::MatrixXd::Zero(rows, cols);
  lp.objective.resize(cols);
  lp.rhs.resize(rows);
  lp.tags.reserve(columns.size());
  for (Eigen::Index a = 0; a < rows; ++a) lp.rhs[a] = m.atom(static_cast<std::size_t>(a)).weight;
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto& col = columns[static_cast<std::size_t>(c)];
    lp.objective[c] = col.set_cost + 1.0;
    ColumnTag tag{static_cast<std::int64_t>(col.subset)};
    for (auto a : col.atoms) {
      lp.constraints(static_cast<Eigen::Index>(a), c) = 1.0;
      tag.push_back(static_cast<std::int64_t>(a));
    }
    lp.tags.push_back(std::move(tag));
  }

  sol.lp = solve_lp(lp, opt.lp);
  if (!sol.lp.optimal()) {
    throw std::runtime_error("stratified LP did not solve to optimality: " + to_string(sol.lp.status));
  }
  sol.value = sol.lp.objective;
  sol.atom_duals = sol.lp.duals;
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double mass = sol.lp.primal[c];
    if (!(mass > 0.0)) continue;
    const auto& col = columns[static_cast<std::size_t>(c)];
    sol.plan.push_back(PlanEntry{col.subset, col.atoms, mass, col.set_cost, col.witness});
  }
  AttackPlan attack = reconstruct_attack(m, sol.plan, spec);
  sol.lambda = std::move(attack.lambda);
  sol.attacks = std::move(attack.attacks);
  sol.moves = std::move(attack.moves);
  sol.transport_cost = attack.transport_cost;
  return sol;
}

LocalSolution local_value(std::span<const std::optional<LabeledPoint>> entries, int num_classes,
                          const CostSpec& spec) {
  LocalSolution out;
  const double unit = 1.0 / static_cast<double>(entries.size());
  // Distinct locations per class, and which entries sit there.
  std::vector<std::vector<std::size_t>> class_entries(static_cast<std::size_t>(num_classes));
  bool one_location = true;
  for (std::size_t l = 0; l < entries.size(); ++l) {
    if (!entries[l]) continue;
    const int label = entries[l]->label;
    if (label < 1 || label > num_classes) throw InputError("tuple entry label out of range");
    auto& ce = class_entries[label - 1];
    if (!ce.empty() && !coords_equal(entries[ce.front()]->x, entries[l]->x)) one_location = false;
    ce.push_back(l);
  }
  std::vector<int> present;
  for (int i = 1; i <= num_classes; ++i)
    if (!class_entries[i - 1].empty()) present.push_back(i);
  if (present.empty()) return out;

  if (!one_location) {
    std::vector<LabeledPoint> pts;
    for (const auto& e : entries)
      if (e) pts.push_back(LabeledPoint{e->x, e->label, unit});
    const LabeledMeasure hat = LabeledMeasure::from_points(std::move(pts), num_classes);
    const BarycenterSolution sol = solve_generalized_barycenter(hat, spec);
    out.value = sol.value;
    for (const auto& mv : sol.moves) {
      const auto& atom = hat.atom(mv.atom);
      std::vector<std::size_t> here;
      for (auto l : class_entries[atom.label - 1])
        if (coords_equal(entries[l]->x, atom.x)) here.push_back(l);
      for (auto l : here) out.moves.push_back(LocalMove{l, mv.target, mv.mass / static_cast<double>(here.size())});
    }
    return out;
  }

  // m_A LP: one row per present class, one column per subset of present classes with finite c_A.
  const auto p = present.size();
  struct Col {
    std::vector<int> labels;
    double c;
    Point witness;
  };
  std::vector<Col> cols;
  for (SubsetMask s = 1; s < (SubsetMask{1} << p); ++s) {
    Col col;
    std::vector<Point> pts;
    for (std::size_t q = 0; q < p; ++q) {
      if (!((s >> q) & 1u)) continue;
      col.labels.push_back(present[q]);
      pts.push_back(entries[class_entries[present[q] - 1].front()]->x);
    }
    SetCostResult sc = set_cost(spec, pts);
    if (!sc.finite()) continue;
    col.c = sc.value;
    col.witness = std::move(*sc.witness);
    cols.push_back(std::move(col));
  }
  LinearProgram lp;
  lp.constraints = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(cols.size()));
  lp.objective.resize(static_cast<Eigen::Index>(cols.size()));
  lp.rhs.resize(static_cast<Eigen::Index>(p));
  for (std::size_t q = 0; q < p; ++q)
    lp.rhs[static_cast<Eigen::Index>(q)] = unit * static_cast<double>(class_entries[present[q] - 1].size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    lp.objective[static_cast<Eigen::Index>(c)] = cols[c].c + 1.0;
    for (int label : cols[c].labels) {
      const auto q = std::find(present.begin(), present.end(), label) - present.begin();
      lp.constraints(q, static_cast<Eigen::Index>(c)) = 1.0;
    }
  }
  const LpSolution sol = solve_lp(lp);
  if (!sol.optimal()) throw std::runtime_error("local barycenter LP failed: " + to_string(sol.status));
  out.value = sol.objective;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const double mass = sol.primal[static_cast<Eigen::Index>(c)];
    if (!(mass > 0.0)) continue;
    for (int label : cols[c].labels) {
      const auto& ce = class_entries[label - 1];
      for (auto l : ce) out.moves.push_back(LocalMove{l, cols[c].witness, mass / static_cast<double>(ce.size())});
    }
  }
  return out;
}

}  // namespace advmot

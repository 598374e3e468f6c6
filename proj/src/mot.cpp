#include "advmot/mot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace advmot {

std::string to_string(MotStatus s) {
  switch (s) {
    case MotStatus::Optimal: return "optimal";
    case MotStatus::Converged: return "converged";
    case MotStatus::NotConverged: return "not_converged";
    case MotStatus::InfeasibleKernel: return "infeasible_kernel";
    case MotStatus::Failed: return "failed";
  }
  return "unknown";
}

std::string to_string(MotMode m) { return m == MotMode::Exact ? "exact" : "sinkhorn"; }

std::vector<std::size_t> MotProblem::unravel(std::size_t linear) const {
  std::vector<std::size_t> t(static_cast<std::size_t>(num_classes));
  const std::size_t b = base();
  for (auto& v : t) {
    v = linear % b;
    linear /= b;
  }
  return t;
}

std::size_t MotProblem::ravel(std::span<const std::size_t> tuple) const {
  std::size_t linear = 0;
  for (std::size_t j = tuple.size(); j-- > 0;) linear = linear * base() + tuple[j];
  return linear;
}

std::vector<std::optional<LabeledPoint>> MotProblem::entries(std::size_t linear) const {
  std::vector<std::optional<LabeledPoint>> out;
  for (auto a : unravel(linear)) {
    if (ghost.is_ghost(a)) {
      out.emplace_back();
    } else {
      out.emplace_back(measure.atom(a));
    }
  }
  return out;
}

std::size_t MotSolution::support_size(double threshold) const {
  std::size_t s = 0;
  for (Eigen::Index t = 0; t < coupling.size(); ++t)
    if (coupling[t] > threshold) ++s;
  return s;
}

MotProblem build_problem(const LabeledMeasure& m, const CostSpec& spec, const MotOptions& opt) {
  if (m.empty()) throw InputError("MOT problem of an empty measure");
  MotProblem p;
  p.measure = m;
  p.spec = spec;
  p.num_classes = m.num_classes();
  p.ghost = GhostIndex(m.size());
  p.total_mass = m.total_mass();

  const double entries = std::pow(static_cast<double>(p.base()), p.num_classes);
  if (entries > opt.max_tensor_entries) {
    throw ResourceCapError("cost tensor has " + std::to_string(static_cast<long double>(entries)) +
                           " entries, above the cap; use fewer atoms or classes");
  }
  p.nu.resize(static_cast<Eigen::Index>(p.base()));
  for (std::size_t a = 0; a < m.size(); ++a) p.nu[static_cast<Eigen::Index>(a)] = m.atom(a).weight / (2.0 * p.total_mass);
  p.nu[static_cast<Eigen::Index>(p.ghost.ghost())] = 0.5;

  const auto n_entries = static_cast<std::size_t>(entries);
  p.tensor.resize(static_cast<Eigen::Index>(n_entries));
  std::map<std::vector<std::size_t>, double> memo;
  std::vector<std::size_t> key;
  for (std::size_t t = 0; t < n_entries; ++t) {
    key.clear();
    for (auto a : p.unravel(t))
      if (!p.ghost.is_ghost(a)) key.push_back(a);
    std::sort(key.begin(), key.end());
    auto it = memo.find(key);
    if (it == memo.end()) {
      const auto ent = p.entries(t);
      it = memo.emplace(key, local_value(ent, p.num_classes, spec).value).first;
    }
    p.tensor[static_cast<Eigen::Index>(t)] = it->second;
  }
  p.distinct_local_problems = memo.size();
  return p;
}

std::vector<Eigen::VectorXd> marginals(const MotProblem& p, const Eigen::VectorXd& coupling) {
  const auto k = static_cast<std::size_t>(p.num_classes);
  std::vector<Eigen::VectorXd> out(k, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.base())));
  for (std::size_t t = 0; t < p.num_entries(); ++t) {
    const double w = coupling[static_cast<Eigen::Index>(t)];
    if (w == 0.0) continue;
    std::size_t rest = t;
    for (std::size_t j = 0; j < k; ++j) {
      out[j][static_cast<Eigen::Index>(rest % p.base())] += w;
      rest /= p.base();
    }
  }
  return out;
}

double dual_objective(const MotProblem& p, const std::vector<Eigen::VectorXd>& potentials) {
  double s = 0.0;
  for (const auto& phi : potentials) {
    for (Eigen::Index a = 0; a < phi.size(); ++a)
      if (p.nu[a] > 0.0) s += phi[a] * p.nu[a];
  }
  return s;
}

double max_dual_violation(const MotProblem& p, const std::vector<Eigen::VectorXd>& potentials) {
  double worst = -kInf;
  for (std::size_t t = 0; t < p.num_entries(); ++t) {
    const double c = p.tensor[static_cast<Eigen::Index>(t)];
    if (!std::isfinite(c)) continue;
    double s = 0.0;
    std::size_t rest = t;
    for (const auto& phi : potentials) {
      s += phi[static_cast<Eigen::Index>(rest % p.base())];
      rest /= p.base();
    }
    worst = std::max(worst, s - c);
  }
  return worst;
}

MotSolution solve_exact(const MotProblem& p, const MotOptions& opt) {
  std::vector<std::size_t> cols;
  for (std::size_t t = 0; t < p.num_entries(); ++t)
    if (std::isfinite(p.tensor[static_cast<Eigen::Index>(t)])) cols.push_back(t);
  if (static_cast<double>(cols.size()) > opt.max_exact_columns) {
    throw ResourceCapError("exact MOT LP would have " + std::to_string(cols.size()) +
                           " columns, above the cap; use sinkhorn mode or fewer atoms");
  }
  const auto k = static_cast<std::size_t>(p.num_classes);
  const auto b = p.base();
  LinearProgram lp;
  lp.constraints = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k * b), static_cast<Eigen::Index>(cols.size()));
  lp.objective.resize(static_cast<Eigen::Index>(cols.size()));
  lp.rhs.resize(static_cast<Eigen::Index>(k * b));
  for (std::size_t j = 0; j < k; ++j) lp.rhs.segment(static_cast<Eigen::Index>(j * b), static_cast<Eigen::Index>(b)) = p.nu;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    lp.objective[static_cast<Eigen::Index>(c)] = p.tensor[static_cast<Eigen::Index>(cols[c])];
    std::size_t rest = cols[c];
    for (std::size_t j = 0; j < k; ++j) {
      lp.constraints(static_cast<Eigen::Index>(j * b + rest % b), static_cast<Eigen::Index>(c)) = 1.0;
      rest /= b;
    }
  }
  const LpSolution lps = solve_lp(lp);

  MotSolution sol;
  sol.mode = MotMode::Exact;
  sol.iterations = lps.iterations;
  if (!lps.optimal()) {
    sol.status = MotStatus::Failed;
    throw std::runtime_error("exact MOT LP failed: " + to_string(lps.status));
  }
  sol.status = MotStatus::Optimal;
  sol.coupling = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.num_entries()));
  for (std::size_t c = 0; c < cols.size(); ++c) sol.coupling[static_cast<Eigen::Index>(cols[c])] = lps.primal[static_cast<Eigen::Index>(c)];
  sol.value = lps.objective;
  sol.raw_value = sol.value;
  for (std::size_t j = 0; j < k; ++j) sol.potentials.push_back(lps.duals.segment(static_cast<Eigen::Index>(j * b), static_cast<Eigen::Index>(b)));
  sol.dual_value = dual_objective(p, sol.potentials);
  sol.duality_gap = std::abs(sol.value - sol.dual_value);
  sol.marginal_residual = lps.primal_residual;
  return sol;
}

namespace {

// Log-sum-exp of s/eta over each bucket of coordinate j; -inf where the bucket is empty.
Eigen::VectorXd log_marginal(const MotProblem& p, const Eigen::VectorXd& s, const std::vector<char>& live, std::size_t j,
                             double eta) {
  const auto b = p.base();
  std::size_t stride = 1;
  for (std::size_t q = 0; q < j; ++q) stride *= b;
  Eigen::VectorXd mx = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(b), -kInf);
  for (std::size_t t = 0; t < p.num_entries(); ++t) {
    if (!live[t]) continue;
    auto& m = mx[static_cast<Eigen::Index>((t / stride) % b)];
    m = std::max(m, s[static_cast<Eigen::Index>(t)]);
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b));
  for (std::size_t t = 0; t < p.num_entries(); ++t) {
    if (!live[t]) continue;
    const auto a = static_cast<Eigen::Index>((t / stride) % b);
    acc[a] += std::exp((s[static_cast<Eigen::Index>(t)] - mx[a]) / eta);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(b));
  for (Eigen::Index a = 0; a < out.size(); ++a) out[a] = std::isfinite(mx[a]) ? mx[a] / eta + std::log(acc[a]) : -kInf;
  return out;
}

double marginal_l1(const MotProblem& p, const std::vector<Eigen::VectorXd>& marg) {
  double worst = 0.0;
  for (const auto& m : marg) worst = std::max(worst, (m - p.nu).cwiseAbs().sum());
  return worst;
}

// Multimarginal rounding onto the polytope: scale each marginal down to nu, then
// add the rank-one product of the deficits.
void round_coupling(const MotProblem& p, Eigen::VectorXd& pi) {
  const auto k = static_cast<std::size_t>(p.num_classes);
  const auto b = p.base();
  for (std::size_t j = 0; j < k; ++j) {
    const auto marg = marginals(p, pi)[j];
    Eigen::VectorXd scale(static_cast<Eigen::Index>(b));
    for (Eigen::Index a = 0; a < scale.size(); ++a) scale[a] = marg[a] > p.nu[a] ? p.nu[a] / marg[a] : 1.0;
    std::size_t stride = 1;
    for (std::size_t q = 0; q < j; ++q) stride *= b;
    for (std::size_t t = 0; t < p.num_entries(); ++t) pi[static_cast<Eigen::Index>(t)] *= scale[static_cast<Eigen::Index>((t / stride) % b)];
  }
  const auto marg = marginals(p, pi);
  std::vector<Eigen::VectorXd> err(k);
  for (std::size_t j = 0; j < k; ++j) err[j] = (p.nu - marg[j]).cwiseMax(0.0);
  const double e = err[0].sum();
  if (!(e > 0.0)) return;
  const double norm = std::pow(e, static_cast<double>(k) - 1.0);
  for (std::size_t t = 0; t < p.num_entries(); ++t) {
    double prod = 1.0;
    std::size_t rest = t;
    for (std::size_t j = 0; j < k && prod != 0.0; ++j) {
      prod *= err[j][static_cast<Eigen::Index>(rest % b)];
      rest /= b;
    }
    pi[static_cast<Eigen::Index>(t)] += prod / norm;
  }
}

}  // namespace

MotSolution solve_sinkhorn(const MotProblem& p, const SinkhornOptions& opt) {
  if (!(opt.eta > 0.0)) throw InputError("sinkhorn regularization eta must be > 0");
  if (!(opt.tol > 0.0)) throw InputError("sinkhorn tolerance must be > 0");
  const auto k = static_cast<std::size_t>(p.num_classes);
  const auto b = p.base();
  const std::size_t n_entries = p.num_entries();

  MotSolution sol;
  sol.mode = MotMode::Entropic;
  sol.eta = opt.eta;

  // Live entries: finite cost and every coordinate carries mass.
  std::vector<char> live(n_entries, 0);
  bool any_masked_cost = false;
  for (std::size_t t = 0; t < n_entries; ++t) {
    const double c = p.tensor[static_cast<Eigen::Index>(t)];
    if (!std::isfinite(c)) {
      any_masked_cost = true;
      continue;
    }
    bool ok = true;
    std::size_t rest = t;
    for (std::size_t j = 0; j < k && ok; ++j) {
      ok = p.nu[static_cast<Eigen::Index>(rest % b)] > 0.0;
      rest /= b;
    }
    live[t] = ok ? 1 : 0;
  }

  std::vector<Eigen::VectorXd> u(k, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b)));
  Eigen::VectorXd s(static_cast<Eigen::Index>(n_entries));
  auto recompute_s = [&] {
    for (std::size_t t = 0; t < n_entries; ++t) {
      if (!live[t]) {
        s[static_cast<Eigen::Index>(t)] = -kInf;
        continue;
      }
      double acc = -p.tensor[static_cast<Eigen::Index>(t)];
      std::size_t rest = t;
      for (std::size_t j = 0; j < k; ++j) {
        acc += u[j][static_cast<Eigen::Index>(rest % b)];
        rest /= b;
      }
      s[static_cast<Eigen::Index>(t)] = acc;
    }
  };
  auto coupling = [&] {
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_entries));
    for (std::size_t t = 0; t < n_entries; ++t)
      if (live[t]) pi[static_cast<Eigen::Index>(t)] = std::exp(s[static_cast<Eigen::Index>(t)] / opt.eta);
    return pi;
  };

  recompute_s();
  {
    const auto lm = log_marginal(p, s, live, 0, opt.eta);
    for (Eigen::Index a = 0; a < lm.size(); ++a) {
      if (p.nu[a] > 0.0 && !std::isfinite(lm[a])) {
        sol.status = MotStatus::InfeasibleKernel;
        sol.coupling = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_entries));
        sol.potentials = u;
        sol.marginal_residual = kInf;
        return sol;
      }
    }
  }

  const Eigen::VectorXd log_nu = p.nu.array().log();
  double residual = kInf;
  long it = 0;
  while (it < opt.max_iter) {
    recompute_s();
    for (std::size_t j = 0; j < k; ++j) {
      const auto lm = log_marginal(p, s, live, j, opt.eta);
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b));
      for (Eigen::Index a = 0; a < delta.size(); ++a)
        if (p.nu[a] > 0.0) delta[a] = opt.eta * (log_nu[a] - lm[a]);
      u[j] += delta;
      std::size_t stride = 1;
      for (std::size_t q = 0; q < j; ++q) stride *= b;
      for (std::size_t t = 0; t < n_entries; ++t)
        if (live[t]) s[static_cast<Eigen::Index>(t)] += delta[static_cast<Eigen::Index>((t / stride) % b)];
    }
    ++it;
    residual = marginal_l1(p, marginals(p, coupling()));
    if (residual <= opt.tol) break;
  }

  Eigen::VectorXd pi = coupling();
  sol.iterations = it;
  sol.marginal_residual = residual;
  sol.status = residual <= opt.tol ? MotStatus::Converged : MotStatus::NotConverged;
  sol.raw_value = 0.0;
  for (std::size_t t = 0; t < n_entries; ++t)
    if (live[t]) sol.raw_value += p.tensor[static_cast<Eigen::Index>(t)] * pi[static_cast<Eigen::Index>(t)];
  if (opt.round && !any_masked_cost) round_coupling(p, pi);
  sol.coupling = std::move(pi);
  sol.value = 0.0;
  for (std::size_t t = 0; t < n_entries; ++t)
    if (sol.coupling[static_cast<Eigen::Index>(t)] > 0.0)
      sol.value += p.tensor[static_cast<Eigen::Index>(t)] * sol.coupling[static_cast<Eigen::Index>(t)];

  // Potentials in cost units; atoms without mass get a value low enough to never bind.
  double big = 0.0;
  for (const auto& v : u)
    for (Eigen::Index a = 0; a < v.size(); ++a)
      if (p.nu[a] > 0.0) big = std::max(big, std::abs(v[a]));
  double cmax = 0.0;
  for (std::size_t t = 0; t < n_entries; ++t)
    if (std::isfinite(p.tensor[static_cast<Eigen::Index>(t)])) cmax = std::max(cmax, std::abs(p.tensor[static_cast<Eigen::Index>(t)]));
  for (auto& v : u)
    for (Eigen::Index a = 0; a < v.size(); ++a)
      if (!(p.nu[a] > 0.0)) v[a] = -(static_cast<double>(k) * big + cmax + 1.0);
  sol.potentials = std::move(u);
  sol.dual_value = dual_objective(p, sol.potentials);
  sol.duality_gap = std::abs(sol.value - sol.dual_value);
  return sol;
}

DualCertificate extract_duals(const MotProblem& p, const MotSolution& sol) {
  DualCertificate cert;
  cert.potentials = sol.potentials;
  if (cert.potentials.empty()) {
    cert.potentials.assign(static_cast<std::size_t>(p.num_classes), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.base())));
  }
  const double viol = max_dual_violation(p, cert.potentials);
  if (viol > 0.0) {
    cert.shift = viol;
    cert.potentials[0].array() -= viol;
  }
  cert.max_violation = max_dual_violation(p, cert.potentials);
  cert.dual_value = dual_objective(p, cert.potentials);
  return cert;
}

MotSolution symmetrize(const MotProblem& p, const MotSolution& sol, std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(p.num_classes);
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> sigma(k);
  std::iota(sigma.begin(), sigma.end(), std::size_t{0});
  double fact = 1.0;
  for (std::size_t q = 2; q <= k; ++q) fact *= static_cast<double>(q);
  if (fact <= 720.0) {
    do perms.push_back(sigma);
    while (std::next_permutation(sigma.begin(), sigma.end()));
  } else {
    std::mt19937_64 rng(seed);
    for (int r = 0; r < 720; ++r) {
      std::shuffle(sigma.begin(), sigma.end(), rng);
      perms.push_back(sigma);
    }
  }
  const double w = 1.0 / static_cast<double>(perms.size());

  MotSolution out = sol;
  out.coupling = Eigen::VectorXd::Zero(sol.coupling.size());
  std::vector<std::size_t> permuted(k);
  for (std::size_t t = 0; t < p.num_entries(); ++t) {
    const double mass = sol.coupling[static_cast<Eigen::Index>(t)];
    if (mass == 0.0) continue;
    const auto tuple = p.unravel(t);
    for (const auto& s : perms) {
      for (std::size_t j = 0; j < k; ++j) permuted[j] = tuple[s[j]];
      out.coupling[static_cast<Eigen::Index>(p.ravel(permuted))] += w * mass;
    }
  }
  out.value = 0.0;
  for (std::size_t t = 0; t < p.num_entries(); ++t)
    if (out.coupling[static_cast<Eigen::Index>(t)] > 0.0)
      out.value += p.tensor[static_cast<Eigen::Index>(t)] * out.coupling[static_cast<Eigen::Index>(t)];
  if (!sol.potentials.empty()) {
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.base()));
    for (const auto& phi : sol.potentials) avg += phi;
    avg /= static_cast<double>(k);
    out.potentials.assign(k, avg);
    out.dual_value = dual_objective(p, out.potentials);
    out.duality_gap = std::abs(out.value - out.dual_value);
  }
  return out;
}

double bstar_from_value(const MotProblem& p, double v) { return 2.0 * p.total_mass * v; }

double risk_from_value(const MotProblem& p, double v) { return p.total_mass - bstar_from_value(p, v); }

}  // namespace advmot

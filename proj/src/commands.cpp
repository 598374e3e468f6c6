#include "advmot/commands.hpp"

#include "advmot/barycenter.hpp"
#include "advmot/classifier.hpp"
#include "advmot/mot.hpp"
#include "advmot/reference_cases.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace advmot {

using nlohmann::json;

namespace {

// Exact MOT is attempted inside `solve` only when it stays small.
constexpr double kSolveMotColumns = 2e4;

LabeledMeasure load_input(const RunConfig& cfg) {
  LabeledMeasure m = read_measure_csv(cfg.input, cfg.num_classes);
  if (cfg.normalize) m = m.scaled(1.0 / m.total_mass());
  return m;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json point_json(const Point& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

json attack_json(const std::vector<PointMeasure>& classes) {
  json arr = json::array();
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t q = 0; q < classes[i].size(); ++q)
      arr.push_back({{"class", i + 1}, {"x", point_json(classes[i].points[q])}, {"mass", classes[i].weights[q]}});
  return arr;
}

SinkhornOptions sinkhorn_options(const RunConfig& cfg) {
  SinkhornOptions o;
  o.eta = cfg.solver.eta;
  o.tol = cfg.solver.tol;
  o.max_iter = cfg.solver.max_iter;
  return o;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string format_score(double s) {
  if (std::isinf(s)) return s < 0 ? "-inf" : "inf";
  std::ostringstream o;
  o << std::setprecision(std::numeric_limits<double>::max_digits10) << s;
  return o.str();
}

}  // namespace

std::string error_record(const std::string& kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}}.dump();
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  validate_config(cfg, true);
  const LabeledMeasure m = load_input(cfg);
  json rec = {{"command", "solve"},
              {"mode", to_string(cfg.solver.mode)},
              {"cost", cfg.cost.describe()},
              {"num_atoms", m.size()},
              {"num_classes", m.num_classes()},
              {"total_mass", m.total_mass()}};
  int code = kExitOk;

  if (cfg.solver.mode == MotMode::Exact) {
    const BarycenterSolution bary = solve_generalized_barycenter(m, cfg.cost);
    const PotentialBundle bundle = bundle_from_barycenter(bary, m, cfg.cost);
    rec["B_star"] = bary.value;
    rec["risk"] = m.total_mass() - bary.value;
    rec["eta"] = nullptr;
    rec["approximate"] = false;
    rec["status"] = "optimal";
    rec["iterations"] = bary.lp.iterations;
    rec["marginal_residual"] = bary.lp.primal_residual;
    rec["duality_gap"] = bary.lp.duality_gap;
    rec["coupling_support"] = bary.plan.size();
    rec["potentials"] = {{"psi", vec_json(bundle.psi)}};
    rec["mot_value"] = nullptr;
    try {
      MotOptions mo;
      mo.max_exact_columns = kSolveMotColumns;
      const MotProblem p = build_problem(m, cfg.cost, mo);
      const MotSolution sol = solve_exact(p, mo);
      rec["mot_value"] = sol.value;
      rec["iterations"] = sol.iterations;
      rec["marginal_residual"] = sol.marginal_residual;
      rec["duality_gap"] = sol.duality_gap;
      rec["coupling_support"] = sol.support_size();
      json phi = json::array();
      for (const auto& f : sol.potentials) phi.push_back(vec_json(f));
      rec["potentials"]["phi"] = phi;
    } catch (const ResourceCapError& e) {
      log << "exact MOT skipped: " << e.what() << "\n";
      rec["mot_skipped"] = e.what();
    }
    rec["attack_atoms"] = attack_json(bary.attacks);
  } else {
    const MotProblem p = build_problem(m, cfg.cost);
    const MotSolution sol = solve_sinkhorn(p, sinkhorn_options(cfg));
    rec["eta"] = cfg.solver.eta;
    rec["approximate"] = true;
    rec["status"] = to_string(sol.status);
    rec["iterations"] = sol.iterations;
    rec["marginal_residual"] = sol.marginal_residual;
    rec["mot_value"] = sol.value;
    rec["B_star"] = bstar_from_value(p, sol.value);
    rec["risk"] = risk_from_value(p, sol.value);
    if (sol.status == MotStatus::InfeasibleKernel) {
      rec["duality_gap"] = nullptr;
      out << rec.dump() << "\n";
      out << error_record("infeasible_kernel", "a marginal atom has no finite-cost tuple") << "\n";
      return kExitValidation;
    }
    const DualCertificate cert = extract_duals(p, sol);
    rec["duality_gap"] = std::abs(sol.value - cert.dual_value);
    rec["dual_shift"] = cert.shift;
    rec["coupling_support"] = sol.support_size(1e-15);
    const PotentialBundle bundle = build_psi(cert.potentials, m, cfg.cost, true);
    json phi = json::array();
    for (const auto& f : cert.potentials) phi.push_back(vec_json(f));
    rec["potentials"] = {{"phi", phi}, {"psi", vec_json(bundle.psi)}};
    rec["attack_atoms"] = attack_json(build_attack(p, sol, 1e-15).classes);
    if (sol.status != MotStatus::Converged) code = kExitValidation;
  }
  out << rec.dump() << "\n";
  if (code == kExitValidation) {
    out << error_record("not_converged", "sinkhorn stopped at max_iter above the residual tolerance") << "\n";
  }
  return code;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  validate_config(cfg, true);
  if (!cfg.cost.is_ball()) throw InputError("sweep needs a ball cost");
  if (cfg.sweep_epsilons.empty()) throw InputError("sweep needs an epsilon grid ('sweep' config key)");
  const LabeledMeasure m = load_input(cfg);
  const auto n = cfg.sweep_epsilons.size();
  std::vector<json> rows(n);
  std::vector<int> codes(n, kExitOk);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      const double eps = cfg.sweep_epsilons[k];
      json row = {{"epsilon", eps}, {"mode", to_string(cfg.solver.mode)}, {"num_atoms", m.size()}};
      try {
        const CostSpec spec = cfg.cost.with_epsilon(eps);
        if (cfg.solver.mode == MotMode::Exact) {
          const double b = solve_generalized_barycenter(m, spec).value;
          row["B_star_or_bound"] = b;
          row["risk_or_bound"] = m.total_mass() - b;
        } else {
          const MotProblem p = build_problem(m, spec);
          const MotSolution sol = solve_sinkhorn(p, sinkhorn_options(cfg));
          row["B_star_or_bound"] = bstar_from_value(p, sol.value);
          row["risk_or_bound"] = risk_from_value(p, sol.value);
          row["status"] = to_string(sol.status);
          row["eta"] = cfg.solver.eta;
        }
      } catch (const ResourceCapError& e) {
        row["error"] = "resource_cap";
        row["message"] = e.what();
        codes[k] = kExitResource;
      } catch (const InputError& e) {
        row["error"] = "config";
        row["message"] = e.what();
        codes[k] = kExitConfig;
      } catch (const std::exception& e) {
        row["error"] = "solver";
        row["message"] = e.what();
        codes[k] = kExitValidation;
      }
      rows[k] = std::move(row);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_threads = std::min<std::size_t>(hw, n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& row : rows) out << row.dump() << "\n";
  for (int c : codes)
    if (c != kExitOk) return c;

  if (cfg.solver.mode == MotMode::Exact) {
    for (std::size_t k = 1; k < n; ++k) {
      const double prev = rows[k - 1]["risk_or_bound"].get<double>();
      const double cur = rows[k]["risk_or_bound"].get<double>();
      if (cur < prev - 1e-9) {
        out << error_record("validation", "exact risk decreased between epsilon " +
                                              std::to_string(cfg.sweep_epsilons[k - 1]) + " and " +
                                              std::to_string(cfg.sweep_epsilons[k]))
            << "\n";
        return kExitValidation;
      }
    }
  }
  log << "sweep finished: " << n << " epsilon values\n";
  return kExitOk;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  validate_config(cfg, true);
  if (!cfg.grid) throw InputError("classify needs a grid (--grid xmin,xmax,ymin,ymax,res)");
  const LabeledMeasure m = load_input(cfg);
  if (m.dim() != 2) {
    throw InputError("classify grids are 2-D but the input has dimension " + std::to_string(m.dim()) +
                     "; project the data to two coordinates first");
  }
  PotentialBundle bundle;
  if (cfg.solver.mode == MotMode::Exact) {
    const BarycenterSolution bary = solve_generalized_barycenter(m, cfg.cost);
    bundle = bundle_from_barycenter(bary, m, cfg.cost);
  } else {
    const MotProblem p = build_problem(m, cfg.cost);
    const MotSolution sol = solve_sinkhorn(p, sinkhorn_options(cfg));
    bundle = build_psi(extract_duals(p, sol).potentials, m, cfg.cost, true);
  }
  const int k = m.num_classes();
  const auto& g = *cfg.grid;
  out << "x0,x1,label";
  for (int i = 1; i <= k; ++i) out << ",score_" << i;
  out << "\n";
  std::vector<long> counts(static_cast<std::size_t>(k + 1), 0);
  for (int r = 0; r < g.res; ++r) {
    const double y = g.ymin + (g.ymax - g.ymin) * r / (g.res - 1);
    for (int c = 0; c < g.res; ++c) {
      const double x = g.xmin + (g.xmax - g.xmin) * c / (g.res - 1);
      const Classification cl = classify(bundle, cfg.cost, Point{{x, y}});
      ++counts[static_cast<std::size_t>(cl.label)];
      out << format_score(x) << "," << format_score(y) << "," << cl.label;
      for (double s : cl.scores) out << "," << format_score(s);
      out << "\n";
    }
  }
  json summary = {{"command", "classify"},
                  {"mode", to_string(cfg.solver.mode)},
                  {"approximate", bundle.approximate},
                  {"cells", g.res * g.res},
                  {"label_counts", counts},
                  {"dual_value", bundle.dual_value}};
  log << summary.dump() << "\n";
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  bool all_ok = true;
  auto report = [&](const std::string& group, bool ok, double residual, std::size_t count) {
    all_ok = all_ok && ok;
    out << json{{"group", group}, {"pass", ok}, {"max_residual", residual}, {"count", count}}.dump() << "\n";
  };

  {  // binary local table
    const CostSpec spec = CostSpec::ball(1.0);
    const LabeledPoint a{Point{{0.0, 0.0}}, 1, 1.0}, b{Point{{1.5, 0.0}}, 2, 1.0}, far{Point{{3.0, 0.0}}, 2, 1.0};
    const std::vector<std::vector<std::optional<LabeledPoint>>> tuples = {
        {a, b}, {a, far}, {a, std::nullopt}, {std::nullopt, std::nullopt}};
    const std::vector<double> expected = {0.5, 1.0, 0.5, 0.0};
    double worst = 0.0;
    for (std::size_t q = 0; q < tuples.size(); ++q)
      worst = std::max(worst, std::abs(local_value(tuples[q], 2, spec).value - expected[q]));
    report("binary_table", worst <= 1e-12, worst, tuples.size());
  }
  {  // three-point closed forms through both solvers
    double worst = 0.0;
    bool ok = true;
    const auto cat = toy_catalog();
    for (const auto& tc : cat) {
      const LabeledMeasure m = tc.measure();
      const double bary = solve_generalized_barycenter(m, tc.cost()).value;
      const MotProblem p = build_problem(m, tc.cost());
      const double mot = bstar_from_value(p, solve_exact(p).value);
      worst = std::max({worst, std::abs(bary - tc.expected_bstar), std::abs(mot - tc.expected_bstar)});
      ok = ok && std::abs(bary - tc.expected_bstar) <= 1e-8 && std::abs(mot - tc.expected_bstar) <= 1e-7;
    }
    report("toy_cases", ok, worst, cat.size());
  }
  {  // decompose_mass equalities
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
      const int k = 2 + static_cast<int>(unif(rng) * 5.0);
      std::vector<double> u(static_cast<std::size_t>(k));
      for (auto& v : u) v = unif(rng) < 0.2 ? 0.0 : unif(rng);
      u[static_cast<std::size_t>(unif(rng) * k) % u.size()] = 1.0;
      const auto r = decompose_mass(u);
      double total = 0.0;
      std::vector<double> per(u.size(), 0.0);
      for (const auto& [mask, w] : r) {
        total += w;
        for (std::size_t i = 0; i < u.size(); ++i)
          if (mask_contains(mask, static_cast<int>(i) + 1)) per[i] += w;
      }
      worst = std::max(worst, std::abs(total - 1.0));
      for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(per[i] - u[i]));
    }
    report("decompose_mass", worst <= 1e-12, worst, trials);
  }
  {  // cross-solver fuzz
    std::mt19937_64 rng(cfg.seed);
    double worst = 0.0, worst_gap = 0.0, worst_psi = -kInf;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
      const RandomInstance inst = random_instance(rng, 6, {2, 3, 4});
      const double bary = solve_generalized_barycenter(inst.measure, inst.spec).value;
      const MotProblem p = build_problem(inst.measure, inst.spec);
      const MotSolution sol = solve_exact(p);
      worst = std::max(worst, std::abs(bstar_from_value(p, sol.value) - bary));
      worst_gap = std::max(worst_gap, sol.duality_gap);
      const PotentialBundle b = build_psi(extract_duals(p, sol).potentials, inst.measure, inst.spec);
      worst_psi = std::max(worst_psi, b.max_violation);
    }
    report("cross_solver_fuzz", worst <= 1e-7, worst, trials);
    report("exact_duality_gap", worst_gap <= 1e-8, worst_gap, trials);
    report("psi_feasibility", worst_psi <= 1e-8, std::max(worst_psi, 0.0), trials);
  }
  log << "validate: " << (all_ok ? "all groups pass" : "failures present") << "\n";
  return all_ok ? kExitOk : kExitValidation;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  std::ostringstream records, diag;
  int code = kExitOk;
  try {
    if (name == "solve") {
      code = cmd_solve(cfg, records, diag);
    } else if (name == "sweep") {
      code = cmd_sweep(cfg, records, diag);
    } else if (name == "classify") {
      code = cmd_classify(cfg, records, diag);
    } else if (name == "validate") {
      code = cmd_validate(cfg, records, diag);
    } else {
      throw InputError("unknown command '" + name + "'");
    }
  } catch (const ResourceCapError& e) {
    records << error_record("resource_cap", e.what()) << "\n";
    code = kExitResource;
  } catch (const InputError& e) {
    records << error_record("config", e.what()) << "\n";
    code = kExitConfig;
  } catch (const std::exception& e) {
    records << error_record("solver", e.what()) << "\n";
    code = kExitValidation;
  }

  out << records.str();
  log << diag.str();
  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    const std::filesystem::path dir(cfg.out_dir);
    const std::string file = name == "classify" && code == kExitOk ? "classify.csv" : name + ".jsonl";
    std::ofstream(dir / file) << records.str();
    std::ofstream run_log(dir / "run.log", std::ios::app);
    run_log << timestamp() << " " << name << " exit=" << code << " config=" << config_to_json(cfg) << "\n"
            << diag.str();
  }
  return code;
}

}  // namespace advmot

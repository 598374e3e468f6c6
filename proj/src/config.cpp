#include "advmot/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace advmot {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("config key '") + key + "' has the wrong type");
  }
}

CostSpec parse_cost(const json& j) {
  if (!j.is_object()) throw InputError("config 'cost' must be an object");
  const auto kind = get_or<std::string>(j, "kind", "ball");
  if (kind == "ball") {
    const auto metric = get_or<std::string>(j, "metric", "l2");
    Metric m;
    if (metric == "l2") {
      m = Metric::L2;
    } else if (metric == "linf") {
      m = Metric::LInf;
    } else {
      throw InputError("unknown metric '" + metric + "' (use l2 or linf)");
    }
    return CostSpec::ball(get_or<double>(j, "epsilon", 0.3), m);
  }
  if (kind == "power") {
    const auto metric = get_or<std::string>(j, "metric", "l2");
    if (metric != "l2") throw InputError("power cost supports metric l2 only");
    return CostSpec::power(get_or<int>(j, "p", 2), get_or<double>(j, "tau", 1.0));
  }
  throw InputError("unknown cost kind '" + kind + "' (use ball or power)");
}

}  // namespace

MotMode parse_mode(const std::string& text) {
  if (text == "exact") return MotMode::Exact;
  if (text == "sinkhorn" || text == "entropic") return MotMode::Entropic;
  throw InputError("unknown solver mode '" + text + "' (use exact or sinkhorn)");
}

GridConfig parse_grid(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("grid must be 'xmin,xmax,ymin,ymax,res'");
    }
  }
  if (v.size() != 5) throw InputError("grid must be 'xmin,xmax,ymin,ymax,res'");
  GridConfig g{v[0], v[1], v[2], v[3], static_cast<int>(v[4])};
  if (static_cast<double>(g.res) != v[4]) throw InputError("grid resolution must be an integer");
  return g;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config must be a JSON object");
  RunConfig cfg;
  cfg.input = get_or<std::string>(j, "input", "");
  if (j.contains("cost")) cfg.cost = parse_cost(j.at("cost"));
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (!s.is_object()) throw InputError("config 'solver' must be an object");
    cfg.solver.mode = parse_mode(get_or<std::string>(s, "mode", "exact"));
    cfg.solver.eta = get_or<double>(s, "eta", cfg.solver.eta);
    cfg.solver.tol = get_or<double>(s, "tol", cfg.solver.tol);
    cfg.solver.max_iter = get_or<long>(s, "max_iter", cfg.solver.max_iter);
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (s.is_array()) {
      cfg.sweep_epsilons = s.get<std::vector<double>>();
    } else if (s.is_object()) {
      cfg.sweep_epsilons = get_or<std::vector<double>>(s, "epsilon", {});
    } else {
      throw InputError("config 'sweep' must be an array or {\"epsilon\": [...]}");
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.is_string()) {
      cfg.grid = parse_grid(g.get<std::string>());
    } else if (g.is_object()) {
      cfg.grid = GridConfig{get_or<double>(g, "xmin", 0.0), get_or<double>(g, "xmax", 1.0),
                            get_or<double>(g, "ymin", 0.0), get_or<double>(g, "ymax", 1.0), get_or<int>(g, "res", 2)};
    } else {
      throw InputError("config 'grid' must be a string or an object");
    }
  }
  cfg.out_dir = get_or<std::string>(j, "out", "");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("num_classes")) cfg.num_classes = get_or<int>(j, "num_classes", 2);
  cfg.normalize = get_or<bool>(j, "normalize", false);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const RunConfig& cfg, bool needs_input) {
  if (needs_input) {
    if (cfg.input.empty()) throw InputError("no input given (use --input or the 'input' config key)");
    if (!std::filesystem::exists(cfg.input)) throw InputError("input file does not exist: " + cfg.input);
  }
  for (std::size_t k = 1; k < cfg.sweep_epsilons.size(); ++k)
    if (!(cfg.sweep_epsilons[k] > cfg.sweep_epsilons[k - 1])) throw InputError("sweep grid must be strictly increasing");
  for (double e : cfg.sweep_epsilons)
    if (!(e >= 0.0)) throw InputError("sweep epsilons must be >= 0");
  if (cfg.grid) {
    if (cfg.grid->res < 2) throw InputError("grid resolution must be at least 2");
    if (!(cfg.grid->xmax > cfg.grid->xmin) || !(cfg.grid->ymax > cfg.grid->ymin))
      throw InputError("grid bounds must be increasing");
  }
  if (!(cfg.solver.eta > 0.0)) throw InputError("eta must be > 0");
  if (!(cfg.solver.tol > 0.0)) throw InputError("tol must be > 0");
  if (cfg.solver.max_iter < 1) throw InputError("max_iter must be >= 1");
}

std::string config_to_json(const RunConfig& cfg) {
  json cost;
  if (cfg.cost.is_ball()) {
    cost = {{"kind", "ball"},
            {"epsilon", cfg.cost.as_ball().epsilon},
            {"metric", cfg.cost.as_ball().metric == Metric::L2 ? "l2" : "linf"}};
  } else {
    cost = {{"kind", "power"}, {"p", cfg.cost.as_power().p}, {"tau", cfg.cost.as_power().tau}};
  }
  json j = {{"input", cfg.input},
            {"cost", cost},
            {"solver",
             {{"mode", to_string(cfg.solver.mode)},
              {"eta", cfg.solver.eta},
              {"tol", cfg.solver.tol},
              {"max_iter", cfg.solver.max_iter}}},
            {"sweep", {{"epsilon", cfg.sweep_epsilons}}},
            {"out", cfg.out_dir},
            {"seed", cfg.seed},
            {"normalize", cfg.normalize}};
  if (cfg.grid) {
    j["grid"] = {{"xmin", cfg.grid->xmin},
                 {"xmax", cfg.grid->xmax},
                 {"ymin", cfg.grid->ymin},
                 {"ymax", cfg.grid->ymax},
                 {"res", cfg.grid->res}};
  }
  if (cfg.num_classes) j["num_classes"] = *cfg.num_classes;
  return j.dump();
}

}  // namespace advmot

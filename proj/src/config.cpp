#include "jackfilter/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "jackfilter/csv.hpp"

namespace jackfilter {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

class KeyMap {
 public:
  explicit KeyMap(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
      }
      map_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
  }

  bool has(const std::string& key) const { return map_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) {
      throw ConfigError("missing required key '" + key + "' in " + path_);
    }
    return it->second;
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? to_number(key, map_.at(key)) : fallback;
  }

  double number_required(const std::string& key) const {
    return to_number(key, require(key));
  }

  long integer(const std::string& key, long fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    return static_cast<long>(v);
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = map_.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected boolean, got '" + v + "'");
  }

  Eigen::VectorXd vector(const std::string& key) const {
    const std::string v = require(key);
    std::vector<double> vals;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      vals.push_back(to_number(key, trim(item)));
    }
    if (vals.empty()) {
      throw ConfigError("key '" + key + "': empty vector");
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
  }

 private:
  double to_number(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected number, got '" + v +
                        "'");
    }
  }

  std::string path_;
  std::map<std::string, std::string> map_;
};

std::map<std::string, std::function<ModelSpec(double)>>& model_registry() {
  static std::map<std::string, std::function<ModelSpec(double)>> reg;
  return reg;
}

}  // namespace

void register_model(const std::string& name,
                    std::function<ModelSpec(double h_max)> factory) {
  model_registry()[name] = std::move(factory);
}

RunConfig parse_config(const std::string& path) {
  const KeyMap keys(path);
  RunConfig cfg;
  cfg.model_name = keys.str("model", "logistic");
  cfg.model_h_max = keys.number("model.h_max", 0.05);

  cfg.sim_t0 = keys.number("sim.t0", 0.0);
  cfg.sim_init = keys.vector("sim.init");
  cfg.times_count = static_cast<int>(keys.integer("sim.times.count", 0));
  cfg.times_end = keys.number_required("sim.times.end");
  const std::string mode = keys.str("sim.times.mode", "spaced");
  if (mode == "spaced") {
    cfg.times_mode = TimeSpacing::kSpaced;
  } else if (mode == "random") {
    cfg.times_mode = TimeSpacing::kRandom;
  } else {
    throw ConfigError("key 'sim.times.mode': expected spaced|random, got '" +
                      mode + "'");
  }
  cfg.q_diag = keys.vector("sim.Q.diag");
  cfg.r_diag = keys.vector("sim.R.diag");
  if (cfg.q_diag.minCoeff() < 0.0) {
    throw ConfigError("key 'sim.Q.diag': entries must be >= 0");
  }
  if (cfg.r_diag.minCoeff() < 0.0) {
    throw ConfigError("key 'sim.R.diag': entries must be >= 0");
  }
  cfg.sim_seed = static_cast<std::uint64_t>(keys.integer("sim.seed", 0));

  FilterConfig& f = cfg.filter;
  f.r = static_cast<int>(keys.integer("filter.r", 45));
  f.m = static_cast<int>(keys.integer("filter.m", 25));
  f.n0 = static_cast<int>(keys.integer("filter.n0", 50));
  f.mu = static_cast<int>(keys.integer("filter.mu", f.n0 - f.r));
  f.h_max = keys.number("filter.h_max", cfg.model_h_max);
  f.handoff_window = static_cast<int>(keys.integer("filter.handoff.window",
                                                   10));
  f.handoff_tol = keys.number("filter.handoff.tol", 0.05);
  f.omit_Qy = keys.boolean("filter.omit_Qy", false);
  f.omit_Px_minus = keys.boolean("filter.omit_Px_minus", false);
  f.bias_correction = keys.boolean("filter.bias_correction", true);
  const std::string qd = keys.str("filter.q_denominator", "paper");
  if (qd == "paper") {
    f.q_denominator = QDenominator::kPaper;
  } else if (qd == "derivation") {
    f.q_denominator = QDenominator::kDerivation;
  } else {
    throw ConfigError(
        "key 'filter.q_denominator': expected paper|derivation, got '" + qd +
        "'");
  }
  const std::string rs = keys.str("filter.residual_scaling", "natural");
  if (rs == "natural") {
    f.residual_scaling = ResidualScaling::kNatural;
  } else if (rs == "paper") {
    f.residual_scaling = ResidualScaling::kPaper;
  } else {
    throw ConfigError(
        "key 'filter.residual_scaling': expected natural|paper, got '" + rs +
        "'");
  }
  f.center_on_updated_mean =
      keys.boolean("filter.center_on_updated_mean", true);
  f.seed = static_cast<std::uint64_t>(keys.integer("filter.seed", 0));
  f.init_guess = keys.has("filter.init") ? keys.vector("filter.init")
                                         : cfg.sim_init;
  if (keys.has("filter.bounds.lo") || keys.has("filter.bounds.hi")) {
    const Eigen::VectorXd lo = keys.vector("filter.bounds.lo");
    const Eigen::VectorXd hi = keys.vector("filter.bounds.hi");
    if (lo.size() != hi.size()) {
      throw ConfigError("filter.bounds.lo/hi: size mismatch");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (lo[i] > hi[i]) {
        throw ConfigError("filter.bounds: lo > hi at component " +
                          std::to_string(i + 1));
      }
      f.bounds.push_back({lo[i], hi[i]});
    }
  }

  cfg.truth_path = keys.str("out.truth", "truth.csv");
  cfg.meas_path = keys.str("out.meas", "meas.csv");

  if (f.r < 1) throw ConfigError("key 'filter.r': must be >= 1");
  if (f.m < 1) throw ConfigError("key 'filter.m': must be >= 1");
  if (f.n0 <= f.r) throw ConfigError("key 'filter.n0': must exceed filter.r");
  if (f.mu < 1 || f.mu > f.n0 - f.r) {
    throw ConfigError("key 'filter.mu': need 1 <= mu <= n0 - r");
  }
  return cfg;
}

std::vector<double> make_times(const RunConfig& cfg) {
  if (cfg.times_count < 1) {
    throw ConfigError("key 'sim.times.count': empty measurement schedule");
  }
  if (!(cfg.times_end > cfg.sim_t0)) {
    throw ConfigError("key 'sim.times.end': must exceed sim.t0");
  }
  std::vector<double> times(cfg.times_count);
  if (cfg.times_mode == TimeSpacing::kSpaced) {
    const double step = (cfg.times_end - cfg.sim_t0) / cfg.times_count;
    for (int k = 0; k < cfg.times_count; ++k) {
      times[k] = cfg.sim_t0 + (k + 1) * step;
    }
  } else {
    RngStream rng(cfg.sim_seed, "times");
    for (auto& t : times) {
      t = cfg.sim_t0 + (cfg.times_end - cfg.sim_t0) * rng.uniform01();
    }
    std::sort(times.begin(), times.end());
  }
  return times;
}

ModelSpec make_model(const RunConfig& cfg) {
  auto& reg = model_registry();
  if (auto it = reg.find(cfg.model_name); it != reg.end()) {
    return it->second(cfg.model_h_max);
  }
  if (cfg.model_name == "logistic") return logistic_model(cfg.model_h_max);
  if (cfg.model_name == "line") return line_model();
  throw ConfigError("key 'model': unknown model '" + cfg.model_name + "'");
}

}  // namespace jackfilter

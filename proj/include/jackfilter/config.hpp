#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jackfilter/filter.hpp"

namespace jackfilter {

enum class TimeSpacing { kSpaced, kRandom };

/// Flat `key = value` run configuration (see README for the key list).
struct RunConfig {
  std::string model_name = "logistic";
  double model_h_max = 0.05;

  // simulation block
  double sim_t0 = 0.0;
  Eigen::VectorXd sim_init;      // augmented truth at t0
  int times_count = 0;
  double times_end = 0.0;
  TimeSpacing times_mode = TimeSpacing::kSpaced;
  Eigen::VectorXd q_diag;
  Eigen::VectorXd r_diag;
  std::uint64_t sim_seed = 0;

  FilterConfig filter;

  // output paths for cmd_simulate
  std::string truth_path = "truth.csv";
  std::string meas_path = "meas.csv";
};

RunConfig parse_config(const std::string& path);

/// Measurement schedule from the config (spaced or seeded random draws).
std::vector<double> make_times(const RunConfig& cfg);

/// Model lookup: built-ins (`logistic`, `line`) plus anything registered
/// through register_model.
ModelSpec make_model(const RunConfig& cfg);
void register_model(const std::string& name,
                    std::function<ModelSpec(double h_max)> factory);

}  // namespace jackfilter

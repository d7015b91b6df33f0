#pragma once

#include <optional>
#include <string>

#include "jackfilter/config.hpp"

namespace jackfilter {

/// Simulates the configured scenario and writes truth/measurement CSVs.
void cmd_simulate(const std::string& config_path);

/// Runs the adaptive filter over a measurement CSV and writes estimates.
void cmd_filter(const std::string& config_path, const std::string& meas_path,
                const std::string& out_path,
                const std::string& truth_path = "");

/// Full delete-d enumeration on a synthetic line dataset, plus sampled
/// second-stage estimates, for oracle-equivalence checks.
void cmd_oracle(int n, int r, std::uint64_t seed, const std::string& out_path);

struct EvalSummary {
  int steps = 0;
  double median_first = 0.0;  // first 50 post-burn-in errors
  double median_last = 0.0;   // last 50 post-burn-in errors
  bool decreasing_trend = false;
};

/// Per-step error norms against truth plus trend summary statistics.
EvalSummary cmd_evaluate(const std::string& estimates_path,
                         const std::string& truth_path,
                         const std::string& out_path);

/// Shared helpers (also used by tests).
MeasurementLog read_measurements(const std::string& path);
std::vector<std::pair<double, Eigen::VectorXd>> read_truth(
    const std::string& path);
std::string estimates_to_csv(const std::vector<StepRecord>& records,
                             int state_dim, int output_dim);

}  // namespace jackfilter

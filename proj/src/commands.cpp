#include "jackfilter/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jackfilter/csv.hpp"

namespace jackfilter {

namespace {

void append_upper_triangle_header(std::ostringstream& os,
                                  const std::string& prefix, int dim) {
  for (int i = 1; i <= dim; ++i) {
    for (int j = i; j <= dim; ++j) {
      os << ',' << prefix << '_' << i << j;
    }
  }
}

void append_upper_triangle(std::ostringstream& os, const SymMatrix& m) {
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = i; j < m.dim(); ++j) {
      os << ',' << format_double(m(i, j));
    }
  }
}

int column_index(const CsvTable& table, const std::string& name,
                 const std::string& path) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return static_cast<int>(i);
  }
  throw ParseError(path + ": missing column '" + name + "'");
}

template <class Fn>
void for_each_combination(int n, int r, Fn&& fn) {
  std::vector<int> pick(r);
  for (int i = 0; i < r; ++i) pick[i] = i + 1;
  for (;;) {
    fn(pick);
    int i = r - 1;
    while (i >= 0 && pick[i] == n - r + i + 1) --i;
    if (i < 0) return;
    ++pick[i];
    for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
}

}  // namespace

MeasurementLog read_measurements(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int t_col = column_index(table, "t", path);
  std::vector<int> y_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i].rfind("y", 0) == 0) {
      y_cols.push_back(static_cast<int>(i));
    }
  }
  if (y_cols.empty()) throw ParseError(path + ": no y columns");

  MeasurementLog log;
  log.reserve(table.rows.size());
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const std::string where =
        path + ":" + std::to_string(table.row_lines[row]);
    Measurement meas;
    meas.t = parse_double(table.rows[row][t_col], where);
    meas.y.resize(y_cols.size());
    for (std::size_t k = 0; k < y_cols.size(); ++k) {
      meas.y[k] = parse_double(table.rows[row][y_cols[k]], where);
    }
    if (!log.empty() && !(meas.t > log.back().t)) {
      throw ParseError(where + ": times must be strictly increasing");
    }
    log.push_back(std::move(meas));
  }
  if (log.empty()) throw ParseError(path + ": no measurements");
  return log;
}

std::vector<std::pair<double, Eigen::VectorXd>> read_truth(
    const std::string& path) {
  const CsvTable table = read_csv(path);
  const int t_col = column_index(table, "t", path);
  std::vector<int> x_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i].rfind("x", 0) == 0) {
      x_cols.push_back(static_cast<int>(i));
    }
  }
  if (x_cols.empty()) throw ParseError(path + ": no x columns");
  std::vector<std::pair<double, Eigen::VectorXd>> truth;
  truth.reserve(table.rows.size());
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const std::string where =
        path + ":" + std::to_string(table.row_lines[row]);
    Eigen::VectorXd x(x_cols.size());
    for (std::size_t k = 0; k < x_cols.size(); ++k) {
      x[k] = parse_double(table.rows[row][x_cols[k]], where);
    }
    truth.emplace_back(parse_double(table.rows[row][t_col], where),
                       std::move(x));
  }
  return truth;
}

std::string estimates_to_csv(const std::vector<StepRecord>& records,
                             int state_dim, int output_dim) {
  std::ostringstream os;
  os << "n,t,mode";
  for (int i = 1; i <= state_dim; ++i) os << ",x" << i;
  os << ",err";
  append_upper_triangle_header(os, "Qhat", state_dim);
  append_upper_triangle_header(os, "Rhat", output_dim);
  for (int i = 1; i <= output_dim; ++i) os << ",bias_" << i;
  os << ",clipQ,clipR\n";
  for (const auto& rec : records) {
    os << rec.n << ',' << format_double(rec.t) << ',' << to_string(rec.mode);
    for (int i = 0; i < state_dim; ++i) {
      os << ',' << format_double(rec.state[i]);
    }
    os << ',';
    if (rec.error_norm) os << format_double(*rec.error_norm);
    append_upper_triangle(os, rec.Qhat);
    append_upper_triangle(os, rec.Rhat);
    for (int i = 0; i < output_dim; ++i) {
      os << ',' << format_double(rec.bias[i]);
    }
    os << ',' << (rec.clipped_q ? 1 : 0) << ',' << (rec.clipped_r ? 1 : 0)
       << '\n';
  }
  return os.str();
}

void cmd_simulate(const std::string& config_path) {
  const RunConfig cfg = parse_config(config_path);
  const ModelSpec model = make_model(cfg);
  if (cfg.sim_init.size() != model.total_dim()) {
    throw ConfigError("key 'sim.init': expected " +
                      std::to_string(model.total_dim()) + " components");
  }
  if (cfg.q_diag.size() != model.total_dim()) {
    throw ConfigError("key 'sim.Q.diag': expected " +
                      std::to_string(model.total_dim()) + " components");
  }
  if (cfg.r_diag.size() != model.output_dim) {
    throw ConfigError("key 'sim.R.diag': expected " +
                      std::to_string(model.output_dim) + " components");
  }
  const std::vector<double> times = make_times(cfg);
  RngStream rng(cfg.sim_seed, "sim");
  const SimResult sim =
      simulate(model, ThetaVector{cfg.sim_t0, cfg.sim_init}, times,
               SymMatrix::Diagonal(cfg.q_diag),
               SymMatrix::Diagonal(cfg.r_diag), rng);

  std::ostringstream truth;
  truth << "t";
  for (int i = 1; i <= model.total_dim(); ++i) truth << ",x" << i;
  truth << '\n';
  for (const auto& [t, x] : sim.truth) {
    truth << format_double(t);
    for (int i = 0; i < model.total_dim(); ++i) {
      truth << ',' << format_double(x[i]);
    }
    truth << '\n';
  }
  std::ostringstream meas;
  meas << "t";
  for (int i = 1; i <= model.output_dim; ++i) meas << ",y" << i;
  meas << '\n';
  for (const auto& m : sim.measurements) {
    meas << format_double(m.t);
    for (int i = 0; i < model.output_dim; ++i) {
      meas << ',' << format_double(m.y[i]);
    }
    meas << '\n';
  }
  atomic_write(cfg.truth_path, truth.str());
  atomic_write(cfg.meas_path, meas.str());
}

void cmd_filter(const std::string& config_path, const std::string& meas_path,
                const std::string& out_path, const std::string& truth_path) {
  const RunConfig cfg = parse_config(config_path);
  const ModelSpec model = make_model(cfg);
  const MeasurementLog log = read_measurements(meas_path);
  std::vector<std::pair<double, Eigen::VectorXd>> truth;
  if (!truth_path.empty()) truth = read_truth(truth_path);

  const std::vector<StepRecord> records = run_adaptive(
      model, log, cfg.filter, truth.empty() ? nullptr : &truth);
  atomic_write(out_path, estimates_to_csv(records, model.total_dim(),
                                          model.output_dim));
}

void cmd_oracle(int n, int r, std::uint64_t seed,
                const std::string& out_path) {
  if (r < 1 || r >= n) {
    throw InvalidSizes("oracle: need 1 <= r < n (d = n - r >= 1)");
  }
  double space = 1.0;
  for (int i = 0; i < n - r; ++i) {
    space *= static_cast<double>(n - i) / (i + 1);
    if (space > 1e6) throw TooManySubsets("oracle: C(n, n-r) exceeds 1e6");
  }
  const int n_subsets = static_cast<int>(std::llround(space));

  // synthetic scalar line data: y = 2 t + N(0,1), t = 1..n
  const ModelSpec model = line_model();
  RngStream noise(seed, "oracle");
  MeasurementLog log;
  for (int i = 1; i <= n; ++i) {
    Eigen::VectorXd y(1);
    y[0] = 2.0 * i + noise.gaussian();
    log.push_back({static_cast<double>(i), y});
  }
  const double anchor = 1.0;
  const Eigen::VectorXd init = Eigen::VectorXd::Ones(1);
  const std::vector<std::array<double, 2>> no_bounds;

  // full-data estimate for the v_n centering
  LsqProblem full;
  full.model = model;
  full.data = log;
  full.anchor_time = anchor;
  full.init = ThetaVector{anchor, init};
  const Eigen::VectorXd theta_full = fit(full).theta.values;

  std::vector<SubsetIndex> all;
  all.reserve(n_subsets);
  for_each_combination(n, r, [&](const std::vector<int>& pick) {
    all.push_back(SubsetIndex{pick});
  });
  const EnsembleBatch enumerated =
      fit_batch(model, log, all, anchor, anchor, init, no_bounds, n);
  const JackknifeStats v_n = batch_jsve(enumerated, theta_full);
  const JackknifeStats vtilde_n = batch_jsve(enumerated);

  std::ostringstream os;
  os << "estimator,m,value\n";
  os << "v_n," << n_subsets << ',' << format_double(v_n.var(0, 0)) << '\n';
  os << "vtilde_n," << n_subsets << ','
     << format_double(vtilde_n.var(0, 0)) << '\n';
  RngStream subset_rng(seed, "subsets");
  for (int m : {n_subsets, n, 2 * n}) {
    const auto sampled =
        sample_subsets(n, r, m, std::nullopt, subset_rng);
    const EnsembleBatch b =
        fit_batch(model, log, sampled, anchor, anchor, init, no_bounds, n);
    const JackknifeStats s = batch_jsve(b);
    os << "vtilde_s," << m << ',' << format_double(s.var(0, 0)) << '\n';
  }
  atomic_write(out_path, os.str());
}

EvalSummary cmd_evaluate(const std::string& estimates_path,
                         const std::string& truth_path,
                         const std::string& out_path) {
  const CsvTable est = read_csv(estimates_path);
  const auto truth = read_truth(truth_path);
  const int n_col = column_index(est, "n", estimates_path);
  const int t_col = column_index(est, "t", estimates_path);
  const int mode_col = column_index(est, "mode", estimates_path);
  std::vector<int> x_cols;
  for (std::size_t i = 0; i < est.header.size(); ++i) {
    if (est.header[i].size() >= 2 && est.header[i][0] == 'x' &&
        std::isdigit(static_cast<unsigned char>(est.header[i][1]))) {
      x_cols.push_back(static_cast<int>(i));
    }
  }
  if (x_cols.empty()) throw ParseError(estimates_path + ": no x columns");

  std::ostringstream os;
  os << "n,t,err\n";
  std::vector<double> post_burnin;
  for (std::size_t row = 0; row < est.rows.size(); ++row) {
    const std::string where =
        estimates_path + ":" + std::to_string(est.row_lines[row]);
    const int n = static_cast<int>(parse_double(est.rows[row][n_col], where));
    const double t = parse_double(est.rows[row][t_col], where);
    if (n < 1 || n > static_cast<int>(truth.size())) {
      throw GridMismatch(where + ": step " + std::to_string(n) +
                         " outside truth grid");
    }
    const auto& [tt, tx] = truth[n - 1];
    if (std::abs(tt - t) > 1e-9 * (1.0 + std::abs(tt))) {
      throw GridMismatch(where + ": time " + format_double(t) +
                         " does not match truth time " + format_double(tt));
    }
    if (static_cast<int>(x_cols.size()) != tx.size()) {
      throw GridMismatch(where + ": state dimension mismatch vs truth");
    }
    double ssq = 0.0;
    for (std::size_t k = 0; k < x_cols.size(); ++k) {
      const double d =
          parse_double(est.rows[row][x_cols[k]], where) - tx[k];
      ssq += d * d;
    }
    const double err = std::sqrt(ssq);
    os << n << ',' << format_double(t) << ',' << format_double(err) << '\n';
    if (est.rows[row][mode_col] != "burnin") post_burnin.push_back(err);
  }

  auto median_of = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };
  const std::size_t window = std::min<std::size_t>(50, post_burnin.size());
  EvalSummary summary;
  summary.steps = static_cast<int>(post_burnin.size());
  summary.median_first = median_of(std::vector<double>(
      post_burnin.begin(), post_burnin.begin() + window));
  summary.median_last = median_of(std::vector<double>(
      post_burnin.end() - window, post_burnin.end()));
  summary.decreasing_trend = summary.median_last < summary.median_first;

  os << "# post_burnin_steps = " << summary.steps << '\n';
  os << "# median_first50 = " << format_double(summary.median_first) << '\n';
  os << "# median_last50 = " << format_double(summary.median_last) << '\n';
  os << "# decreasing_trend = " << (summary.decreasing_trend ? 1 : 0) << '\n';
  if (!est.rows.empty()) {
    const auto& last = est.rows.back();
    for (std::size_t i = 0; i < est.header.size(); ++i) {
      if (est.header[i].rfind("Qhat_", 0) == 0 ||
          est.header[i].rfind("Rhat_", 0) == 0) {
        os << "# final_" << est.header[i] << " = " << last[i] << '\n';
      }
    }
  }
  atomic_write(out_path, os.str());
  return summary;
}

}  // namespace jackfilter

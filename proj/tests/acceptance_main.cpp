// Acceptance harness: `acceptance <k>` runs criterion k and prints one
// PASS/FAIL line; the process exit code is 0 only when every requested
// criterion passes.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "jackfilter/commands.hpp"

using namespace jackfilter;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kOracleRelTol = 1e-12;
constexpr double kAdaptiveTol = 1e-12;
constexpr double kLinearGaussianRelTol = 0.05;
constexpr double kRMedianLo = 0.7;
constexpr double kRMedianHi = 1.3;
constexpr double kNoiselessTol = 1e-3;
constexpr double kSqrtRelTol = 1e-10;
constexpr int kLogisticSeedsNeeded = 8;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

ModelSpec random_walk_model() {
  ModelSpec m;
  m.name = "random_walk";
  m.state_dim = 1;
  m.param_dim = 0;
  m.output_dim = 1;
  m.drift = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(1).eval();
  };
  m.observe = [](const Eigen::VectorXd& s) { return s; };
  m.closed_form = [](double, double, const Eigen::VectorXd& s,
                     const Eigen::VectorXd&) { return s; };
  return m;
}

MeasurementLog line_data(int n, std::uint64_t seed) {
  RngStream noise(seed, "line-data");
  MeasurementLog log;
  for (int i = 1; i <= n; ++i) {
    Eigen::VectorXd y(1);
    y[0] = 2.0 * i + noise.gaussian();
    log.push_back({static_cast<double>(i), y});
  }
  return log;
}

std::vector<std::array<double, 2>> logistic_bounds() {
  return {{1e-3, 1e5}, {1e-4, 5.0}, {1.0, 1e5}};
}

SymMatrix random_psd(int dim, RngStream& rng) {
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = rng.gaussian();
  }
  return SymMatrix(a * a.transpose());
}

// ---------------------------------------------------------------- criterion 1
// The second-stage pipeline at full coverage (m = C(8,2) = 28, without
// replacement) must equal the brute-force delete-2 enumeration: the variance
// formula applied directly over every subset estimate. Subset fits are also
// checked against the closed-form normal equations.
bool oracle_equivalence() {
  const int n = 8, r = 6;
  const ModelSpec model = line_model();
  const MeasurementLog log = line_data(n, 7);

  // brute-force enumeration of all C(8,2) delete-2 subsets
  std::vector<SubsetIndex> subsets;
  std::vector<double> closed_form;
  for (int a = 1; a <= n; ++a) {
    for (int b = a + 1; b <= n; ++b) {
      std::vector<int> keep;
      double sty = 0.0, stt = 0.0;
      for (int i = 1; i <= n; ++i) {
        if (i == a || i == b) continue;
        keep.push_back(i);
        sty += i * log[i - 1].y[0];
        stt += static_cast<double>(i) * i;
      }
      subsets.push_back(SubsetIndex{keep});
      closed_form.push_back(sty / stt);
    }
  }
  const EnsembleBatch enumerated =
      fit_batch(model, log, subsets, 1.0, 1.0, Eigen::VectorXd::Ones(1), {}, n);
  double worst_fit = 0.0;
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    worst_fit = std::max(
        worst_fit, std::abs(enumerated.members[k].theta.values[0] -
                            closed_form[k]) /
                       std::abs(closed_form[k]));
  }

  // direct variance formula over the enumerated estimates
  double mean = 0.0;
  for (const auto& mem : enumerated.members) mean += mem.theta.values[0];
  mean /= enumerated.members.size();
  double sumsq = 0.0;
  for (const auto& mem : enumerated.members) {
    const double c = mem.theta.values[0] - mean;
    sumsq += c * c;
  }
  const double brute = static_cast<double>(r) /
                       ((n - r) * enumerated.members.size()) * sumsq;

  const double via_batch = batch_jsve(enumerated).var(0, 0);

  // sampled estimator at full coverage draws the same 28 subsets
  RngStream rng(7, "subsets");
  const auto sampled = sample_subsets(n, r, 28, std::nullopt, rng);
  const EnsembleBatch sampled_batch =
      fit_batch(model, log, sampled, 1.0, 1.0, Eigen::VectorXd::Ones(1), {}, n);
  const double via_sample = batch_jsve(sampled_batch).var(0, 0);

  const double rel_batch = std::abs(via_batch - brute) / brute;
  const double rel_sample = std::abs(via_sample - brute) / brute;
  std::cout << "  vtilde brute=" << brute << " batch_rel=" << rel_batch
            << " sampled_rel=" << rel_sample
            << " worst_fit_vs_normal_eq=" << worst_fit << "\n";
  return rel_batch <= kOracleRelTol && rel_sample <= kOracleRelTol &&
         worst_fit <= 1e-8;
}

// ---------------------------------------------------------------- criterion 2
bool adaptive_identity() {
  auto scalar_batch = [](std::vector<double> values, int n, int r) {
    EnsembleBatch b;
    for (double v : values) {
      Eigen::VectorXd x(1);
      x[0] = v;
      b.members.push_back(MemberEstimate{{}, ThetaVector{0.0, x}, 0.0});
    }
    b.n = n;
    b.r = r;
    b.d = n - r;
    b.m = static_cast<int>(values.size());
    return b;
  };

  // r = n: the previous statistics must drop out entirely
  JackknifeStats prev;
  prev.mean = 7.0 * Eigen::VectorXd::Ones(1);
  prev.var = SymMatrix::Identity(1);
  prev.n = 9;
  prev.m_total = 9;
  const EnsembleBatch full = scalar_batch({0.0, 2.0}, 10, 10);
  const JackknifeStats s_full = adaptive_update(prev, full);
  const double batch_var = 10.0 / (1.0 * 2) * ((0.0 - 1.0) * (0.0 - 1.0) +
                                               (2.0 - 1.0) * (2.0 - 1.0));
  bool ok = std::abs(s_full.mean[0] - 1.0) <= kAdaptiveTol &&
            std::abs(s_full.var(0, 0) - batch_var) <= kAdaptiveTol;

  // weights (0.9, 0.1): mean 0.9 and variance 0.82
  JackknifeStats zero;
  zero.mean = Eigen::VectorXd::Zero(1);
  zero.var = SymMatrix::Identity(1);
  zero.n = 9;
  zero.m_total = 9;
  const double delta = std::sqrt(2.0 / 9.0 - 0.01);
  const EnsembleBatch hand = scalar_batch({1.0 - delta, 1.0 + delta}, 10, 9);
  const JackknifeStats s_hand = adaptive_update(zero, hand);
  std::cout << "  r=n mean=" << s_full.mean[0] << " var=" << s_full.var(0, 0)
            << "; hand mean=" << s_hand.mean[0]
            << " var=" << s_hand.var(0, 0) << "\n";
  ok = ok && std::abs(s_hand.mean[0] - 0.9) <= kAdaptiveTol &&
       std::abs(s_hand.var(0, 0) - 0.82) <= kAdaptiveTol;
  return ok;
}

// ---------------------------------------------------------------- criterion 3
// Perturbed-observation ensemble update with N = 1e4 members vs the analytic
// scalar Kalman recursion on a random walk.
bool linear_gaussian_equivalence() {
  const ModelSpec model = random_walk_model();
  const int members = 10000;
  const int steps = 50;
  const double q = 0.1, rr = 0.5, p0 = 1.0, x0 = 10.0;

  double worst_mean = 0.0, worst_var = 0.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    RngStream truth_rng(seed, "lg-truth");
    RngStream ens_rng(seed, "lg-ensemble");

    double x_true = x0;
    double kf_mean = x0, kf_var = p0;
    std::vector<Eigen::VectorXd> ens(members);
    {
      // condition the initial draw to exact first and second moments
      double mean = 0.0, var = 0.0;
      for (auto& e : ens) {
        e.resize(1);
        e[0] = ens_rng.gaussian();
        mean += e[0];
      }
      mean /= members;
      for (const auto& e : ens) var += (e[0] - mean) * (e[0] - mean);
      var /= members - 1;
      for (auto& e : ens) {
        e[0] = x0 + std::sqrt(p0 / var) * (e[0] - mean);
      }
    }

    for (int k = 1; k <= steps; ++k) {
      const double t = k;
      x_true += std::sqrt(q) * truth_rng.gaussian();
      const double y = x_true + std::sqrt(rr) * truth_rng.gaussian();

      // analytic recursion
      const double p_minus = kf_var + q;
      const double gain = p_minus / (p_minus + rr);
      kf_mean += gain * (y - kf_mean);
      kf_var = (1.0 - gain) * p_minus;

      // ensemble: propagate with process noise, update through the gain
      EnsembleBatch batch;
      batch.n = k;
      batch.r = 1;
      batch.d = 0;
      batch.m = members;
      batch.members.resize(members);
      for (int i = 0; i < members; ++i) {
        ens[i][0] += std::sqrt(q) * ens_rng.gaussian();
        batch.members[i] = MemberEstimate{{}, ThetaVector{t, ens[i]}, 0.0};
      }
      const EnsembleMoments mom = ensemble_moments(
          model, batch, t, SymMatrix::Zero(1), /*omit_Qy=*/true);
      Eigen::VectorXd yv(1);
      yv[0] = y;
      Eigen::MatrixXd rmat(1, 1);
      rmat(0, 0) = rr;
      const KalmanResult post =
          kalman_update(mom, yv, SymMatrix(rmat), Eigen::VectorXd::Zero(1),
                        mom.x_mean, mom.Px);
      // square-root member update: deviations rescaled onto the posterior
      // covariance, so the ensemble realizes the filter's own moments
      const double scale = std::sqrt(post.cov(0, 0) / mom.Px(0, 0));
      for (auto& e : ens) {
        e[0] = post.mean[0] + scale * (e[0] - mom.x_mean[0]);
      }

      worst_mean = std::max(
          worst_mean, std::abs(post.mean[0] - kf_mean) / std::abs(kf_mean));
      worst_var =
          std::max(worst_var, std::abs(post.cov(0, 0) - kf_var) / kf_var);
    }
  }
  std::cout << "  worst relative mean error=" << worst_mean
            << " variance error=" << worst_var << "\n";
  return worst_mean <= kLinearGaussianRelTol &&
         worst_var <= kLinearGaussianRelTol;
}

// ---------------------------------------------------------------- criterion 4
// Median R over 20 seeds on a scalar linear model with true R = 1.
bool r_identification() {
  const int n = 200, r = 180, m = 50;
  const int mu = n - r;
  const ModelSpec model = line_model();

  std::vector<double> estimates;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MeasurementLog log = line_data(n, seed);
    RngStream rng(seed, "subsets");
    const auto subsets = sample_subsets(n, r, m, std::nullopt, rng);
    const EnsembleBatch batch =
        fit_batch(model, log, subsets, 1.0, 1.0, 2.0 * Eigen::VectorXd::Ones(1),
                  {}, n);
    const ResidualStats residuals =
        residual_stats(model, batch, log, mu, ResidualScaling::kNatural);
    const REstimate est = estimate_R(model, residuals, batch, log[9].t);
    estimates.push_back(est.R(0, 0));
  }
  const double med = median(estimates);
  std::cout << "  median Rhat over 20 seeds = " << med << " (true R = 1)\n";
  return med >= kRMedianLo && med <= kRMedianHi;
}

// ---------------------------------------------------------------- criterion 5
// Fallback flags must be pessimistic in the PSD order. The additive
// innovation denominator guarantees the ordering, so it is pinned here.
bool pessimism_ordering() {
  RngStream rng(42, "pessimism");
  const std::vector<std::pair<bool, bool>> flag_sets{
      {true, false}, {false, true}, {true, true}};
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 3;
    const SymMatrix px_minus = random_psd(dim, rng);
    const SymMatrix qy = random_psd(dim, rng);
    const SymMatrix sigma2(
        Eigen::MatrixXd(random_psd(dim, rng).mat() +
                        Eigen::MatrixXd::Identity(dim, dim)));
    Eigen::MatrixXd pxy(dim, dim);
    for (int i = 0; i < dim * dim; ++i) {
      pxy(i / dim, i % dim) = rng.gaussian();
    }
    // keep the base estimate clear of the PSD clip
    const SymMatrix v_n(px_minus.mat() +
                        Eigen::MatrixXd::Identity(dim, dim));
    const QEstimate base =
        estimate_Q(v_n, px_minus, pxy, sigma2, qy, 1.0, false, false,
                   QDenominator::kDerivation);
    for (const auto& [omit_qy, omit_px] : flag_sets) {
      const QEstimate pess =
          estimate_Q(v_n, px_minus, pxy, sigma2, qy, 1.0, omit_qy, omit_px,
                     QDenominator::kDerivation);
      const SymMatrix gap(pess.Q.mat() - base.Q.mat());
      if (gap.min_eigenvalue() < -gap.psd_tolerance()) {
        std::cout << "  ordering violated at trial " << trial
                  << " flags=(" << omit_qy << "," << omit_px
                  << ") min_eig=" << gap.min_eigenvalue() << "\n";
        return false;
      }
    }
  }
  std::cout << "  100 randomized PSD inputs ordered correctly\n";
  return true;
}

// helpers for the logistic scenario -----------------------------------------
struct LogisticRun {
  double median_first = 0.0;
  double median_last = 0.0;
};

LogisticRun run_logistic(std::uint64_t seed, int r, int mu) {
  const ModelSpec model = logistic_model();
  Eigen::VectorXd truth0(3);
  truth0 << 1.0, 0.225, 500.0;
  std::vector<double> times;
  for (int k = 1; k <= 200; ++k) times.push_back(k * 0.4);
  Eigen::VectorXd q(3);
  q << 15.0, 0.001, 10.0;
  RngStream sim_rng(seed, "sim");
  const SimResult sim =
      simulate(model, ThetaVector{0.0, truth0}, times, SymMatrix::Diagonal(q),
               SymMatrix::Identity(1), sim_rng);

  FilterConfig cfg;
  cfg.r = r;
  cfg.m = 25;
  cfg.n0 = 50;
  cfg.mu = mu;
  cfg.seed = seed;
  // the additive innovation denominator stays invertible at this noise level
  cfg.q_denominator = QDenominator::kDerivation;
  Eigen::VectorXd init(3);
  init << 5.0, 0.1, 300.0;
  cfg.init_guess = init;
  cfg.bounds = logistic_bounds();

  const auto records = run_adaptive(model, sim.measurements, cfg, &sim.truth);
  std::vector<double> errors;
  for (const auto& rec : records) {
    if (rec.mode != StepMode::kBurnin && rec.error_norm) {
      errors.push_back(*rec.error_norm);
    }
  }
  LogisticRun out;
  out.median_first = median(
      std::vector<double>(errors.begin(), errors.begin() + 50));
  out.median_last =
      median(std::vector<double>(errors.end() - 50, errors.end()));
  return out;
}

// ---------------------------------------------------------------- criterion 6
bool logistic_reproduction() {
  int decreasing = 0;
  std::vector<double> final_r45, final_r30;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LogisticRun r45 = run_logistic(seed, 45, 5);
    const LogisticRun r30 = run_logistic(seed, 30, 20);
    if (r45.median_last < r45.median_first) ++decreasing;
    final_r45.push_back(r45.median_last);
    final_r30.push_back(r30.median_last);
    std::cout << "  seed " << seed << ": r45 first=" << r45.median_first
              << " last=" << r45.median_last
              << "; r30 last=" << r30.median_last << "\n";
  }
  const double med45 = median(final_r45);
  const double med30 = median(final_r30);
  std::cout << "  decreasing trend in " << decreasing
            << "/10 seeds; final medians r45=" << med45 << " r30=" << med30
            << "\n";
  return decreasing >= kLogisticSeedsNeeded && med45 < med30;
}

// ---------------------------------------------------------------- criterion 7
bool noiseless_degeneracy() {
  const ModelSpec model = logistic_model();
  Eigen::VectorXd truth0(3);
  truth0 << 1.0, 0.225, 500.0;
  std::vector<double> times;
  for (int k = 1; k <= 110; ++k) times.push_back(k * 0.4);
  RngStream sim_rng(1, "sim");
  const SimResult sim =
      simulate(model, ThetaVector{0.0, truth0}, times, SymMatrix::Zero(3),
               SymMatrix::Zero(1), sim_rng);

  FilterConfig cfg;
  cfg.r = 45;
  cfg.m = 25;
  cfg.n0 = 50;
  cfg.mu = 5;
  cfg.seed = 1;
  Eigen::VectorXd init(3);
  init << 5.0, 0.1, 300.0;
  cfg.init_guess = init;
  cfg.bounds = logistic_bounds();

  const auto records = run_adaptive(model, sim.measurements, cfg, &sim.truth);
  double err_100 = -1.0, q_100 = -1.0, r_100 = -1.0;
  for (const auto& rec : records) {
    if (rec.n == 100) {
      err_100 = rec.error_norm.value_or(-1.0);
      q_100 = rec.Qhat.frobenius();
      r_100 = rec.Rhat.frobenius();
    }
  }
  std::cout << "  step 100: state error=" << err_100 << " |Qhat|=" << q_100
            << " |Rhat|=" << r_100 << "\n";
  return err_100 >= 0.0 && err_100 < kNoiselessTol &&
         q_100 < kNoiselessTol && r_100 < kNoiselessTol;
}

// ---------------------------------------------------------------- criterion 8
bool determinism() {
  const fs::path dir = fs::temp_directory_path() / "jackfilter_acceptance";
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "det.cfg";
  const fs::path truth = dir / "det_truth.csv";
  const fs::path meas = dir / "det_meas.csv";

  std::ostringstream cfg;
  cfg << "model = logistic\n"
      << "sim.init = 1, 0.225, 500\n"
      << "sim.times.count = 80\n"
      << "sim.times.end = 32\n"
      << "sim.Q.diag = 15, 0.001, 10\n"
      << "sim.R.diag = 1\n"
      << "sim.seed = 4\n"
      << "filter.r = 45\n"
      << "filter.m = 25\n"
      << "filter.n0 = 50\n"
      << "filter.mu = 5\n"
      << "filter.seed = 4\n"
      << "filter.q_denominator = derivation\n"
      << "filter.init = 5, 0.1, 300\n"
      << "filter.bounds.lo = 1e-3, 1e-4, 1\n"
      << "filter.bounds.hi = 1e5, 5, 1e5\n"
      << "out.truth = " << truth.string() << "\n"
      << "out.meas = " << meas.string() << "\n";
  {
    std::ofstream out(cfg_path);
    out << cfg.str();
  }
  cmd_simulate(cfg_path.string());

  auto run_with_threads = [&](const char* threads, const fs::path& out) {
    setenv("JACKFILTER_THREADS", threads, 1);
    cmd_filter(cfg_path.string(), meas.string(), out.string(),
               truth.string());
    unsetenv("JACKFILTER_THREADS");
    std::ifstream in(out, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };

  const std::string one = run_with_threads("1", dir / "est_t1.csv");
  const std::string four = run_with_threads("4", dir / "est_t4.csv");
  const std::string four_again = run_with_threads("4", dir / "est_t4b.csv");
  std::cout << "  estimates bytes: t1=" << one.size()
            << " t4=" << four.size() << " identical="
            << (one == four && four == four_again ? "yes" : "no") << "\n";
  return !one.empty() && one == four && four == four_again;
}

// ---------------------------------------------------------------- criterion 9
bool kernel_invariants() {
  RngStream rng(9, "kernels");
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + static_cast<int>(rng.below(10));
    const SymMatrix a = random_psd(dim, rng);
    const SymMatrix s = matrix_sqrt(a);
    const double err = (s.mat() * s.mat().transpose() - a.mat()).norm();
    if (err > kSqrtRelTol * (1.0 + a.frobenius())) {
      std::cout << "  sqrt reconstruction failed at trial " << trial
                << " err=" << err << "\n";
      return false;
    }
    Eigen::MatrixXd noise(dim, dim);
    for (int i = 0; i < dim * dim; ++i) {
      noise(i / dim, i % dim) = rng.gaussian();
    }
    const SymMatrix once = psd_project(SymMatrix(noise));
    const SymMatrix twice = psd_project(once);
    if ((twice.mat() - once.mat()).norm() > 1e-12 * (1.0 + once.trace())) {
      std::cout << "  psd_project not idempotent at trial " << trial << "\n";
      return false;
    }
  }

  // block covariance [[Px, Pxy], [Pxy^T, Py]] of random logistic ensembles
  const ModelSpec model = logistic_model();
  for (int trial = 0; trial < 100; ++trial) {
    EnsembleBatch batch;
    const int count = 4 + static_cast<int>(rng.below(12));
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd v(3);
      v << 50.0 + 10.0 * rng.gaussian(), 0.2 + 0.02 * rng.gaussian(),
          500.0 + 20.0 * rng.gaussian();
      batch.members.push_back(MemberEstimate{{}, ThetaVector{10.0, v}, 0.0});
    }
    batch.n = count + 5;
    batch.r = count;
    batch.d = 5;
    batch.m = count;
    const EnsembleMoments mom = ensemble_moments(
        model, batch, 10.0 + 2.0 * rng.uniform01(), SymMatrix::Zero(3), true);
    Eigen::MatrixXd block(4, 4);
    block.topLeftCorner(3, 3) = mom.Px.mat();
    block.topRightCorner(3, 1) = mom.Pxy;
    block.bottomLeftCorner(1, 3) = mom.Pxy.transpose();
    block.bottomRightCorner(1, 1) = mom.Py.mat();
    const SymMatrix joint(block);
    if (joint.min_eigenvalue() < -joint.psd_tolerance()) {
      std::cout << "  block covariance not PSD at trial " << trial
                << " min_eig=" << joint.min_eigenvalue() << "\n";
      return false;
    }
  }
  std::cout << "  1000 sqrt/projection trials and 100 ensembles clean\n";
  return true;
}

struct Criterion {
  const char* name;
  bool (*run)();
};

const Criterion kCriteria[] = {
    {"oracle equivalence of sampled and brute-force jackknife variance",
     oracle_equivalence},
    {"adaptive update identities (r=n exact, hand cases to 1e-12)",
     adaptive_identity},
    {"ensemble update tracks the analytic Kalman filter within 5%",
     linear_gaussian_equivalence},
    {"median R estimate within [0.7, 1.3] of true R=1 over 20 seeds",
     r_identification},
    {"fallback flags give PSD-ordered pessimistic Q estimates",
     pessimism_ordering},
    {"logistic scenario error trend and r=45 vs r=30 ordering",
     logistic_reproduction},
    {"noiseless run drives state error and noise estimates below 1e-3",
     noiseless_degeneracy},
    {"byte-identical estimates across 1 and 4 worker threads", determinism},
    {"matrix sqrt, projection idempotency, block covariance PSD",
     kernel_invariants},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  if (argc < 2) {
    for (int k = 1; k <= 9; ++k) wanted.push_back(k);
  } else {
    for (int i = 1; i < argc; ++i) {
      const int k = std::atoi(argv[i]);
      if (k < 1 || k > 9) {
        std::cerr << "usage: acceptance [criterion 1..9]...\n";
        return 2;
      }
      wanted.push_back(k);
    }
  }

  bool all_ok = true;
  for (int k : wanted) {
    bool ok = false;
    try {
      ok = kCriteria[k - 1].run();
    } catch (const std::exception& e) {
      std::cout << "  exception: " << e.what() << "\n";
      try {
        std::rethrow_if_nested(e);
      } catch (const std::exception& inner) {
        std::cout << "  caused by: " << inner.what() << "\n";
      } catch (...) {
      }
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << k << ": "
              << kCriteria[k - 1].name << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}

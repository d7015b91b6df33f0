#pragma once

#include <optional>
#include <vector>

#include "jackfilter/jackknife.hpp"

namespace jackfilter {

/// Sample moments of an ensemble pushed to a common time, plus the
/// linearized process-noise contribution to the outputs.
struct EnsembleMoments {
  Eigen::VectorXd x_mean;   // mean augmented state
  Eigen::VectorXd y_mean;   // mean predicted output
  SymMatrix Px;             // state sample covariance
  SymMatrix Py;             // output sample covariance
  Eigen::MatrixXd Pxy;      // (n+p) x m cross-covariance
  SymMatrix Qy;             // Dh Q dt Dh^T averaged over members
  double dt = 0.0;          // time since the ensemble anchor
};

/// Out-of-sample residual statistics: bias and output covariance.
struct ResidualStats {
  Eigen::VectorXd bias;
  SymMatrix sigma2;
};

struct NoiseEstimate {
  SymMatrix Q;
  SymMatrix R;
  Eigen::VectorXd bias;
  bool clipped_q = false;  // PSD projection removed negative energy
  bool clipped_r = false;
};

enum class QDenominator {
  kPaper,       // (sigma2 - Qy), as printed
  kDerivation,  // (sigma2 + Qy), matching Py + Qy + R = sigma2 + Qy
};

enum class ResidualScaling {
  kNatural,  // sigma2_s = (1/mu) sum, aggregated by 1/m
  kPaper,    // sigma2_s = d/(r*mu) sum, aggregated by 1/m^2
};

struct FilterConfig {
  int r = 45;
  int m = 25;
  int n0 = 50;    // burn-in count; burn-in batch uses m0 = n0 subsets
  int mu = 5;     // validation count, 1 <= mu <= d
  double h_max = 0.05;
  int handoff_window = 10;
  double handoff_tol = 0.05;
  bool omit_Qy = false;
  bool omit_Px_minus = false;
  bool bias_correction = true;
  QDenominator q_denominator = QDenominator::kPaper;
  ResidualScaling residual_scaling = ResidualScaling::kNatural;
  bool center_on_updated_mean = true;
  std::uint64_t seed = 0;
  Eigen::VectorXd init_guess;                 // cold-start theta for burn-in
  std::vector<std::array<double, 2>> bounds;  // LSQ box, may be empty
};

enum class StepMode { kBurnin, kJackknife, kEnkf };

const char* to_string(StepMode mode);

struct StepRecord {
  int n = 0;
  double t = 0.0;
  StepMode mode = StepMode::kBurnin;
  Eigen::VectorXd state;              // posterior augmented estimate
  std::optional<double> error_norm;   // vs truth when available
  SymMatrix Qhat;
  SymMatrix Rhat;
  Eigen::VectorXd bias;
  bool clipped_q = false;
  bool clipped_r = false;
};

/// Evolves every member to t_k; Px/Py/Pxy are 1/(N-1) sample moments;
/// Qy averages Dh Q_prev dt Dh^T over members (zero when omit_Qy).
EnsembleMoments ensemble_moments(const ModelSpec& model,
                                 const EnsembleBatch& batch, double t_k,
                                 const SymMatrix& Q_prev, bool omit_Qy);

struct KalmanResult {
  Eigen::VectorXd mean;
  SymMatrix cov;
  Eigen::MatrixXd gain;
  SymMatrix innovation_cov;  // Py + Qy + R after any ridge
};

/// K = Pxy (Py + Qy + R)^-1; mean shift by K (y - y_mean - bias);
/// covariance shrunk by K S K^T and projected.
KalmanResult kalman_update(const EnsembleMoments& moments,
                           const Eigen::VectorXd& y, const SymMatrix& Rhat,
                           const Eigen::VectorXd& bias,
                           const Eigen::VectorXd& prior_mean,
                           const SymMatrix& prior_cov);

/// Holds out the mu smallest-index points of each member's complement and
/// aggregates the residual bias and out-of-sample covariance.
ResidualStats residual_stats(const ModelSpec& model, const EnsembleBatch& batch,
                             const MeasurementLog& log, int mu,
                             ResidualScaling scaling);

/// Adaptive combination of residual statistics with weights (r/n, 1-r/n).
ResidualStats adaptive_residuals(const ResidualStats& prev,
                                 const ResidualStats& fresh, int n, int r);

struct REstimate {
  SymMatrix R;
  bool clipped = false;
};

/// R = psd_project(sigma2_n - Py_lsq), with Py_lsq the r/(d*m)-scaled spread
/// of member predictions at t_ref.
REstimate estimate_R(const ModelSpec& model, const ResidualStats& residuals,
                     const EnsembleBatch& batch, double t_ref);

struct QEstimate {
  SymMatrix Q;
  bool clipped = false;
};

/// Q = (1/dt) (v_n - Px_minus + Pxy D^-1 Pxy^T) with D per q_denominator;
/// omit flags zero the subtracted PSD terms for a pessimistic estimate.
QEstimate estimate_Q(const SymMatrix& v_n, const SymMatrix& Px_minus,
                     const Eigen::MatrixXd& Pxy, const SymMatrix& sigma2,
                     const SymMatrix& Qy, double dt, bool omit_Qy,
                     bool omit_Px_minus,
                     QDenominator denominator = QDenominator::kPaper);

/// Full adaptive loop: burn-in batch JSVE, per-measurement jackknife
/// assimilation with online Q/R identification, and handoff to a plain
/// ensemble Kalman filter once both estimates hold still. Emits one record
/// for the burn-in batch and one per later measurement.
std::vector<StepRecord> run_adaptive(
    const ModelSpec& model, const MeasurementLog& log, const FilterConfig& cfg,
    const std::vector<std::pair<double, Eigen::VectorXd>>* truth = nullptr);

}  // namespace jackfilter

#include "jackfilter/filter.hpp"

#include <algorithm>
#include <cmath>

#include "jackfilter/parallel.hpp"

namespace jackfilter {

namespace {

// symmetric inverse with a trace-scaled ridge when near-singular
Eigen::MatrixXd robust_inverse(const SymMatrix& s) {
  Eigen::MatrixXd m = s.mat();
  const double ridge = 1e-12 * (1.0 + std::abs(m.trace()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() < ridge) {
    m += ridge * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    es.compute(m);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw SingularInnovation("innovation covariance not invertible");
    }
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::MatrixXd observe_jacobian(const ModelSpec& model,
                                 const Eigen::VectorXd& aug) {
  const int dim = static_cast<int>(aug.size());
  Eigen::MatrixXd Dh(model.output_dim, dim);
  for (int j = 0; j < dim; ++j) {
    const double step = 1e-6 * (1.0 + std::abs(aug[j]));
    Eigen::VectorXd hi = aug, lo = aug;
    hi[j] += step;
    lo[j] -= step;
    Dh.col(j) = (model.observe(hi.head(model.state_dim)) -
                 model.observe(lo.head(model.state_dim))) /
                (2.0 * step);
  }
  return Dh;
}

bool psd_clip_occurred(const SymMatrix& raw) {
  return raw.min_eigenvalue() < -raw.psd_tolerance();
}

double relative_change(const SymMatrix& now, const SymMatrix& before) {
  return (now.mat() - before.mat()).norm() / (before.frobenius() + 1e-12);
}

}  // namespace

const char* to_string(StepMode mode) {
  switch (mode) {
    case StepMode::kBurnin:
      return "burnin";
    case StepMode::kJackknife:
      return "jackknife";
    case StepMode::kEnkf:
      return "enkf";
  }
  return "?";
}

EnsembleMoments ensemble_moments(const ModelSpec& model,
                                 const EnsembleBatch& batch, double t_k,
                                 const SymMatrix& Q_prev, bool omit_Qy) {
  const int count = static_cast<int>(batch.members.size());
  if (count < 2) throw TooFewPoints("ensemble_moments: need N >= 2 members");

  std::vector<Eigen::VectorXd> xs(count), ys(count);
  parallel_for(batch.members.size(), [&](std::size_t i) {
    const ThetaVector evolved =
        evolve_theta(model, batch.members[i].theta, t_k);
    xs[i] = evolved.values;
    ys[i] = model.observe(evolved.values.head(model.state_dim));
  });

  EnsembleMoments out;
  out.dt = t_k - batch.members.front().theta.anchor_time;
  auto [x_mean, px] = sample_moments(xs, 1);
  auto [y_mean, py] = sample_moments(ys, 1);
  out.x_mean = x_mean;
  out.y_mean = y_mean;
  out.Px = px;
  out.Py = py;
  out.Pxy = Eigen::MatrixXd::Zero(model.total_dim(), model.output_dim);
  for (int i = 0; i < count; ++i) {
    out.Pxy += (xs[i] - x_mean) * (ys[i] - y_mean).transpose();
  }
  out.Pxy /= static_cast<double>(count - 1);

  if (omit_Qy) {
    out.Qy = SymMatrix::Zero(model.output_dim);
  } else {
    const double dt = std::max(out.dt, 0.0);
    Eigen::MatrixXd qy = Eigen::MatrixXd::Zero(model.output_dim,
                                               model.output_dim);
    for (int i = 0; i < count; ++i) {
      const Eigen::MatrixXd Dh = observe_jacobian(model, xs[i]);
      qy += Dh * (Q_prev.mat() * dt) * Dh.transpose();
    }
    out.Qy = psd_project(SymMatrix(qy / count));
  }
  return out;
}

KalmanResult kalman_update(const EnsembleMoments& moments,
                           const Eigen::VectorXd& y, const SymMatrix& Rhat,
                           const Eigen::VectorXd& bias,
                           const Eigen::VectorXd& prior_mean,
                           const SymMatrix& prior_cov) {
  const SymMatrix S = moments.Py + moments.Qy + Rhat;
  const Eigen::MatrixXd S_inv = robust_inverse(S);
  KalmanResult out;
  out.gain = moments.Pxy * S_inv;
  out.innovation_cov = S;
  out.mean = prior_mean + out.gain * (y - moments.y_mean - bias);
  out.cov = psd_project(SymMatrix(
      prior_cov.mat() - out.gain * S.mat() * out.gain.transpose()));
  return out;
}

ResidualStats residual_stats(const ModelSpec& model, const EnsembleBatch& batch,
                             const MeasurementLog& log, int mu,
                             ResidualScaling scaling) {
  if (mu < 1) throw InvalidSizes("residual_stats: mu must be >= 1");
  const int m_out = model.output_dim;
  const int count = static_cast<int>(batch.members.size());

  Eigen::VectorXd bias = Eigen::VectorXd::Zero(m_out);
  Eigen::MatrixXd sigma2 = Eigen::MatrixXd::Zero(m_out, m_out);
  std::vector<Eigen::VectorXd> member_bias(count);
  std::vector<Eigen::MatrixXd> member_sigma2(count);

  parallel_for(batch.members.size(), [&](std::size_t mi) {
    const auto& member = batch.members[mi];
    // complement of the subset within {1..n}, mu smallest indices
    std::vector<int> holdout;
    std::size_t pos = 0;
    for (int idx = 1; idx <= batch.n &&
                      static_cast<int>(holdout.size()) < mu; ++idx) {
      while (pos < member.subset.indices.size() &&
             member.subset.indices[pos] < idx) {
        ++pos;
      }
      const bool in_subset = pos < member.subset.indices.size() &&
                             member.subset.indices[pos] == idx;
      if (!in_subset) holdout.push_back(idx);
    }
    if (static_cast<int>(holdout.size()) < mu) {
      throw InsufficientHoldout("residual_stats: complement smaller than mu");
    }
    Eigen::VectorXd rbar = Eigen::VectorXd::Zero(m_out);
    Eigen::MatrixXd ssum = Eigen::MatrixXd::Zero(m_out, m_out);
    // holdout times precede the anchor; predicting from the fit-time
    // estimate keeps the evolution forward, where the flow is regular
    const ThetaVector& base =
        member.theta_fit.values.size() ? member.theta_fit : member.theta;
    for (int j : holdout) {
      const Eigen::VectorXd resid =
          log[j - 1].y - predict_output(model, base, log[j - 1].t);
      rbar += resid;
      ssum += resid * resid.transpose();
    }
    member_bias[mi] = rbar / mu;
    const double prefactor =
        scaling == ResidualScaling::kPaper
            ? static_cast<double>(batch.d) /
                  (static_cast<double>(batch.r) * mu)
            : 1.0 / mu;
    member_sigma2[mi] = prefactor * ssum;
  });

  for (int i = 0; i < count; ++i) {
    bias += member_bias[i];
    sigma2 += member_sigma2[i];
  }
  bias /= count;
  const double agg = scaling == ResidualScaling::kPaper
                         ? 1.0 / (static_cast<double>(count) * count)
                         : 1.0 / count;
  ResidualStats out;
  out.bias = bias;
  out.sigma2 = psd_project(SymMatrix(agg * sigma2));
  return out;
}

ResidualStats adaptive_residuals(const ResidualStats& prev,
                                 const ResidualStats& fresh, int n, int r) {
  const auto [a1, a2] = adaptive_weights(n, r);
  ResidualStats out;
  out.bias = a1 * fresh.bias + a2 * prev.bias;
  out.sigma2 = psd_project(
      SymMatrix(a1 * a1 * fresh.sigma2.mat() + a2 * a2 * prev.sigma2.mat()));
  return out;
}

REstimate estimate_R(const ModelSpec& model, const ResidualStats& residuals,
                     const EnsembleBatch& batch, double t_ref) {
  const int count = static_cast<int>(batch.members.size());
  if (count < 1) throw TooFewPoints("estimate_R: empty batch");
  std::vector<Eigen::VectorXd> preds(count);
  parallel_for(batch.members.size(), [&](std::size_t i) {
    preds[i] = predict_output(model, batch.members[i].theta, t_ref);
  });
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(model.output_dim);
  for (const auto& p : preds) mean += p;
  mean /= count;
  Eigen::MatrixXd spread =
      Eigen::MatrixXd::Zero(model.output_dim, model.output_dim);
  for (const auto& p : preds) {
    spread += (p - mean) * (p - mean).transpose();
  }
  spread *= static_cast<double>(batch.r) /
            (static_cast<double>(batch.d) * count);

  const SymMatrix raw(residuals.sigma2.mat() - spread);
  REstimate out;
  out.clipped = psd_clip_occurred(raw);
  out.R = psd_project(raw);
  return out;
}

QEstimate estimate_Q(const SymMatrix& v_n, const SymMatrix& Px_minus,
                     const Eigen::MatrixXd& Pxy, const SymMatrix& sigma2,
                     const SymMatrix& Qy, double dt, bool omit_Qy,
                     bool omit_Px_minus, QDenominator denominator) {
  if (!(dt > 0.0)) throw InvalidSizes("estimate_Q: dt must be positive");
  const int dim = v_n.dim();
  const SymMatrix qy_eff = omit_Qy ? SymMatrix::Zero(sigma2.dim()) : Qy;
  const SymMatrix denom = denominator == QDenominator::kPaper
                              ? sigma2 - qy_eff
                              : sigma2 + qy_eff;
  const Eigen::MatrixXd d_inv = robust_inverse(denom);
  Eigen::MatrixXd q = v_n.mat() + Pxy * d_inv * Pxy.transpose();
  if (!omit_Px_minus) q -= Px_minus.mat();
  q /= dt;
  const SymMatrix raw(q);
  QEstimate out;
  out.clipped = psd_clip_occurred(raw);
  out.Q = psd_project(raw);
  if (!out.Q.mat().allFinite()) {
    throw SingularInnovation("estimate_Q: non-finite result");
  }
  return out;
}

std::vector<StepRecord> run_adaptive(
    const ModelSpec& model, const MeasurementLog& log, const FilterConfig& cfg,
    const std::vector<std::pair<double, Eigen::VectorXd>>* truth) {
  const int total = static_cast<int>(log.size());
  if (!(total > cfg.n0 && cfg.n0 > cfg.r && cfg.r >= 1)) {
    throw InvalidSizes("run_adaptive: need |log| > n0 > r >= 1");
  }
  if (cfg.mu < 1 || cfg.mu > cfg.n0 - cfg.r) {
    throw InvalidSizes("run_adaptive: need 1 <= mu <= n0 - r");
  }
  ModelSpec mdl = model;
  mdl.h_max = cfg.h_max;

  RngStream subset_rng(cfg.seed, "subsets");
  RngStream process_rng(cfg.seed, "enkf_process");
  RngStream obs_rng(cfg.seed, "enkf_obs");

  auto error_vs_truth = [&](int n, const Eigen::VectorXd& state)
      -> std::optional<double> {
    if (!truth || n > static_cast<int>(truth->size())) return std::nullopt;
    return ((*truth)[n - 1].second - state).norm();
  };

  std::vector<StepRecord> records;
  records.reserve(total - cfg.n0 + 1);

  // --- burn-in: one batch of m0 = n0 subsets over the first n0 points
  const double t_first = log.front().t;
  const double t_burn = log[cfg.n0 - 1].t;
  MeasurementLog prefix(log.begin(), log.begin() + cfg.n0);
  auto subsets = sample_subsets(cfg.n0, cfg.r, cfg.n0, std::nullopt,
                                subset_rng);
  EnsembleBatch batch = fit_batch(mdl, prefix, subsets, t_first, t_burn,
                                  cfg.init_guess, cfg.bounds, cfg.n0);
  JackknifeStats stats = batch_jsve(batch);
  ResidualStats residuals =
      residual_stats(mdl, batch, prefix, cfg.mu, cfg.residual_scaling);
  REstimate r_est = estimate_R(mdl, residuals, batch, t_burn);
  SymMatrix Qhat = SymMatrix::Zero(mdl.total_dim());
  SymMatrix Rhat = r_est.R;
  Eigen::VectorXd bias = cfg.bias_correction
                             ? residuals.bias
                             : Eigen::VectorXd::Zero(mdl.output_dim).eval();

  {
    StepRecord rec;
    rec.n = cfg.n0;
    rec.t = t_burn;
    rec.mode = StepMode::kBurnin;
    rec.state = stats.mean;
    rec.error_norm = error_vs_truth(cfg.n0, stats.mean);
    rec.Qhat = Qhat;
    rec.Rhat = Rhat;
    rec.bias = residuals.bias;
    rec.clipped_r = r_est.clipped;
    records.push_back(rec);
  }

  EnsembleBatch prev_batch = batch;
  StepMode mode = StepMode::kJackknife;
  int stable_steps = 0;
  std::vector<ThetaVector> members;  // EnKF ensemble after handoff
  SymMatrix sqrt_q = SymMatrix::Zero(mdl.total_dim());
  SymMatrix sqrt_r = SymMatrix::Zero(mdl.output_dim);

  for (int n = cfg.n0 + 1; n <= total; ++n) {
    try {
      const double t_prev = log[n - 2].t;
      const double t_k = log[n - 1].t;
      const double dt = t_k - t_prev;
      StepRecord rec;
      rec.n = n;
      rec.t = t_k;

      if (mode == StepMode::kJackknife) {
        // carry the running estimate to the new anchor before combining
        JackknifeStats carried = stats;
        carried.mean =
            evolve_theta(mdl, ThetaVector{t_prev, stats.mean}, t_k).values;

        // warm start at the fit anchor; fall back to the cold guess when the
        // backward flow of the carried mean leaves the model's domain
        Eigen::VectorXd warm = cfg.init_guess;
        try {
          const Eigen::VectorXd back =
              evolve_theta(mdl, ThetaVector{t_k, carried.mean}, t_first)
                  .values;
          if (back.allFinite()) warm = back;
        } catch (const NonFiniteState&) {
        }

        MeasurementLog seen(log.begin(), log.begin() + n);
        subsets = sample_subsets(n, cfg.r, cfg.m, n, subset_rng);
        batch = fit_batch(mdl, seen, subsets, t_first, t_k, warm, cfg.bounds,
                          n);
        stats = adaptive_update(carried, batch, cfg.center_on_updated_mean);

        const ResidualStats fresh =
            residual_stats(mdl, batch, seen, cfg.mu, cfg.residual_scaling);
        residuals = adaptive_residuals(residuals, fresh, n, cfg.r);
        r_est = estimate_R(mdl, residuals, batch, t_k);

        const EnsembleMoments moments =
            ensemble_moments(mdl, prev_batch, t_k, Qhat, cfg.omit_Qy);
        const QEstimate q_est = estimate_Q(
            stats.var, moments.Px, moments.Pxy, residuals.sigma2, moments.Qy,
            dt, cfg.omit_Qy, cfg.omit_Px_minus, cfg.q_denominator);

        const KalmanResult post = kalman_update(
            moments, log[n - 1].y, r_est.R, bias, stats.mean, stats.var);

        const double dq = relative_change(q_est.Q, Qhat);
        const double dr = relative_change(r_est.R, Rhat);
        stable_steps = (dq < cfg.handoff_tol && dr < cfg.handoff_tol)
                           ? stable_steps + 1
                           : 0;
        Qhat = q_est.Q;
        Rhat = r_est.R;
        bias = cfg.bias_correction
                   ? residuals.bias
                   : Eigen::VectorXd::Zero(mdl.output_dim).eval();

        rec.mode = StepMode::kJackknife;
        rec.state = post.mean;
        rec.clipped_q = q_est.clipped;
        rec.clipped_r = r_est.clipped;
        prev_batch = batch;

        if (stable_steps >= cfg.handoff_window) {
          mode = StepMode::kEnkf;
          members.clear();
          members.reserve(batch.members.size());
          for (const auto& mem : batch.members) members.push_back(mem.theta);
          sqrt_q = matrix_sqrt(Qhat);
          sqrt_r = matrix_sqrt(Rhat);
        }
      } else {
        // frozen-noise ensemble Kalman step
        const bool has_q = Qhat.trace() > 0.0;
        const bool has_r = Rhat.trace() > 0.0;
        EnsembleBatch ens;
        ens.n = n;
        ens.r = cfg.r;
        ens.d = n - cfg.r;
        ens.m = static_cast<int>(members.size());
        ens.members.resize(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
          ThetaVector moved = evolve_theta(mdl, members[i], t_k);
          if (has_q && dt > 0.0) {
            moved.values += sqrt_q.mat() *
                            (std::sqrt(dt) *
                             process_rng.gaussian_vector(mdl.total_dim()));
          }
          ens.members[i] = MemberEstimate{SubsetIndex{}, moved, 0.0};
        }
        // stochastic forcing is already inside the members, so Qy is off
        const EnsembleMoments moments =
            ensemble_moments(mdl, ens, t_k, Qhat, /*omit_Qy=*/true);
        const KalmanResult post =
            kalman_update(moments, log[n - 1].y, Rhat, bias, moments.x_mean,
                          moments.Px);
        // perturbed-observation member update keeps the posterior spread
        for (std::size_t i = 0; i < ens.members.size(); ++i) {
          Eigen::VectorXd perturbed = log[n - 1].y;
          if (has_r) {
            perturbed += sqrt_r.mat() *
                         obs_rng.gaussian_vector(mdl.output_dim);
          }
          const Eigen::VectorXd predicted = mdl.observe(
              ens.members[i].theta.values.head(mdl.state_dim));
          ens.members[i].theta.values +=
              post.gain * (perturbed - predicted - bias);
        }
        members.clear();
        for (const auto& mem : ens.members) members.push_back(mem.theta);

        rec.mode = StepMode::kEnkf;
        rec.state = post.mean;
      }

      rec.error_norm = error_vs_truth(n, rec.state);
      rec.Qhat = Qhat;
      rec.Rhat = Rhat;
      rec.bias = residuals.bias;
      records.push_back(rec);
    } catch (const std::exception&) {
      std::throw_with_nested(
          std::runtime_error("run_adaptive: failure at step " +
                             std::to_string(n)));
    }
  }
  return records;
}

}  // namespace jackfilter

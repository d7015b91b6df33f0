#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "jackfilter/numkit.hpp"

namespace jackfilter {

struct Measurement {
  double t = 0.0;
  Eigen::VectorXd y;
};

using MeasurementLog = std::vector<Measurement>;

/// Augmented estimate (state part then parameter part) anchored at a
/// reference time.
struct ThetaVector {
  double anchor_time = 0.0;
  Eigen::VectorXd values;  // dim state_dim + param_dim
};

/// Continuous-discrete stochastic model: deterministic drift on the state
/// part, zero dynamics on the parameter part, discrete measurements through
/// observe(). closed_form, when set, is the exact flow of the drift and is
/// preferred over numeric integration.
struct ModelSpec {
  std::string name;
  int state_dim = 0;
  int param_dim = 0;
  int output_dim = 0;

  // dx/dt of the state part; params are held fixed
  std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& state,
                                const Eigen::VectorXd& params)>
      drift;
  // state -> output
  std::function<Eigen::VectorXd(const Eigen::VectorXd& state)> observe;
  // exact flow: state at t given state at t0 (null when unknown)
  std::function<Eigen::VectorXd(double t, double t0,
                                const Eigen::VectorXd& state,
                                const Eigen::VectorXd& params)>
      closed_form;

  double h_max = 0.05;  // RK4 step ceiling

  int total_dim() const { return state_dim + param_dim; }
};

/// Deterministic flow of theta's state part to t_target (parameters fixed).
/// Backward targets integrate with negative steps. Exact identity at
/// t_target == anchor_time.
Eigen::VectorXd evolve(const ModelSpec& model, const ThetaVector& theta,
                       double t_target);

/// Same flow, returned as a full augmented vector re-anchored at t_target.
ThetaVector evolve_theta(const ModelSpec& model, const ThetaVector& theta,
                         double t_target);

/// h(F(t, x(T))) -- the predicted output used by the LSQ objective.
Eigen::VectorXd predict_output(const ModelSpec& model, const ThetaVector& theta,
                               double t);

struct SimResult {
  // stochastic state trajectory, free of measurement noise
  std::vector<std::pair<double, Eigen::VectorXd>> truth;
  MeasurementLog measurements;
};

/// Iterates x(t_k) = F(t_k, x(t_{k-1})) + sqrt(Q dt_k) N(0,1), then
/// y_k = h(x(t_k)) + sqrt(R) N(0,1).
SimResult simulate(const ModelSpec& model, const ThetaVector& theta0,
                   const std::vector<double>& times, const SymMatrix& Q,
                   const SymMatrix& R, RngStream& rng);

/// Logistic growth with augmented parameters (x; beta, N) and identity
/// observation of x. Ships a closed-form flow.
ModelSpec logistic_model(double h_max = 0.05);

/// Scalar line through the origin: anchored at t0 > 0 the prediction is
/// H(t, theta) = theta * t / t0. Used by the oracle command and tests.
ModelSpec line_model();

}  // namespace jackfilter

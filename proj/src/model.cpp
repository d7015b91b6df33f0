#include "jackfilter/model.hpp"

#include <cmath>

namespace jackfilter {

namespace {

void check_finite(const Eigen::VectorXd& v, const char* where) {
  if (!v.allFinite()) {
    throw NonFiniteState(std::string(where) + ": non-finite state");
  }
}

}  // namespace

Eigen::VectorXd evolve(const ModelSpec& model, const ThetaVector& theta,
                       double t_target) {
  const Eigen::VectorXd state = theta.values.head(model.state_dim);
  const Eigen::VectorXd params = theta.values.tail(model.param_dim);
  if (t_target == theta.anchor_time) return state;
  if (model.closed_form) {
    Eigen::VectorXd out =
        model.closed_form(t_target, theta.anchor_time, state, params);
    check_finite(out, "evolve");
    return out;
  }
  const double span = t_target - theta.anchor_time;
  const int steps = std::max(1, static_cast<int>(std::ceil(
                                    std::abs(span) / model.h_max)));
  const double h = span / steps;
  Eigen::VectorXd x = state;
  double t = theta.anchor_time;
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1 = model.drift(t, x, params);
    const Eigen::VectorXd k2 =
        model.drift(t + 0.5 * h, x + 0.5 * h * k1, params);
    const Eigen::VectorXd k3 =
        model.drift(t + 0.5 * h, x + 0.5 * h * k2, params);
    const Eigen::VectorXd k4 = model.drift(t + h, x + h * k3, params);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    check_finite(x, "evolve");
  }
  return x;
}

ThetaVector evolve_theta(const ModelSpec& model, const ThetaVector& theta,
                         double t_target) {
  ThetaVector out;
  out.anchor_time = t_target;
  out.values.resize(model.total_dim());
  out.values.head(model.state_dim) = evolve(model, theta, t_target);
  out.values.tail(model.param_dim) = theta.values.tail(model.param_dim);
  return out;
}

Eigen::VectorXd predict_output(const ModelSpec& model, const ThetaVector& theta,
                               double t) {
  Eigen::VectorXd y = model.observe(evolve(model, theta, t));
  check_finite(y, "predict_output");
  return y;
}

SimResult simulate(const ModelSpec& model, const ThetaVector& theta0,
                   const std::vector<double>& times, const SymMatrix& Q,
                   const SymMatrix& R, RngStream& rng) {
  if (Q.dim() != model.total_dim() || R.dim() != model.output_dim) {
    throw InvalidSizes("simulate: Q must be (n+p)-dim, R must be m-dim");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidSizes("simulate: times must be strictly increasing");
    }
  }
  const SymMatrix sqrt_q = matrix_sqrt(Q);
  const SymMatrix sqrt_r = matrix_sqrt(R);
  const bool has_q = Q.trace() > 0.0;
  const bool has_r = R.trace() > 0.0;

  SimResult out;
  out.truth.reserve(times.size());
  out.measurements.reserve(times.size());
  ThetaVector current = theta0;
  for (double t : times) {
    const double dt = t - current.anchor_time;
    Eigen::VectorXd aug = evolve_theta(model, current, t).values;
    if (has_q && dt > 0.0) {
      aug += sqrt_q.mat() * (std::sqrt(dt) *
                             rng.gaussian_vector(model.total_dim()));
    }
    check_finite(aug, "simulate");
    out.truth.emplace_back(t, aug);
    Eigen::VectorXd y = model.observe(aug.head(model.state_dim));
    if (has_r) {
      y += sqrt_r.mat() * rng.gaussian_vector(model.output_dim);
    }
    check_finite(y, "simulate");
    out.measurements.push_back({t, y});
    current = {t, aug};
  }
  return out;
}

ModelSpec logistic_model(double h_max) {
  ModelSpec m;
  m.name = "logistic";
  m.state_dim = 1;
  m.param_dim = 2;  // growth rate beta, carrying capacity N
  m.output_dim = 1;
  m.h_max = h_max;
  m.drift = [](double, const Eigen::VectorXd& state,
               const Eigen::VectorXd& params) {
    Eigen::VectorXd dx(1);
    dx[0] = params[0] * state[0] * (1.0 - state[0] / params[1]);
    return dx;
  };
  m.observe = [](const Eigen::VectorXd& state) { return state; };
  m.closed_form = [](double t, double t0, const Eigen::VectorXd& state,
                     const Eigen::VectorXd& params) {
    const double beta = params[0];
    const double cap = params[1];
    const double x0 = state[0];
    const double e = std::exp(beta * (t - t0));
    Eigen::VectorXd out(1);
    out[0] = cap * x0 * e / (cap + x0 * (e - 1.0));
    return out;
  };
  return m;
}

ModelSpec line_model() {
  ModelSpec m;
  m.name = "line";
  m.state_dim = 1;
  m.param_dim = 0;
  m.output_dim = 1;
  m.drift = [](double t, const Eigen::VectorXd& state,
               const Eigen::VectorXd&) {
    Eigen::VectorXd dx(1);
    dx[0] = state[0] / t;
    return dx;
  };
  m.observe = [](const Eigen::VectorXd& state) { return state; };
  m.closed_form = [](double t, double t0, const Eigen::VectorXd& state,
                     const Eigen::VectorXd&) {
    Eigen::VectorXd out(1);
    out[0] = state[0] * t / t0;
    return out;
  };
  return m;
}

}  // namespace jackfilter

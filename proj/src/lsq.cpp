#include "jackfilter/lsq.hpp"

#include <cmath>
#include <limits>

namespace jackfilter {

namespace {

constexpr double kObjectiveTol = 1e-10;
constexpr double kStepTol = 1e-10;
constexpr int kMaxIterations = 200;
constexpr double kFdStepScale = 1e-6;

Eigen::VectorXd project_bounds(const Eigen::VectorXd& v,
                               const std::vector<std::array<double, 2>>& b) {
  if (b.empty()) return v;
  Eigen::VectorXd out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = std::min(std::max(out[i], b[i][0]), b[i][1]);
  }
  return out;
}

}  // namespace

LsqSolution fit(const LsqProblem& problem) {
  if (problem.data.empty()) {
    throw InvalidSizes("fit: empty data");
  }
  const int dim = static_cast<int>(problem.init.values.size());
  if (dim != problem.model.total_dim()) {
    throw InvalidSizes("fit: init dimension mismatch");
  }
  if (!problem.bounds.empty() &&
      static_cast<int>(problem.bounds.size()) != dim) {
    throw InvalidSizes("fit: bounds dimension mismatch");
  }
  const int n_data = static_cast<int>(problem.data.size());
  const int m = problem.model.output_dim;
  const int resid_dim = n_data * m;

  auto residual = [&](const Eigen::VectorXd& v) {
    ThetaVector th{problem.anchor_time, v};
    Eigen::VectorXd r(resid_dim);
    for (int i = 0; i < n_data; ++i) {
      r.segment(i * m, m) =
          problem.data[i].y -
          predict_output(problem.model, th, problem.data[i].t);
    }
    return r;
  };

  // stacked residual Jacobian via central differences, clamped into bounds
  auto jacobian = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd J(resid_dim, dim);
    for (int j = 0; j < dim; ++j) {
      const double step = kFdStepScale * (1.0 + std::abs(v[j]));
      Eigen::VectorXd hi = v, lo = v;
      hi[j] += step;
      lo[j] -= step;
      if (!problem.bounds.empty()) {
        hi[j] = std::min(hi[j], problem.bounds[j][1]);
        lo[j] = std::max(lo[j], problem.bounds[j][0]);
      }
      const double width = hi[j] - lo[j];
      if (width <= 0.0) {
        J.col(j).setZero();
        continue;
      }
      J.col(j) = (residual(hi) - residual(lo)) / width;
    }
    return J;
  };

  Eigen::VectorXd theta = project_bounds(problem.init.values, problem.bounds);
  Eigen::VectorXd r;
  try {
    r = residual(theta);
  } catch (const NonFiniteState&) {
    throw NonFiniteObjective("fit: objective diverges at initial guess");
  }
  if (!r.allFinite()) {
    throw NonFiniteObjective("fit: objective diverges at initial guess");
  }
  double ssq = r.squaredNorm();

  double lambda = 1e-3;
  bool converged = false;
  int iterations = 0;
  Eigen::MatrixXd J;
  for (; iterations < kMaxIterations; ++iterations) {
    J = jacobian(theta);
    const Eigen::VectorXd grad = J.transpose() * r;  // 1/2 d ssq / d theta
    Eigen::MatrixXd A = J.transpose() * J;
    const double diag_floor = 1e-12 * (1.0 + A.trace());
    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd damped = A;
      for (int k = 0; k < dim; ++k) {
        damped(k, k) += lambda * std::max(A(k, k), diag_floor);
      }
      const Eigen::VectorXd delta = damped.ldlt().solve(-grad);
      const Eigen::VectorXd trial =
          project_bounds(theta + delta, problem.bounds);
      double trial_ssq = std::numeric_limits<double>::infinity();
      Eigen::VectorXd trial_r;
      try {
        trial_r = residual(trial);
        if (trial_r.allFinite()) trial_ssq = trial_r.squaredNorm();
      } catch (const NonFiniteState&) {
      }
      if (trial_ssq <= ssq) {
        const double decrease = ssq - trial_ssq;
        const double step_norm = (trial - theta).norm();
        theta = trial;
        r = trial_r;
        ssq = trial_ssq;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (decrease < kObjectiveTol * (1.0 + ssq) ||
            step_norm < kStepTol * (1.0 + theta.norm())) {
          converged = true;
        }
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (converged || !stepped) {
      if (!stepped) converged = true;  // damping exhausted: local minimum
      ++iterations;
      break;
    }
  }

  // undamped polish: the damped loop stops with a small residual bias from
  // lambda; a few pure Gauss-Newton steps remove it (exact for linear H)
  for (int polish = 0; polish < 8; ++polish) {
    J = jacobian(theta);
    const Eigen::VectorXd grad = J.transpose() * r;
    Eigen::MatrixXd A = J.transpose() * J;
    const double diag_floor = 1e-12 * (1.0 + A.trace());
    for (int k = 0; k < dim; ++k) {
      A(k, k) = std::max(A(k, k), diag_floor);
    }
    const Eigen::VectorXd delta = A.ldlt().solve(-grad);
    const Eigen::VectorXd trial = project_bounds(theta + delta, problem.bounds);
    Eigen::VectorXd trial_r;
    try {
      trial_r = residual(trial);
    } catch (const NonFiniteState&) {
      break;
    }
    if (!trial_r.allFinite()) break;
    const double trial_ssq = trial_r.squaredNorm();
    if (trial_ssq > ssq) break;
    const double decrease = ssq - trial_ssq;
    const double step_norm = (trial - theta).norm();
    theta = trial;
    r = trial_r;
    ssq = trial_ssq;
    if (step_norm <= 1e-15 * (1.0 + theta.norm()) ||
        decrease <= 1e-16 * (1.0 + ssq)) {
      break;
    }
  }

  LsqSolution sol;
  sol.theta = ThetaVector{problem.anchor_time, theta};
  sol.mse = ssq / n_data;
  sol.converged = converged;
  sol.iterations = iterations;
  sol.underdetermined = resid_dim < dim;
  sol.gradient_norm =
      (2.0 / n_data) * (jacobian(theta).transpose() * r).norm();
  return sol;
}

LsqSolution multistart_fit(const LsqProblem& problem, int starts,
                           RngStream& rng) {
  if (starts < 1) throw InvalidSizes("multistart_fit: starts must be >= 1");
  std::optional<LsqSolution> best;
  int failures = 0;
  for (int s = 0; s < starts; ++s) {
    LsqProblem p = problem;
    if (s > 0) {
      Eigen::VectorXd v = problem.init.values;
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (!problem.bounds.empty() && problem.bounds[j][0] > 0.0 &&
            problem.bounds[j][1] > problem.bounds[j][0]) {
          const double llo = std::log(problem.bounds[j][0]);
          const double lhi = std::log(problem.bounds[j][1]);
          v[j] = std::exp(llo + (lhi - llo) * rng.uniform01());
        } else if (!problem.bounds.empty()) {
          v[j] = problem.bounds[j][0] +
                 (problem.bounds[j][1] - problem.bounds[j][0]) *
                     rng.uniform01();
        } else {
          // no bounds: scale jitter of up to one decade around the guess
          v[j] = v[j] == 0.0
                     ? 2.0 * rng.uniform01() - 1.0
                     : v[j] * std::exp((2.0 * rng.uniform01() - 1.0) *
                                       std::numbers::ln10);
        }
      }
      p.init.values = v;
    }
    try {
      LsqSolution sol = fit(p);
      if (!best || sol.mse < best->mse) best = sol;
    } catch (const NonFiniteObjective&) {
      ++failures;
    }
  }
  if (!best) {
    throw AllStartsFailed("multistart_fit: all " + std::to_string(failures) +
                          " starts diverged");
  }
  return *best;
}

}  // namespace jackfilter

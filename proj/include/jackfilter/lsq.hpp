#pragma once

#include <array>
#include <optional>
#include <vector>

#include "jackfilter/model.hpp"

namespace jackfilter {

/// Nonlinear least-squares problem over a measurement subset. The estimate is
/// the augmented vector anchored at anchor_time; predictions run the model
/// flow from there to every data time.
struct LsqProblem {
  ModelSpec model;
  MeasurementLog data;
  double anchor_time = 0.0;
  ThetaVector init;
  // componentwise [lo, hi]; empty = unbounded
  std::vector<std::array<double, 2>> bounds;
};

struct LsqSolution {
  ThetaVector theta;
  double mse = 0.0;  // (1/|data|) sum ||y_i - H(t_i, theta)||^2
  bool converged = false;
  int iterations = 0;
  bool underdetermined = false;
  double gradient_norm = 0.0;  // objective gradient at the solution
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on central finite-difference
/// Jacobians, with box projection after each step.
LsqSolution fit(const LsqProblem& problem);

/// Runs fit from `starts` initial guesses (the given init plus log-uniform
/// jitter within bounds) and keeps the lowest mse.
LsqSolution multistart_fit(const LsqProblem& problem, int starts,
                           RngStream& rng);

}  // namespace jackfilter

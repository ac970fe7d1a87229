#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace xcoupler {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
};

struct LeastSquaresOptions {
  int max_iters = 5000;
  double cost_tol = 0.0;   // stop once sum of squares <= cost_tol
  double step_tol = 1e-15; // relative parameter step
  double grad_tol = 1e-30;
  double fd_step = 1e-7;   // relative central-difference step
  // Stop when stall_window iterations lower the cost by no more than
  // stall_rtol relative (0 disables).
  int stall_window = 50;
  double stall_rtol = 1e-6;
  std::optional<Bounds> bounds;
};

// iterations counts Jacobian evaluations; history holds (iteration,
// best-so-far cost) after every iteration, starting with (0, initial cost).
struct MinimizeResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  int iterations = 0;
  std::vector<std::pair<int, double>> history;
};

// Levenberg-Marquardt on sum of squared residuals with a central-difference
// Jacobian. Bounds are enforced by projection.
MinimizeResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd x0,
                                   const LeastSquaresOptions& options);

struct SimplexOptions {
  int max_iters = 500;
  double initial_step = 0.05;  // relative, floored at 1e-3 absolute
  double f_tol = 0.0;          // stop once best value <= f_tol
  double spread_tol = 1e-14;   // stop once simplex value spread is this small
  std::optional<Bounds> bounds;
};

// Nelder-Mead with the standard coefficients (1, 2, 0.5, 0.5).
MinimizeResult nelder_mead(const ObjectiveFn& f, Eigen::VectorXd x0,
                           const SimplexOptions& options);

}  // namespace xcoupler

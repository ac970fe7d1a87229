#include "xcoupler/least_squares.hpp"

#include "xcoupler/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xcoupler {

Eigen::VectorXd Bounds::clamp(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lo).cwiseMin(hi);
}

namespace {

Eigen::VectorXd project(const std::optional<Bounds>& b, const Eigen::VectorXd& x) {
  return b ? b->clamp(x) : x;
}

Eigen::MatrixXd jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                         Eigen::Index m, double rel_step) {
  Eigen::MatrixXd jac(m, x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = rel_step * std::max(1.0, std::abs(x[k]));
    xp[k] = x[k] + h;
    const Eigen::VectorXd rp = f(xp);
    xp[k] = x[k] - h;
    const Eigen::VectorXd rm = f(xp);
    xp[k] = x[k];
    jac.col(k) = (rp - rm) / (2.0 * h);
  }
  return jac;
}

}  // namespace

MinimizeResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd x0,
                                   const LeastSquaresOptions& options) {
  MinimizeResult out;
  out.x = project(options.bounds, x0);
  Eigen::VectorXd r = residuals(out.x);
  out.cost = r.squaredNorm();
  out.history.emplace_back(0, out.cost);
  if (!std::isfinite(out.cost)) throw DomainError("non-finite initial residual");

  double lambda = -1.0;
  double nu = 2.0;
  while (out.iterations < options.max_iters && out.cost > options.cost_tol) {
    ++out.iterations;
    const Eigen::MatrixXd jac = jacobian(residuals, out.x, r.size(), options.fd_step);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) break;
    if (lambda < 0.0) lambda = 1e-3 * std::max(jtj.diagonal().maxCoeff(), 1e-12);

    // Variables held at a bound by a gradient pointing outward stay fixed;
    // the damped system is solved over the rest.
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < out.x.size(); ++k) {
      bool pinned = false;
      if (options.bounds) {
        pinned = (out.x[k] <= options.bounds->lo[k] && g[k] > 0.0) ||
                 (out.x[k] >= options.bounds->hi[k] && g[k] < 0.0);
      }
      if (!pinned) free.push_back(k);
    }
    if (free.empty()) break;
    const auto nf = static_cast<Eigen::Index>(free.size());

    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Eigen::MatrixXd lhs(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs[a] = -g[free[a]];
        for (Eigen::Index b = 0; b < nf; ++b) lhs(a, b) = jtj(free[a], free[b]);
        lhs(a, a) += lambda * std::max(jtj(free[a], free[a]), 1e-12);
      }
      const Eigen::VectorXd sub = lhs.ldlt().solve(rhs);
      Eigen::VectorXd step = Eigen::VectorXd::Zero(out.x.size());
      for (Eigen::Index a = 0; a < nf; ++a) step[free[a]] = sub[a];
      const Eigen::VectorXd trial = project(options.bounds, out.x + step);
      const Eigen::VectorXd actual = trial - out.x;
      if (actual.norm() <= options.step_tol * (out.x.norm() + options.step_tol)) {
        stalled = true;
        break;
      }
      const Eigen::VectorXd r_trial = residuals(trial);
      const double cost_trial = r_trial.squaredNorm();
      // Gain ratio against the linear model's predicted decrease.
      const double predicted = -(2.0 * g.dot(actual) + (jac * actual).squaredNorm());
      const double rho = predicted > 0.0 ? (out.cost - cost_trial) / predicted : -1.0;
      if (std::isfinite(cost_trial) && cost_trial < out.cost) {
        out.x = trial;
        r = r_trial;
        out.cost = cost_trial;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * std::clamp(rho, 0.0, 1.0) - 1.0, 3));
        nu = 2.0;
        accepted = true;
      } else {
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e16) {
          stalled = true;
          break;
        }
      }
    }
    out.history.emplace_back(out.iterations, out.cost);
    if (stalled) break;
    const int w = options.stall_window;
    if (w > 0 && out.iterations >= w) {
      const double before = out.history[out.history.size() - 1 - static_cast<std::size_t>(w)].second;
      if (before - out.cost <= options.stall_rtol * before) break;
    }
  }
  return out;
}

MinimizeResult nelder_mead(const ObjectiveFn& f, Eigen::VectorXd x0,
                           const SimplexOptions& options) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  pts.push_back(project(options.bounds, x0));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd p = pts[0];
    p[k] += std::max(options.initial_step * std::abs(p[k]), 1e-3);
    pts.push_back(project(options.bounds, p));
  }
  for (const auto& p : pts) vals.push_back(f(p));

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  };

  MinimizeResult out;
  sort_simplex();
  out.history.emplace_back(0, vals[order[0]]);
  while (out.iterations < options.max_iters) {
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (vals[best] <= options.f_tol) break;
    if (vals[worst] - vals[best] <= options.spread_tol * (std::abs(vals[best]) + 1e-300)) break;
    ++out.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += pts[order[k]];
    centroid /= static_cast<double>(n);

    auto eval_at = [&](double t) {
      Eigen::VectorXd p = project(options.bounds, centroid + t * (pts[worst] - centroid));
      const double v = f(p);
      return std::make_pair(p, v);
    };
    auto [xr, fr] = eval_at(-1.0);
    if (fr < vals[best]) {
      auto [xe, fe] = eval_at(-2.0);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      auto [xc, fc] = fr < vals[worst] ? eval_at(-0.5) : eval_at(0.5);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (std::size_t k = 1; k < order.size(); ++k) {
          auto& p = pts[order[k]];
          p = project(options.bounds, pts[best] + 0.5 * (p - pts[best]));
          vals[order[k]] = f(p);
        }
      }
    }
    sort_simplex();
    out.history.emplace_back(out.iterations, std::min(out.history.back().second, vals[order[0]]));
  }
  out.x = pts[order.front()];
  out.cost = vals[order.front()];
  return out;
}

}  // namespace xcoupler

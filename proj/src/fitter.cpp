#include "xcoupler/fitter.hpp"

#include "xcoupler/error.hpp"
#include "xcoupler/least_squares.hpp"
#include "xcoupler/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace xcoupler {

namespace {

// Residual magnitude standing in for a singular evaluation point.
constexpr double kSingularPenalty = 1e3;

struct Parameterization {
  std::vector<std::pair<int, int>> entries;  // upper triangle, i <= j

  explicit Parameterization(const TopologyMask& mask) {
    const int n = mask.size();
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        if (i == j && (i == 0 || i == n - 1)) continue;
        if (mask.allowed(i, j)) entries.emplace_back(i, j);
      }
    }
  }

  Eigen::VectorXd extract(const CouplingMatrix& m) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t k = 0; k < entries.size(); ++k) {
      x[static_cast<Eigen::Index>(k)] = m(entries[k].first, entries[k].second);
    }
    return x;
  }

  CouplingMatrix apply(const CouplingMatrix& base, const Eigen::VectorXd& x) const {
    Eigen::MatrixXd v = base.values();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto [i, j] = entries[k];
      v(i, j) = v(j, i) = x[static_cast<Eigen::Index>(k)];
    }
    CouplingMatrix out(v);
    out.set_labels(base.labels());
    return out;
  }
};

struct PreparedTarget {
  const SParamSweep* sweep;
  std::vector<double> omega;
  std::vector<double> sqrt_weight;  // sqrt(w_i / sum w)
};

PreparedTarget prepare(const FrequencyPlan& plan, const SParamSweep& target,
                       const FitWeights& weights) {
  if (target.empty()) throw DomainError("fit target sweep is empty");
  weights.validate();
  PreparedTarget out{&target, {}, {}};
  double total = 0.0;
  for (const double f : target.freqs_hz) {
    out.omega.push_back(normalized_frequency(plan, f));
    out.sqrt_weight.push_back(weights.at(plan, f));
    total += out.sqrt_weight.back();
  }
  if (!(total > 0.0)) throw DomainError("fit weights are zero on every target point");
  for (auto& w : out.sqrt_weight) w = std::sqrt(w / total);
  return out;
}

Eigen::VectorXd residual_vector(const CouplingMatrix& m, const PreparedTarget& t) {
  const std::size_t n = t.omega.size();
  Eigen::VectorXd r(static_cast<Eigen::Index>(4 * n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto base = static_cast<Eigen::Index>(4 * i);
    const double w = t.sqrt_weight[i];
    try {
      const SParam2 model = response_at(m, t.omega[i]);
      const SParam2& ref = t.sweep->s[i];
      const cplx d11 = model.s11 - ref.s11;
      const cplx d21 = model.s21 - ref.s21;
      r[base] = w * d11.real();
      r[base + 1] = w * d11.imag();
      r[base + 2] = w * d21.real();
      r[base + 3] = w * d21.imag();
    } catch (const SingularNetworkError&) {
      r.segment(base, 4).setConstant(w * kSingularPenalty);
    }
  }
  return r;
}

void check_problem(const FitProblem& p, const EntryBounds& bounds) {
  if (p.mask.order() != p.initial.order()) {
    throw DomainError("fit mask order does not match the initial matrix");
  }
  if (!p.mask.connects_source_to_load()) {
    throw DomainError("infeasible mask: no chain of couplings from S to L");
  }
  if (!p.mask.satisfied_by(p.initial)) {
    throw DomainError("initial matrix has couplings outside the mask");
  }
  const int n = p.initial.size();
  if (bounds.lo.rows() != n || bounds.lo.cols() != n || bounds.hi.rows() != n ||
      bounds.hi.cols() != n) {
    throw DomainError("fit bounds do not match the matrix size");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!p.mask.allowed(i, j)) continue;
      if (p.initial(i, j) < bounds.lo(i, j) || p.initial(i, j) > bounds.hi(i, j)) {
        throw DomainError("initial matrix lies outside the fit bounds at (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

struct StartOutcome {
  Eigen::VectorXd x;
  double cost = INFINITY;
  int iterations = 0;
  std::vector<std::pair<int, double>> history;
};

StartOutcome run_start(const ResidualFn& residuals, const Eigen::VectorXd& x0,
                       const Bounds& bounds, const FitOptions& options) {
  StartOutcome out;
  const ObjectiveFn objective = [&](const Eigen::VectorXd& x) {
    return residuals(x).squaredNorm();
  };
  // Short simplex phase, then least squares for the remaining budget.
  SimplexOptions simplex;
  simplex.max_iters = std::min(options.max_iters / 2, 25 * static_cast<int>(x0.size()));
  simplex.f_tol = options.tol;
  simplex.bounds = bounds;
  const MinimizeResult coarse = nelder_mead(objective, x0, simplex);

  LeastSquaresOptions ls;
  ls.max_iters = std::max(1, options.max_iters - coarse.iterations);
  ls.cost_tol = options.tol * 1e-6;
  ls.bounds = bounds;
  const MinimizeResult fine = levenberg_marquardt(residuals, coarse.x, ls);

  out.x = fine.x;
  out.cost = fine.cost;
  out.iterations = coarse.iterations + fine.iterations;
  double best = INFINITY;
  for (const auto& [it, cost] : coarse.history) {
    best = std::min(best, cost);
    out.history.emplace_back(it, best);
  }
  for (const auto& [it, cost] : fine.history) {
    if (it == 0) continue;
    best = std::min(best, cost);
    out.history.emplace_back(coarse.iterations + it, best);
  }
  return out;
}

}  // namespace

void FitWeights::validate() const {
  for (const double w : {passband, stopband, tz_boost}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("fit weights must be nonnegative");
  }
  if (passband == 0.0 && stopband == 0.0) throw DomainError("fit weights are all zero");
}

double FitWeights::at(const FrequencyPlan& plan, double f_hz) const {
  double w = std::abs(normalized_frequency(plan, f_hz)) <= 1.0 ? passband : stopband;
  for (const double fz : tz_freqs_hz) {
    if (std::abs(f_hz - fz) <= 0.02 * fz) {
      w *= tz_boost;
      break;
    }
  }
  return w;
}

EntryBounds EntryBounds::uniform(int order, double limit) {
  const int n = order + 2;
  return {Eigen::MatrixXd::Constant(n, n, -limit), Eigen::MatrixXd::Constant(n, n, limit)};
}

double response_error(const CouplingMatrix& m, const FrequencyPlan& plan,
                      const SParamSweep& target, const FitWeights& weights) {
  const PreparedTarget t = prepare(plan, target, weights);
  return residual_vector(m, t).squaredNorm();
}

SParamSweep target_sweep(const CharPoly& cp, const FrequencyPlan& plan) {
  std::vector<double> grid;
  for (int k = 0; k <= 300; ++k) grid.push_back(denormalize_tz(plan, -3.0 + 0.02 * k));
  return sparams(transversal_matrix(cp), plan, grid);
}

FitResult fit_matrix(const FitProblem& problem, const FitOptions& options) {
  const EntryBounds bounds = problem.bounds.value_or(EntryBounds::uniform(problem.initial.order()));
  check_problem(problem, bounds);
  if (options.multistart_count < 1) throw DomainError("multistart count must be >= 1");
  if (!(options.tol >= 0.0)) throw DomainError("fit tolerance must be nonnegative");

  const SParamSweep target = std::visit(
      [&](const auto& t) -> SParamSweep {
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, CharPoly>) {
          return target_sweep(t, problem.plan);
        } else {
          return t;
        }
      },
      problem.target);
  const PreparedTarget prepared = prepare(problem.plan, target, problem.weights);

  // The overall sign of S21 is a port-2 reference convention that sign
  // normalization may have flipped; negating the load row flips it back
  // without leaving the mask.
  CouplingMatrix base = problem.initial;
  if (options.align_s21_sign) {
    const int l = base.load();
    CouplingMatrix flipped = base;
    bool inside = true;
    for (int k = 0; k < l; ++k) {
      const double v = 0.0 - base(k, l);
      flipped.set(k, l, v);
      inside = inside && v >= bounds.lo(k, l) && v <= bounds.hi(k, l);
    }
    if (inside && residual_vector(flipped, prepared).squaredNorm() <
        residual_vector(base, prepared).squaredNorm()) {
      base = flipped;
    }
  }

  const Parameterization param(problem.mask);
  const ResidualFn residuals = [&](const Eigen::VectorXd& x) {
    return residual_vector(param.apply(base, x), prepared);
  };
  Bounds box;
  box.lo.resize(static_cast<Eigen::Index>(param.entries.size()));
  box.hi.resize(box.lo.size());
  for (std::size_t k = 0; k < param.entries.size(); ++k) {
    const auto [i, j] = param.entries[k];
    box.lo[static_cast<Eigen::Index>(k)] = bounds.lo(i, j);
    box.hi[static_cast<Eigen::Index>(k)] = bounds.hi(i, j);
  }

  const Eigen::VectorXd x_init = param.extract(base);
  FitResult result{base, residuals(x_init).squaredNorm(), 0, false, {}, options.seed, 0};
  result.history.emplace_back(0, result.cost);
  if (result.cost <= options.tol) {
    result.converged = true;
    return result;
  }

  // Jittered starting points are drawn up front so the outcome does not
  // depend on how the starts are scheduled.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Eigen::VectorXd> starts{x_init};
  for (int s = 1; s < options.multistart_count; ++s) {
    Eigen::VectorXd x = x_init;
    for (auto& v : x) v = v * (1.0 + options.jitter * unit(rng)) + 0.2 * options.jitter * unit(rng);
    starts.push_back(box.clamp(x));
  }

  std::vector<StartOutcome> outcomes(starts.size());
  outcomes[0] = run_start(residuals, starts[0], box, options);
  if (outcomes[0].cost > options.tol && starts.size() > 1) {
    parallel_for(starts.size() - 1, [&](std::size_t k) {
      outcomes[k + 1] = run_start(residuals, starts[k + 1], box, options);
    }, 1);
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < outcomes.size(); ++k) {
    if (outcomes[k].cost < outcomes[best].cost) best = k;
  }
  const StartOutcome& win = outcomes[best];
  if (win.cost < result.cost) {
    result.matrix = param.apply(base, win.x);
    result.cost = win.cost;
  }
  result.iterations = win.iterations;
  result.history = win.history;
  result.start = static_cast<int>(best);
  result.converged = result.cost <= options.tol;
  return result;
}

}  // namespace xcoupler

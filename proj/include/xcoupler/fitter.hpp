#pragma once

#include "xcoupler/coupling_matrix.hpp"
#include "xcoupler/prototype.hpp"
#include "xcoupler/response.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace xcoupler {

// Per-point weights for response_error. Points with |Omega| <= 1 take
// passband, the rest stopband; points within +-2% of any tz_freqs_hz entry
// are further multiplied by tz_boost.
struct FitWeights {
  double passband = 1.0;
  double stopband = 1.0;
  double tz_boost = 1.0;
  std::vector<double> tz_freqs_hz;

  void validate() const;
  double at(const FrequencyPlan& plan, double f_hz) const;
};

// Per-entry box constraints on fitted couplings.
struct EntryBounds {
  Eigen::MatrixXd lo;
  Eigen::MatrixXd hi;

  static EntryBounds uniform(int order, double limit = 3.0);
};

struct FitProblem {
  TopologyMask mask;
  CouplingMatrix initial;
  FrequencyPlan plan;
  std::variant<SParamSweep, CharPoly> target;
  FitWeights weights;
  std::optional<EntryBounds> bounds;  // +-3 when absent
};

struct FitOptions {
  int max_iters = 5000;  // per start
  double tol = 1e-10;
  int multistart_count = 8;
  std::uint64_t seed = 0;
  double jitter = 0.05;  // relative perturbation of jittered starts
  // Start from the initial matrix with its load row negated when that fits
  // the target better (S21 sign is a port-2 reference convention).
  bool align_s21_sign = true;
};

struct FitResult {
  CouplingMatrix matrix;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> history;  // (iteration, best-so-far cost)
  std::uint64_t seed = 0;
  int start = 0;  // index of the winning start
};

// Weighted mean of |S11_model - S11_target|^2 + |S21_model - S21_target|^2
// with the lossless model of m evaluated on the target grid.
double response_error(const CouplingMatrix& m, const FrequencyPlan& plan,
                      const SParamSweep& target, const FitWeights& weights = {});

// Sweep used when a fit targets polynomials: the transversal realization
// evaluated on 301 points of Omega in [-3, 3].
SParamSweep target_sweep(const CharPoly& cp, const FrequencyPlan& plan);

// Fits the mask-permitted entries of problem.initial to the target.
// Start 0 is the initial matrix itself; only when it fails to reach tol are
// the remaining seeded, jittered starts run (in parallel) and the lowest
// cost kept, ties going to the lower start index. Non-convergence is
// reported through FitResult::converged, never thrown.
FitResult fit_matrix(const FitProblem& problem, const FitOptions& options = {});

}  // namespace xcoupler

#pragma once

#include "xcoupler/coupling_matrix.hpp"
#include "xcoupler/prototype.hpp"
#include "xcoupler/response.hpp"

#include <array>
#include <cmath>
#include <random>

namespace fixtures {

using namespace xcoupler;

inline FrequencyPlan plan1() { return FrequencyPlan(3.26e9, 1.15e9); }
inline FrequencyPlan plan2() { return FrequencyPlan(3.35e9, 1.575e9); }

inline constexpr double kTz1Hz = 4.15e9;
inline constexpr double kTz2Hz = 4.5e9;
inline constexpr double kSpurHz = 6.0e9;

// The printed order-4 box matrix, symmetric reading.
inline CouplingMatrix printed_m1() {
  CouplingMatrix m(4);
  m.set(0, 1, 1.03);
  m.set(3, 5, 1.03);
  m.set(1, 2, 0.816);
  m.set(2, 3, 0.816);
  m.set(1, 4, -0.402);
  m.set(3, 4, 0.402);
  m.set(1, 1, 0.07);
  m.set(3, 3, 0.07);
  m.set(2, 2, 0.378);
  m.set(4, 4, -0.949);
  return m;
}

// Design synthesized from (order 4, RL 20 dB, one zero at tz_hz) and
// reconfigured onto the box topology.
inline CouplingMatrix design_matrix(const FrequencyPlan& plan, double tz_hz) {
  const std::array<double, 1> tz{normalized_frequency(plan, tz_hz)};
  return reconfigure(transversal_matrix(synthesize_polynomials(4, 20.0, tz)),
                     TopologyMask::fig7());
}

// Every nonzero entry scaled by an independent uniform factor in
// [1 - rel, 1 + rel].
inline CouplingMatrix perturb(const CouplingMatrix& m, double rel, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-rel, rel);
  CouplingMatrix out = m;
  for (int i = 0; i < m.size(); ++i) {
    for (int j = i; j < m.size(); ++j) {
      if (m(i, j) != 0.0) out.set(i, j, m(i, j) * (1.0 + u(rng)));
    }
  }
  return out;
}

// Adds a spurious resonance (Q = 1000) whose center is tuned so that the
// combined |S21| rises through -20 dB at the grid point nearest onset_hz.
inline void inject_spurious(SParamSweep& sweep, double onset_hz) {
  constexpr double q = 1000.0;
  const double threshold = 0.1;
  const std::size_t k = nearest_index(sweep.freqs_hz, onset_hz);
  const double fk = sweep.freqs_hz[k];
  const auto spur = [&](double f, double fc) { return 1.0 / cplx(1.0, 2.0 * q * (f - fc) / fc); };
  double lo = fk, hi = 1.05 * fk;  // combined level above / below threshold
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(sweep.s[k].s21 + spur(fk, mid)) > threshold) lo = mid;
    else hi = mid;
  }
  const double fc = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const cplx add = spur(sweep.freqs_hz[i], fc);
    sweep.s[i].s21 += add;
    sweep.s[i].s12 += add;
  }
}

}  // namespace fixtures

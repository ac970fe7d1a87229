#pragma once

#include "xcoupler/coupling_matrix.hpp"
#include "xcoupler/response.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xcoupler {

// Figures of merit read off a two-port sweep. fbw and sfr_pct are
// fractions (0.54 means 54 %).
struct BandMetrics {
  double f_lo = 0.0;
  double f_hi = 0.0;
  double bw = 0.0;
  double fbw = 0.0;
  double rl_min_db = 0.0;
  std::vector<double> tz_freqs;
  std::optional<double> f_spur;
  std::optional<double> sfr_hz;
  std::optional<double> sfr_pct;
};

struct ExtractionReport {
  std::optional<double> k;
  std::optional<double> m_normalized;
  std::optional<double> q_ext;
  std::optional<double> q_u;
  std::string diagnostics;
};

enum class SplitFormula {
  // (f_b - f_a) / sqrt(f_a f_b): exact inverse of the lowpass mapping for
  // two synchronously tuned resonators, so normalize_coupling recovers M.
  kBandpassMapped,
  // (f_b^2 - f_a^2) / (f_b^2 + f_a^2): lumped coupled-resonator form,
  // agrees with the above to first order in the split.
  kSquaredRatio,
};

// Coupling coefficient from the even/odd resonance split. Symmetric in its
// arguments and invariant to a common frequency scale.
double extract_k_even_odd(double f_even_hz, double f_odd_hz,
                          SplitFormula formula = SplitFormula::kBandpassMapped);

// M = (f0/bw) k and its inverse.
double normalize_coupling(const FrequencyPlan& plan, double k);
double denormalize_coupling(const FrequencyPlan& plan, double m);

// The two |S21| maxima of a weakly loaded coupled pair, refined by a
// three-point parabola in dB; f_a < f_b. Maxima count only if their
// prominence reaches prominence_db.
std::pair<double, double> find_even_odd_peaks(const SParamSweep& sweep,
                                              double prominence_db = 6.0);

// Q_ext = pi f0 tau_peak / 2 from the S11 group-delay peak of a singly
// terminated resonator.
double extract_qext_group_delay(const SParamSweep& sweep, double f0_hz);

// Q_ext = f0 / (M_S1^2 bw). The square is required for the 2.672 / 2.005
// design values to come out of M_S1 = 1.03.
double qext_from_matrix(const FrequencyPlan& plan, double m_s1);

// Uniform unloaded Q for which the lossy model of m reproduces the sweep's
// midband insertion loss (bisection on log Q over [10, 1e7], 0.1 %).
double extract_qu(const SParamSweep& sweep, const CouplingMatrix& m,
                  const FrequencyPlan& plan);

// Model midband insertion loss at the sweep point nearest f0 for a given Q.
double model_insertion_loss(const SParamSweep& sweep, const CouplingMatrix& m,
                            const FrequencyPlan& plan, const LossSpec& loss);

enum class EdgeCriterion {
  kReturnLoss,     // return loss falls below edge_rl_db
  kInsertionDrop,  // |S21| falls edge_drop_db below its midband value
};

struct BandMetricsOptions {
  EdgeCriterion criterion = EdgeCriterion::kReturnLoss;
  double edge_rl_db = 19.5;
  double edge_drop_db = 3.0;
  double spur_threshold_db = -20.0;
  // An upward threshold crossing is a spurious band only if |S21| then
  // climbs to this level before dropping back; stopband ripple lobes that
  // graze the threshold are not spurious bands.
  double spur_peak_db = -10.0;
  double tz_floor_db = -40.0;
};

// Band edges (walking outward from f0, linear interpolation in dB), worst
// in-band return loss, out-of-band |S21| nulls and the spurious-free range
// measured from f_hi.
BandMetrics band_metrics(const SParamSweep& sweep, const FrequencyPlan& plan,
                         const BandMetricsOptions& options = {});

}  // namespace xcoupler

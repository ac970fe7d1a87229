#pragma once

#include "xcoupler/coupling_matrix.hpp"

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace xcoupler {

using cplx = std::complex<double>;

// Center frequency and absolute bandwidth that define the lowpass
// normalization. Fractional bandwidth is always derived.
class FrequencyPlan {
 public:
  // Throws DomainError unless f0 > 0 and 0 < bw < 2*f0.
  FrequencyPlan(double f0_hz, double bw_hz);

  double f0() const noexcept { return f0_; }
  double bw() const noexcept { return bw_; }
  double fbw() const noexcept { return bw_ / f0_; }

  friend bool operator==(const FrequencyPlan&, const FrequencyPlan&) = default;

 private:
  double f0_;
  double bw_;
};

// Uniform unloaded Q applied to every resonator; absent means lossless.
struct LossSpec {
  std::optional<double> qu;

  static LossSpec lossless() { return {}; }
  static LossSpec with_qu(double qu);
  bool finite() const noexcept { return qu.has_value(); }
};

// Two-port scattering matrix at one frequency.
struct SParam2 {
  cplx s11, s21, s12, s22;
};

// Frequency-ordered two-port data.
struct SParamSweep {
  std::vector<double> freqs_hz;
  std::vector<SParam2> s;
  double z_ref = 50.0;

  std::size_t size() const noexcept { return freqs_hz.size(); }
  bool empty() const noexcept { return freqs_hz.empty(); }
  // Throws DomainError on unordered frequencies, nonpositive frequencies,
  // size mismatch or non-finite entries.
  void validate() const;
};

enum class SParamKind { S11, S21, S12, S22 };
cplx pick(const SParam2& p, SParamKind which);

// Omega = (f0/bw) * (f/f0 - f0/f).
double normalized_frequency(const FrequencyPlan& plan, double f_hz);
// Positive root of the inverse mapping; denormalize_tz(plan, 0) == f0.
double denormalize_tz(const FrequencyPlan& plan, double omega);
// Band edges where Omega = -1 and +1.
std::pair<double, double> band_edges(const FrequencyPlan& plan);

// Response of m at one normalized frequency. resonator_loss is the
// conductance added as -j*g on every resonator diagonal (0 when lossless).
// freq_hz only labels a SingularNetworkError.
SParam2 response_at(const CouplingMatrix& m, double omega,
                    double resonator_loss = 0.0, double freq_hz = 0.0);

// Loss conductance f0/(bw*qu) for the plan, 0 when lossless.
double resonator_loss(const FrequencyPlan& plan, const LossSpec& loss);

// S-parameters of m over grid. Runs in parallel across frequencies (see
// XCOUPLER_THREADS); the result does not depend on the thread count.
SParamSweep sparams(const CouplingMatrix& m, const FrequencyPlan& plan,
                    std::span<const double> grid_hz,
                    const LossSpec& loss = LossSpec::lossless());

// Uniform grid of n points over [start, stop].
std::vector<double> linear_grid(double start_hz, double stop_hz, std::size_t n);
// 1001 points over [f0 - 1.5 bw, f0 + 1.5 bw], clipped to stay positive.
std::vector<double> default_grid(const FrequencyPlan& plan, std::size_t n = 1001);

// Unwrapped phase in radians.
std::vector<double> unwrapped_phase(const SParamSweep& sweep, SParamKind which);

// tau = -(1/2pi) d(phase)/df, central differences (one-sided at the ends).
std::vector<double> group_delay(const SParamSweep& sweep, SParamKind which);

enum class InsertionLossMode {
  kCenter,       // grid point nearest f0
  kBandAverage,  // mean of |S21|^2 over [f_lo, f_hi], in dB
  kBandMinimum,  // smallest loss inside [f_lo, f_hi]
};

// -20 log10 |S21| in dB at midband (see InsertionLossMode).
double midband_insertion_loss(const SParamSweep& sweep, const FrequencyPlan& plan,
                              InsertionLossMode mode = InsertionLossMode::kCenter);

// Index of the grid point nearest f.
std::size_t nearest_index(std::span<const double> freqs_hz, double f);

double to_db(double magnitude);

}  // namespace xcoupler

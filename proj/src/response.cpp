#include "xcoupler/response.hpp"

#include "xcoupler/error.hpp"
#include "xcoupler/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace xcoupler {

namespace {

constexpr cplx kJ{0.0, 1.0};

std::string hz_text(double f) {
  std::ostringstream os;
  os.precision(9);
  os << f << " Hz";
  return os.str();
}

}  // namespace

FrequencyPlan::FrequencyPlan(double f0_hz, double bw_hz) : f0_(f0_hz), bw_(bw_hz) {
  if (!(std::isfinite(f0_hz) && f0_hz > 0.0)) {
    throw DomainError("center frequency must be positive");
  }
  if (!(std::isfinite(bw_hz) && bw_hz > 0.0 && bw_hz < 2.0 * f0_hz)) {
    throw DomainError("bandwidth must satisfy 0 < bw < 2*f0");
  }
}

LossSpec LossSpec::with_qu(double qu) {
  if (!(qu > 0.0) || std::isnan(qu)) throw DomainError("unloaded Q must be positive");
  if (std::isinf(qu)) return {};
  return LossSpec{qu};
}

void SParamSweep::validate() const {
  if (freqs_hz.size() != s.size()) {
    throw DomainError("sweep frequency and data lengths differ");
  }
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    if (!(freqs_hz[i] > 0.0) || !std::isfinite(freqs_hz[i])) {
      throw DomainError("sweep frequencies must be positive and finite");
    }
    if (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1])) {
      throw DomainError("sweep frequencies must be strictly increasing (at " +
                        hz_text(freqs_hz[i]) + ")");
    }
    for (const cplx v : {s[i].s11, s[i].s21, s[i].s12, s[i].s22}) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw DomainError("non-finite S-parameter at " + hz_text(freqs_hz[i]));
      }
    }
  }
  if (!(z_ref > 0.0)) throw DomainError("reference impedance must be positive");
}

cplx pick(const SParam2& p, SParamKind which) {
  switch (which) {
    case SParamKind::S11: return p.s11;
    case SParamKind::S21: return p.s21;
    case SParamKind::S12: return p.s12;
    case SParamKind::S22: return p.s22;
  }
  return {};
}

double normalized_frequency(const FrequencyPlan& plan, double f_hz) {
  if (!(f_hz > 0.0)) throw DomainError("frequency must be positive");
  return (plan.f0() / plan.bw()) * (f_hz / plan.f0() - plan.f0() / f_hz);
}

double denormalize_tz(const FrequencyPlan& plan, double omega) {
  // x - 1/x = a with x = f/f0; pick the positive root in a cancellation-free form.
  const double a = omega * plan.fbw();
  const double root = std::sqrt(a * a + 4.0);
  const double x = a >= 0.0 ? 0.5 * (a + root) : 2.0 / (root - a);
  return plan.f0() * x;
}

std::pair<double, double> band_edges(const FrequencyPlan& plan) {
  return {denormalize_tz(plan, -1.0), denormalize_tz(plan, 1.0)};
}

SParam2 response_at(const CouplingMatrix& m, double omega, double resonator_loss,
                    double freq_hz) {
  const int n = m.size();
  Eigen::MatrixXcd a = m.values().cast<cplx>();
  for (int k = 1; k <= m.order(); ++k) a(k, k) += omega - kJ * resonator_loss;
  a(0, 0) -= kJ;
  a(n - 1, n - 1) -= kJ;

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  // The rcond estimate can miss an exactly zero pivot, so check both.
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (!(lu.rcond() > 1e-14) || !(pivots.minCoeff() > 1e-14 * pivots.maxCoeff())) {
    throw SingularNetworkError("network matrix is singular at " + hz_text(freq_hz) +
                                   " (omega = " + std::to_string(omega) + ")",
                               freq_hz);
  }
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, 2);
  rhs(0, 0) = 1.0;
  rhs(n - 1, 1) = 1.0;
  const Eigen::MatrixXcd x = lu.solve(rhs);

  SParam2 out;
  out.s11 = 1.0 + 2.0 * kJ * x(0, 0);
  out.s21 = -2.0 * kJ * x(n - 1, 0);
  out.s22 = 1.0 + 2.0 * kJ * x(n - 1, 1);
  out.s12 = out.s21;
  return out;
}

double resonator_loss(const FrequencyPlan& plan, const LossSpec& loss) {
  return loss.finite() ? plan.f0() / (plan.bw() * *loss.qu) : 0.0;
}

SParamSweep sparams(const CouplingMatrix& m, const FrequencyPlan& plan,
                    std::span<const double> grid_hz, const LossSpec& loss) {
  SParamSweep sweep;
  sweep.freqs_hz.assign(grid_hz.begin(), grid_hz.end());
  sweep.s.resize(grid_hz.size());
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (!(grid_hz[i] > 0.0)) throw DomainError("grid frequencies must be positive");
    if (i > 0 && !(grid_hz[i] > grid_hz[i - 1])) {
      throw DomainError("grid must be strictly increasing");
    }
  }
  const double g = resonator_loss(plan, loss);
  parallel_for(grid_hz.size(), [&](std::size_t i) {
    const double f = grid_hz[i];
    sweep.s[i] = response_at(m, normalized_frequency(plan, f), g, f);
  });
  return sweep;
}

std::vector<double> linear_grid(double start_hz, double stop_hz, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {start_hz};
  if (!(stop_hz > start_hz)) throw DomainError("grid stop must exceed start");
  std::vector<double> out(n);
  const double step = (stop_hz - start_hz) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = start_hz + step * static_cast<double>(i);
  out.back() = stop_hz;
  return out;
}

std::vector<double> default_grid(const FrequencyPlan& plan, std::size_t n) {
  const double lo = std::max(plan.f0() - 1.5 * plan.bw(), 1e-3 * plan.f0());
  return linear_grid(lo, plan.f0() + 1.5 * plan.bw(), n);
}

std::vector<double> unwrapped_phase(const SParamSweep& sweep, SParamKind which) {
  std::vector<double> phase(sweep.size());
  double offset = 0.0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const double raw = std::arg(pick(sweep.s[i], which));
    if (i > 0) {
      const double jump = raw + offset - phase[i - 1];
      offset -= 2.0 * std::numbers::pi * std::round(jump / (2.0 * std::numbers::pi));
    }
    phase[i] = raw + offset;
  }
  return phase;
}

std::vector<double> group_delay(const SParamSweep& sweep, SParamKind which) {
  const std::size_t n = sweep.size();
  if (n < 3) throw DomainError("group delay needs at least 3 frequency points");
  const auto phase = unwrapped_phase(sweep, which);
  const auto& f = sweep.freqs_hz;
  const double k = -1.0 / (2.0 * std::numbers::pi);
  std::vector<double> tau(n);
  tau[0] = k * (phase[1] - phase[0]) / (f[1] - f[0]);
  tau[n - 1] = k * (phase[n - 1] - phase[n - 2]) / (f[n - 1] - f[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    tau[i] = k * (phase[i + 1] - phase[i - 1]) / (f[i + 1] - f[i - 1]);
  }
  return tau;
}

std::size_t nearest_index(std::span<const double> freqs_hz, double f) {
  if (freqs_hz.empty()) throw DomainError("empty frequency grid");
  const auto it = std::lower_bound(freqs_hz.begin(), freqs_hz.end(), f);
  if (it == freqs_hz.begin()) return 0;
  if (it == freqs_hz.end()) return freqs_hz.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - freqs_hz.begin());
  return (f - freqs_hz[hi - 1] <= freqs_hz[hi] - f) ? hi - 1 : hi;
}

double to_db(double magnitude) { return 20.0 * std::log10(magnitude); }

double midband_insertion_loss(const SParamSweep& sweep, const FrequencyPlan& plan,
                              InsertionLossMode mode) {
  if (sweep.empty() || plan.f0() < sweep.freqs_hz.front() ||
      plan.f0() > sweep.freqs_hz.back()) {
    throw DomainError("plan center frequency lies outside the sweep");
  }
  if (mode == InsertionLossMode::kCenter) {
    return std::max(0.0, -to_db(std::abs(sweep.s[nearest_index(sweep.freqs_hz, plan.f0())].s21)));
  }
  const auto [lo, hi] = band_edges(plan);
  double sum = 0.0;
  double best = INFINITY;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (sweep.freqs_hz[i] < lo || sweep.freqs_hz[i] > hi) continue;
    const double mag2 = std::norm(sweep.s[i].s21);
    sum += mag2;
    best = std::min(best, -10.0 * std::log10(mag2));
    ++count;
  }
  if (count == 0) throw DomainError("no sweep points inside the passband");
  if (mode == InsertionLossMode::kBandMinimum) return std::max(0.0, best);
  return std::max(0.0, -10.0 * std::log10(sum / static_cast<double>(count)));
}

}  // namespace xcoupler

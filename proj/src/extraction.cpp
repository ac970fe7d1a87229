#include "xcoupler/extraction.hpp"

#include "xcoupler/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace xcoupler {

namespace {

std::vector<double> magnitude_db(const SParamSweep& sweep, SParamKind which) {
  std::vector<double> out(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) out[i] = to_db(std::abs(pick(sweep.s[i], which)));
  return out;
}

// Vertex of the parabola through three (x, y) points; returns the middle
// point when the three are collinear.
std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1,
                                          double x2, double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a == 0.0 || !std::isfinite(a)) return {x1, y1};
  const double b = d01 - a * (x0 + x1);
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  return {xv, y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1)};
}

double crossing(double x0, double y0, double x1, double y1, double level) {
  if (y1 == y0) return x0;
  return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

}  // namespace

double extract_k_even_odd(double f_even_hz, double f_odd_hz, SplitFormula formula) {
  if (!(f_even_hz > 0.0) || !(f_odd_hz > 0.0)) {
    throw DomainError("even/odd resonance frequencies must be positive");
  }
  const double fa = std::min(f_even_hz, f_odd_hz);
  const double fb = std::max(f_even_hz, f_odd_hz);
  if (formula == SplitFormula::kSquaredRatio) {
    return (fb * fb - fa * fa) / (fb * fb + fa * fa);
  }
  return (fb - fa) / std::sqrt(fa * fb);
}

double normalize_coupling(const FrequencyPlan& plan, double k) {
  return k * plan.f0() / plan.bw();
}

double denormalize_coupling(const FrequencyPlan& plan, double m) {
  return m * plan.bw() / plan.f0();
}

std::pair<double, double> find_even_odd_peaks(const SParamSweep& sweep, double prominence_db) {
  if (sweep.size() < 3) throw DomainError("peak search needs at least 3 points");
  const auto y = magnitude_db(sweep, SParamKind::S21);
  const auto& f = sweep.freqs_hz;
  const std::size_t n = y.size();

  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // Prominence: drop to the lowest point before reaching higher ground on
    // each side (or the sweep end).
    double left_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = y[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    if (y[i] - std::max(left_min, right_min) >= prominence_db) peaks.push_back(i);
  }
  if (peaks.size() != 2) {
    std::ostringstream msg;
    msg << "expected exactly two |S21| peaks with " << prominence_db
        << " dB prominence, found " << peaks.size()
        << " (check that the I/O couplings are weak)";
    throw DomainError(msg.str());
  }
  auto refine = [&](std::size_t i) {
    return parabola_vertex(f[i - 1], y[i - 1], f[i], y[i], f[i + 1], y[i + 1]).first;
  };
  return {refine(peaks[0]), refine(peaks[1])};
}

double extract_qext_group_delay(const SParamSweep& sweep, double f0_hz) {
  if (!(f0_hz > 0.0)) throw DomainError("center frequency must be positive");
  const auto tau = group_delay(sweep, SParamKind::S11);
  const auto it = std::max_element(tau.begin(), tau.end());
  const auto i = static_cast<std::size_t>(it - tau.begin());
  if (!(*it > 0.0)) {
    throw DomainError("no resonant group-delay peak in S11 (delay is flat or negative)");
  }
  if (i == 0 || i + 1 == tau.size()) {
    throw DomainError("S11 group-delay peak lies on the sweep boundary; widen the window");
  }
  const auto& f = sweep.freqs_hz;
  const double peak = parabola_vertex(f[i - 1], tau[i - 1], f[i], tau[i], f[i + 1], tau[i + 1]).second;
  return std::numbers::pi * f0_hz * peak / 2.0;
}

double qext_from_matrix(const FrequencyPlan& plan, double m_s1) {
  if (m_s1 == 0.0 || !std::isfinite(m_s1)) {
    throw DomainError("input coupling M_S1 must be nonzero");
  }
  return plan.f0() / (m_s1 * m_s1 * plan.bw());
}

double model_insertion_loss(const SParamSweep& sweep, const CouplingMatrix& m,
                            const FrequencyPlan& plan, const LossSpec& loss) {
  const double f = sweep.freqs_hz[nearest_index(sweep.freqs_hz, plan.f0())];
  const SParam2 s = response_at(m, normalized_frequency(plan, f), resonator_loss(plan, loss), f);
  return -to_db(std::abs(s.s21));
}

double extract_qu(const SParamSweep& sweep, const CouplingMatrix& m, const FrequencyPlan& plan) {
  const double il = midband_insertion_loss(sweep, plan);
  if (!(il > 0.0)) {
    throw DomainError("no finite Q_U: midband insertion loss is not positive");
  }
  constexpr double kQLo = 10.0;
  constexpr double kQHi = 1e7;
  const auto model = [&](double q) {
    return model_insertion_loss(sweep, m, plan, LossSpec::with_qu(q));
  };
  if (il <= model(kQHi)) {
    throw DomainError("no finite Q_U: insertion loss is at or below the lossless model");
  }
  if (il > model(kQLo)) {
    std::ostringstream msg;
    msg << "insertion loss " << il << " dB exceeds what the model reaches at Q_U = " << kQLo;
    throw DomainError(msg.str());
  }
  double lo = std::log(kQLo);  // model loss above il
  double hi = std::log(kQHi);  // model loss below il
  while (hi - lo > std::log1p(1e-3)) {
    const double mid = 0.5 * (lo + hi);
    if (model(std::exp(mid)) > il) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

BandMetrics band_metrics(const SParamSweep& sweep, const FrequencyPlan& plan,
                         const BandMetricsOptions& options) {
  if (sweep.size() < 3) throw DomainError("band metrics need at least 3 points");
  const auto& f = sweep.freqs_hz;
  if (plan.f0() < f.front() || plan.f0() > f.back()) {
    throw DomainError("plan center frequency lies outside the sweep");
  }
  const auto s21 = magnitude_db(sweep, SParamKind::S21);
  const auto s11 = magnitude_db(sweep, SParamKind::S11);
  const std::size_t n = f.size();
  const std::size_t ic = nearest_index(f, plan.f0());

  // inside(i): point i belongs to the passband.
  std::vector<double> metric;
  double level = 0.0;
  if (options.criterion == EdgeCriterion::kReturnLoss) {
    for (double v : s11) metric.push_back(-v);
    level = options.edge_rl_db;
  } else {
    metric = s21;
    level = s21[ic] - options.edge_drop_db;
  }
  if (!(metric[ic] >= level)) {
    throw DomainError("sweep center does not meet the band-edge criterion");
  }
  std::size_t hi = ic;
  while (hi + 1 < n && metric[hi + 1] >= level) ++hi;
  std::size_t lo = ic;
  while (lo > 0 && metric[lo - 1] >= level) --lo;
  if (lo == 0 || hi + 1 == n) {
    throw DomainError("band edges not found within the sweep");
  }

  BandMetrics out;
  out.f_lo = crossing(f[lo - 1], metric[lo - 1], f[lo], metric[lo], level);
  out.f_hi = crossing(f[hi], metric[hi], f[hi + 1], metric[hi + 1], level);
  out.bw = out.f_hi - out.f_lo;
  out.fbw = out.bw / plan.f0();

  // Worst match over the detected band clipped to the nominal one; under the
  // return-loss criterion the detected edges sit at edge_rl_db by definition.
  const auto [nom_lo, nom_hi] = band_edges(plan);
  out.rl_min_db = INFINITY;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (f[i] >= nom_lo && f[i] <= nom_hi) out.rl_min_db = std::min(out.rl_min_db, -s11[i]);
  }
  if (std::isinf(out.rl_min_db)) {
    for (std::size_t i = lo; i <= hi; ++i) out.rl_min_db = std::min(out.rl_min_db, -s11[i]);
  }

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (f[i] >= out.f_lo && f[i] <= out.f_hi) continue;
    if (s21[i] < options.tz_floor_db && s21[i] < s21[i - 1] && s21[i] <= s21[i + 1]) {
      out.tz_freqs.push_back(f[i]);
    }
  }

  const double thr = options.spur_threshold_db;
  for (std::size_t i = hi + 1; i < n; ++i) {
    if (!(s21[i - 1] < thr && s21[i] >= thr)) continue;
    double peak = s21[i];
    for (std::size_t k = i; k < n && s21[k] >= thr; ++k) peak = std::max(peak, s21[k]);
    if (peak < options.spur_peak_db) continue;
    out.f_spur = crossing(f[i - 1], s21[i - 1], f[i], s21[i], thr);
    out.sfr_hz = *out.f_spur - out.f_hi;
    out.sfr_pct = *out.sfr_hz / out.f_hi;
    break;
  }
  return out;
}

}  // namespace xcoupler

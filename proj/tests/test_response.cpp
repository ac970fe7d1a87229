#include "xcoupler/error.hpp"
#include "xcoupler/response.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <numbers>

using namespace xcoupler;
using fixtures::plan1;
using fixtures::plan2;

TEST(FrequencyPlan, Validation) {
  EXPECT_THROW(FrequencyPlan(0.0, 1.0), DomainError);
  EXPECT_THROW(FrequencyPlan(1.0, 0.0), DomainError);
  EXPECT_THROW(FrequencyPlan(1.0, 2.0), DomainError);
  EXPECT_NEAR(plan1().fbw(), 0.352761, 1e-6);
}

TEST(Mapping, NormalizedFrequency) {
  EXPECT_EQ(normalized_frequency(plan1(), 3.26e9), 0.0);
  EXPECT_NEAR(normalized_frequency(plan1(), 4.15e9), 1.3819, 1e-4);
  EXPECT_THROW(normalized_frequency(plan1(), 0.0), DomainError);
}

TEST(Mapping, BandEdgesSpanBandwidth) {
  for (const FrequencyPlan& p : {plan1(), plan2(), FrequencyPlan(1e9, 1.9e9)}) {
    const auto [lo, hi] = band_edges(p);
    EXPECT_NEAR(hi - lo, p.bw(), 1e-6);
    EXPECT_NEAR(normalized_frequency(p, lo), -1.0, 1e-12);
    EXPECT_NEAR(normalized_frequency(p, hi), 1.0, 1e-12);
    EXPECT_NEAR(lo * hi, p.f0() * p.f0(), 1e-12 * p.f0() * p.f0());
  }
}

TEST(Mapping, DenormalizeInvertsMapping) {
  EXPECT_NEAR(denormalize_tz(plan1(), 1.3819), 4.15e9, 1e6);
  EXPECT_EQ(denormalize_tz(plan1(), 0.0), 3.26e9);
  EXPECT_EQ(denormalize_tz(plan2(), 0.0), 3.35e9);
  for (double w : {-1e6, -40.0, -2.5, -1.0, -1e-9, 1e-9, 0.3, 1.0, 4.0, 1e6}) {
    const double f = denormalize_tz(plan2(), w);
    EXPECT_GT(f, 0.0);
    EXPECT_NEAR(normalized_frequency(plan2(), f), w, 1e-9 * std::max(1.0, std::abs(w)));
  }
}

TEST(ResponseAt, SingleResonatorHandInversion) {
  CouplingMatrix m(1);
  m.set(0, 1, 0.9);
  m.set(1, 2, 0.9);
  m.set(1, 1, 0.25);
  for (double w = -3.0; w <= 3.0; w += 0.1) {
    const auto want = oracle::single_resonator(0.9, 0.25, w);
    const SParam2 s = response_at(m, w);
    EXPECT_NEAR(std::abs(s.s11 - want.s11), 0.0, 1e-14) << w;
    EXPECT_NEAR(std::abs(s.s21 - want.s21), 0.0, 1e-14) << w;
    EXPECT_EQ(s.s12, s.s21);
    EXPECT_NEAR(std::abs(s.s22 - s.s11), 0.0, 1e-14);
  }
}

TEST(ResponseAt, SinglyLoadedResonator) {
  CouplingMatrix m(1);
  m.set(0, 1, 0.6);
  for (double w : {-2.0, -0.1, 0.0, 0.05, 1.0}) {
    EXPECT_NEAR(std::abs(response_at(m, w).s11 - oracle::singly_loaded_s11(0.6, w)), 0.0,
                1e-14);
    EXPECT_EQ(std::abs(response_at(m, w).s21), 0.0);
  }
}

TEST(ResponseAt, SingularNetworkReportsFrequency) {
  // Resonator 2 hangs off nothing, so A is singular where Omega = 0.
  CouplingMatrix m(2);
  m.set(0, 1, 1.0);
  m.set(1, 3, 1.0);
  try {
    response_at(m, 0.0, 0.0, 3.26e9);
    FAIL() << "expected SingularNetworkError";
  } catch (const SingularNetworkError& e) {
    EXPECT_EQ(e.freq_hz(), 3.26e9);
    EXPECT_NE(std::string(e.what()).find("3.26"), std::string::npos);
  }
}

TEST(Sparams, PrintedDesignReference) {
  std::vector<double> grid = linear_grid(2.0e9, 5.0e9, 3001);
  const SParamSweep s = sparams(fixtures::printed_m1(), plan1(), grid);
  EXPECT_EQ(s.size(), 3001u);
  double worst = -1e9;
  const auto [lo, hi] = band_edges(plan1());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.freqs_hz[i] >= lo && s.freqs_hz[i] <= hi)
      worst = std::max(worst, to_db(std::abs(s.s[i].s11)));
    EXPECT_EQ(s.s[i].s12, s.s[i].s21);
  }
  EXPECT_LE(worst, -19.5);
  // The printed entries are rounded, which moves the zero by ~10 MHz; the
  // notch at 4.15 GHz is still deep.
  const std::size_t k = nearest_index(s.freqs_hz, 4.15e9);
  EXPECT_EQ(s.freqs_hz[k], 4.15e9);
  EXPECT_LT(to_db(std::abs(s.s[k].s21)), -40.0);
}

TEST(Sparams, SynthesizedDesignZeroIsDeep) {
  const std::vector<double> grid{3.0e9, 4.15e9, 5.0e9};
  const SParamSweep s = sparams(fixtures::design_matrix(plan1(), 4.15e9), plan1(), grid);
  EXPECT_LE(to_db(std::abs(s.s[1].s21)), -60.0);
}

TEST(Sparams, LosslessUnitarity) {
  const CouplingMatrix m = fixtures::design_matrix(plan1(), 4.15e9);
  const SParamSweep s = sparams(m, plan1(), default_grid(plan1()));
  for (const SParam2& p : s.s) {
    EXPECT_NEAR(std::norm(p.s11) + std::norm(p.s21), 1.0, 1e-10);
    EXPECT_NEAR(std::abs(p.s11 * std::conj(p.s21) + p.s21 * std::conj(p.s22)), 0.0, 1e-10);
  }
}

TEST(Sparams, MatchesNormalizedEvaluation) {
  const CouplingMatrix m = fixtures::printed_m1();
  const std::vector<double> grid = linear_grid(2.5e9, 4.5e9, 41);
  const SParamSweep s = sparams(m, plan1(), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SParam2 d = response_at(m, normalized_frequency(plan1(), grid[i]));
    EXPECT_NEAR(std::abs(d.s21 - s.s[i].s21), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(d.s11 - s.s[i].s11), 0.0, 1e-12);
  }
}

TEST(Sparams, ThreadCountDoesNotChangeResult) {
  const CouplingMatrix m = fixtures::printed_m1();
  const std::vector<double> grid = default_grid(plan1(), 4001);
  ::setenv("XCOUPLER_THREADS", "1", 1);
  const SParamSweep a = sparams(m, plan1(), grid);
  ::setenv("XCOUPLER_THREADS", "4", 1);
  const SParamSweep b = sparams(m, plan1(), grid);
  ::unsetenv("XCOUPLER_THREADS");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(a.s[i].s11, b.s[i].s11);
    EXPECT_EQ(a.s[i].s21, b.s[i].s21);
  }
}

TEST(Sparams, LossMonotonicity) {
  const CouplingMatrix m = fixtures::printed_m1();
  const std::vector<double> grid = default_grid(plan1(), 301);
  const SParamSweep lossless = sparams(m, plan1(), grid);
  double prev_il = midband_insertion_loss(lossless, plan1());
  SParamSweep prev = lossless;
  for (double q : {5000.0, 1180.0, 880.0, 640.0, 150.0, 40.0}) {
    const SParamSweep s = sparams(m, plan1(), grid, LossSpec::with_qu(q));
    const double il = midband_insertion_loss(s, plan1());
    EXPECT_GT(il, prev_il) << q;
    // Pointwise only in-band: loss fills in the stopband zeros.
    const auto [lo, hi] = band_edges(plan1());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] >= lo && grid[i] <= hi)
        EXPECT_LE(std::abs(s.s[i].s21), std::abs(prev.s[i].s21) + 1e-15);
      EXPECT_LT(std::norm(s.s[i].s11) + std::norm(s.s[i].s21), 1.0);
    }
    prev_il = il;
    prev = s;
  }
  EXPECT_THROW(LossSpec::with_qu(0.0), DomainError);
  EXPECT_THROW(LossSpec::with_qu(-5.0), DomainError);
}

TEST(Sparams, RejectsBadGrids) {
  const CouplingMatrix m = fixtures::printed_m1();
  const std::vector<double> bad{3e9, 2e9};
  EXPECT_THROW(sparams(m, plan1(), bad), DomainError);
  const std::vector<double> neg{-1.0, 2e9};
  EXPECT_THROW(sparams(m, plan1(), neg), DomainError);
}

TEST(Grid, DefaultGridCoversBand) {
  const auto g = default_grid(plan1());
  ASSERT_EQ(g.size(), 1001u);
  EXPECT_DOUBLE_EQ(g.front(), 3.26e9 - 1.5 * 1.15e9);
  EXPECT_DOUBLE_EQ(g.back(), 3.26e9 + 1.5 * 1.15e9);
  EXPECT_DOUBLE_EQ(g[500], 3.26e9);
  const auto c = default_grid(FrequencyPlan(1e9, 1.5e9), 11);
  EXPECT_GT(c.front(), 0.0);
}

TEST(GroupDelay, ConstantAndLinearPhase) {
  SParamSweep s;
  s.freqs_hz = linear_grid(1e9, 2e9, 201);
  for (double f : s.freqs_hz) {
    const cplx lin = std::polar(1.0, -2.0 * std::numbers::pi * f * 1e-9);
    s.s.push_back({cplx(0.3, 0.4), lin, lin, cplx(0.3, 0.4)});
  }
  for (double t : group_delay(s, SParamKind::S11)) EXPECT_EQ(t, 0.0);
  for (double t : group_delay(s, SParamKind::S21)) EXPECT_NEAR(t, 1e-9, 1e-12);
  s.freqs_hz.resize(2);
  s.s.resize(2);
  EXPECT_THROW(group_delay(s, SParamKind::S21), DomainError);
}

TEST(GroupDelay, SinglyLoadedResonatorPeak) {
  const FrequencyPlan p = plan1();
  const double q = 2.672;
  CouplingMatrix m(1);
  m.set(0, 1, std::sqrt(p.f0() / (q * p.bw())));
  const SParamSweep s = sparams(m, p, linear_grid(1.5e9, 5.5e9, 4001));
  const auto tau = group_delay(s, SParamKind::S11);
  const double peak = *std::max_element(tau.begin(), tau.end());
  EXPECT_NEAR(peak, oracle::singly_loaded_peak_delay(q, p.f0()), 0.02 * 0.522e-9);
  EXPECT_NEAR(oracle::singly_loaded_peak_delay(q, p.f0()), 0.522e-9, 0.001e-9);
}

TEST(InsertionLoss, LosslessAndModes) {
  const CouplingMatrix m = fixtures::design_matrix(plan1(), 4.15e9);
  const SParamSweep s = sparams(m, plan1(), default_grid(plan1(), 20001));
  // Midband sits on a ripple maximum of the equiripple response.
  const double center = midband_insertion_loss(s, plan1());
  EXPECT_GT(center, 0.0);
  EXPECT_LT(center, 0.0437);
  EXPECT_LE(midband_insertion_loss(s, plan1(), InsertionLossMode::kBandMinimum), 0.001);
  const double avg = midband_insertion_loss(s, plan1(), InsertionLossMode::kBandAverage);
  EXPECT_GT(avg, 0.0);
  EXPECT_LT(avg, 0.0437);
}

TEST(InsertionLoss, PinnedLossyValue) {
  const CouplingMatrix m = fixtures::design_matrix(plan1(), 4.15e9);
  const SParamSweep s = sparams(m, plan1(), default_grid(plan1()), LossSpec::with_qu(1180.0));
  // Reference value from an independent dense-inverse evaluation.
  EXPECT_NEAR(midband_insertion_loss(s, plan1()), 0.0616775363, 1e-9);
}

TEST(InsertionLoss, CenterOutsideSweep) {
  const SParamSweep s =
      sparams(fixtures::printed_m1(), plan1(), linear_grid(4.0e9, 5.0e9, 11));
  EXPECT_THROW(midband_insertion_loss(s, plan1()), DomainError);
}

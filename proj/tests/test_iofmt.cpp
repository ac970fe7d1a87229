#include "xcoupler/error.hpp"
#include "xcoupler/iofmt.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

using namespace xcoupler;
using fixtures::plan1;

namespace {

SParamSweep design_sweep(std::size_t n = 1001) {
  return sparams(fixtures::design_matrix(plan1(), 4.15e9), plan1(), default_grid(plan1(), n));
}

double max_abs_diff(const SParamSweep& a, const SParamSweep& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (const SParamKind k : {SParamKind::S11, SParamKind::S21, SParamKind::S12, SParamKind::S22})
      worst = std::max(worst, std::abs(pick(a.s[i], k) - pick(b.s[i], k)));
  }
  return worst;
}

std::string expect_parse_error(std::string_view text) {
  try {
    parse_touchstone(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ParseError for: " << text;
  return {};
}

}  // namespace

TEST(Touchstone, RealImaginary) {
  const SParamSweep s = parse_touchstone("# GHz S RI R 50\n3.26 0.01 0 0.99 0 0.99 0 0.01 0");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.freqs_hz[0], 3.26e9);
  EXPECT_EQ(s.s[0].s21, cplx(0.99, 0.0));
  EXPECT_EQ(s.s[0].s11, cplx(0.01, 0.0));
  EXPECT_EQ(s.z_ref, 50.0);
}

TEST(Touchstone, MagnitudeAngle) {
  const SParamSweep s = parse_touchstone("# MHz S MA R 50\n3260 1 90 0 0 0 0 1 90");
  EXPECT_EQ(s.freqs_hz[0], 3.26e9);
  EXPECT_NEAR(s.s[0].s11.real(), 0.0, 1e-15);
  EXPECT_NEAR(s.s[0].s11.imag(), 1.0, 1e-15);
}

TEST(Touchstone, Decibel) {
  const SParamSweep s = parse_touchstone("# GHz S DB R 50\n6.0 0 0 -20 0 -20 0 0 0");
  EXPECT_NEAR(std::abs(s.s[0].s21), 0.1, 1e-15);
  EXPECT_NEAR(std::abs(s.s[0].s11), 1.0, 1e-15);
}

TEST(Touchstone, DefaultsCommentsAndCase) {
  const SParamSweep a = parse_touchstone(
      "! measured data\n"
      "\n"
      "#\n"
      "3.0 0.5 0 0.5 0 0.5 0 0.5 0 ! trailing\n"
      "  ! indented comment\n"
      "3.5 0.5 90 0.5 0 0.5 0 0.5 0\n");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.freqs_hz[1], 3.5e9);
  EXPECT_NEAR(a.s[1].s11.imag(), 0.5, 1e-15);
  const SParamSweep b = parse_touchstone("# r 75 ri s khz\n1 0.1 0.2 0.3 0.4 0.3 0.4 0.1 0.2");
  EXPECT_EQ(b.freqs_hz[0], 1e3);
  EXPECT_EQ(b.z_ref, 75.0);
  EXPECT_EQ(b.s[0].s21, cplx(0.3, 0.4));
  EXPECT_EQ(parse_touchstone("# Hz S RI\n").size(), 0u);
}

TEST(Touchstone, ErrorsCarryLineNumbers) {
  EXPECT_NE(expect_parse_error("# GHz S RI R 50\n3.0 1 2 3\n").find("line 2"), std::string::npos);
  EXPECT_NE(expect_parse_error("# GHz S RI R 50\n3.0 0 0 0 0 0 0 0 0\n2.0 0 0 0 0 0 0 0 0\n")
                .find("line 3"),
            std::string::npos);
  EXPECT_NE(expect_parse_error("# GHz S RI R 50\n3.0 0 0 0 0 0 0 0 0\n3.0 0 0 0 0 0 0 0 0\n")
                .find("line 3"),
            std::string::npos);
  EXPECT_NE(expect_parse_error("# GHz Y RI R 50\n").find("line 1"), std::string::npos);
  EXPECT_NE(expect_parse_error("# GHz S XY R 50\n").find("line 1"), std::string::npos);
  EXPECT_NE(expect_parse_error("# GHz S RI R 50\n# GHz S RI R 50\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(expect_parse_error("[Version] 2.0\n").find("line 1"), std::string::npos);
  EXPECT_NE(expect_parse_error("# GHz S RI R 50\n3.0 0 0 0 0 0 0 0 abc\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(expect_parse_error("# GHz S RI R\n").find("line 1"), std::string::npos);
}

TEST(Touchstone, EmptySweepWritesOptionLineOnly) {
  const std::string text = write_touchstone(SParamSweep{});
  EXPECT_EQ(text, "! xcoupler 0.1.0\n# GHZ S MA R 50\n");
  EXPECT_EQ(parse_touchstone(text).size(), 0u);
}

TEST(Touchstone, RoundTripEveryFormat) {
  const SParamSweep s = design_sweep();
  for (const DataFormat f : {DataFormat::RI, DataFormat::MA, DataFormat::DB}) {
    TouchstoneOptions o;
    o.format = f;
    const SParamSweep back = parse_touchstone(write_touchstone(s, o));
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      EXPECT_NEAR(back.freqs_hz[i], s.freqs_hz[i], 1e-8 * s.freqs_hz[i]);
    EXPECT_LE(max_abs_diff(back, s), 1e-8) << format_name(f);
  }
}

TEST(Touchstone, ConversionChain) {
  const SParamSweep s = design_sweep(201);
  TouchstoneOptions ri, ma;
  ri.format = DataFormat::RI;
  ma.format = DataFormat::MA;
  ma.freq_unit = FreqUnit::MHz;
  const SParamSweep a = parse_touchstone(write_touchstone(s, ri));
  const SParamSweep b = parse_touchstone(write_touchstone(a, ma));
  const SParamSweep c = parse_touchstone(write_touchstone(b, ri));
  EXPECT_LE(max_abs_diff(c, s), 1e-8);
}

TEST(Format, ParseFormatAndUnits) {
  EXPECT_EQ(parse_format("ri"), DataFormat::RI);
  EXPECT_EQ(parse_format("Db"), DataFormat::DB);
  EXPECT_THROW(parse_format("xx"), DomainError);
  EXPECT_EQ(unit_scale(FreqUnit::kHz), 1e3);
  EXPECT_EQ(unit_name(FreqUnit::GHz), "GHZ");
}

TEST(MatrixJson, RoundTripIsBitIdentical) {
  const CouplingMatrix m = fixtures::printed_m1();
  const std::string text = write_matrix_json(m, plan1());
  const MatrixDocument doc = read_matrix_json(text);
  EXPECT_EQ(doc.matrix, m);
  ASSERT_TRUE(doc.plan.has_value());
  EXPECT_EQ(*doc.plan, plan1());
  EXPECT_EQ(write_matrix_json(doc.matrix, doc.plan), text);

  const CouplingMatrix d = fixtures::design_matrix(plan1(), 4.15e9);
  EXPECT_EQ(read_matrix_json(write_matrix_json(d)).matrix, d);
}

TEST(MatrixJson, Schema) {
  const auto j = nlohmann::json::parse(write_matrix_json(fixtures::printed_m1(), plan1()));
  EXPECT_EQ(j["order"], 4);
  EXPECT_EQ(j["labels"][5], "L");
  EXPECT_EQ(j["matrix"][0][1], 1.03);
  EXPECT_EQ(j["plan"]["f0_hz"], 3.26e9);
  EXPECT_EQ(j["plan"]["bw_hz"], 1.15e9);
}

TEST(MatrixJson, MissingPlanIsFine) {
  const MatrixDocument doc = read_matrix_json(
      R"({"order": 1, "labels": ["S","1","L"], "matrix": [[0,1,0],[1,0,1],[0,1,0]]})");
  EXPECT_FALSE(doc.plan.has_value());
  EXPECT_EQ(doc.matrix(1, 2), 1.0);
}

TEST(MatrixJson, Errors) {
  try {
    read_matrix_json(
        R"({"order": 2, "matrix": [[0,1,0,0],[1,0,0.8,0],[0,0.801,0,1],[0,0,1,0]]})");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("M_12"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_matrix_json(R"({"order": 2, "labels": ["S","1","L"],
      "matrix": [[0,1,0,0],[1,0,1,0],[0,1,0,1],[0,0,1,0]]})"),
               ParseError);
  EXPECT_THROW(read_matrix_json(R"({"order": 3, "matrix": [[0,1,0],[1,0,1],[0,1,0]]})"),
               ParseError);
  EXPECT_THROW(read_matrix_json(R"({"order": 1, "matrix": [[0,1,0],[1,0,1]]})"), ParseError);
  EXPECT_THROW(read_matrix_json("not json"), ParseError);
  EXPECT_THROW(read_matrix_json(R"({"order": 1, "matrix": [[0,1,0],[1,0,1],[0,1,0]],
      "plan": {"f0_hz": 1e9, "bw_hz": 5e9}})"),
               Error);
}

TEST(MaskJson, RoundTripAndMatrixFallback) {
  const TopologyMask mask = TopologyMask::fig7();
  const TopologyMask back = read_mask_json(write_mask_json(mask));
  for (int i = 0; i < mask.size(); ++i)
    for (int j = 0; j < mask.size(); ++j) EXPECT_EQ(back.allowed(i, j), mask.allowed(i, j));
  const TopologyMask from_m = read_mask_json(write_matrix_json(fixtures::printed_m1()));
  EXPECT_TRUE(from_m.allowed(1, 4));
  EXPECT_FALSE(from_m.allowed(2, 4));
  const TopologyMask bools = read_mask_json(
      R"({"order": 1, "mask": [[false,true,false],[true,true,true],[false,true,false]]})");
  EXPECT_TRUE(bools.connects_source_to_load());
  EXPECT_THROW(read_mask_json(R"({"order": 1, "mask": [[0,1],[1,0]]})"), ParseError);
}

TEST(ReportJson, AbsentValuesOmitted) {
  ExtractionReport r;
  r.k = 0.25;
  const auto j = nlohmann::json::parse(write_report_json(r));
  EXPECT_EQ(j["k"], 0.25);
  EXPECT_FALSE(j.contains("q_u"));
  EXPECT_FALSE(j.contains("m_normalized"));

  BandMetrics b;
  b.f_lo = 1.0;
  b.f_hi = 2.0;
  b.bw = 1.0;
  const auto k = nlohmann::json::parse(write_band_metrics_json(b));
  EXPECT_TRUE(k.contains("tz_freqs"));
  EXPECT_FALSE(k.contains("f_spur"));
  EXPECT_FALSE(k.contains("sfr_pct"));
}

TEST(Csv, HeaderAndRoundTrip) {
  const SParamSweep s = design_sweep(101);
  const std::string text = write_csv(s);
  EXPECT_EQ(text.substr(0, text.find('\n')), "freq_hz,s11_db,s21_db,s11_deg,s21_deg,gd_s21_ns");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 102);
  const SParamSweep back = parse_csv(text);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_NEAR(std::abs(back.s[i].s21 - s.s[i].s21), 0.0, 1e-7);
    EXPECT_NEAR(std::abs(back.s[i].s11 - s.s[i].s11), 0.0, 1e-7);
    EXPECT_EQ(back.s[i].s12, back.s[i].s21);
  }
  EXPECT_EQ(write_csv(s), text);
}

TEST(Csv, FormatSignificant) {
  EXPECT_EQ(format_significant(3.26e9), "3260000000");
  EXPECT_EQ(format_significant(-0.123456789123), "-0.123456789");
  EXPECT_EQ(format_significant(0.0), "0");
}

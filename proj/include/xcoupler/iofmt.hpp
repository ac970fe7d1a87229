#pragma once

#include "xcoupler/coupling_matrix.hpp"
#include "xcoupler/extraction.hpp"
#include "xcoupler/fitter.hpp"
#include "xcoupler/response.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace xcoupler {

enum class FreqUnit { Hz, kHz, MHz, GHz };
enum class DataFormat { RI, MA, DB };

// Touchstone v1 option line. Fields absent from the file take these defaults.
struct TouchstoneOptions {
  FreqUnit freq_unit = FreqUnit::GHz;
  DataFormat format = DataFormat::MA;
  double z_ref = 50.0;
};

double unit_scale(FreqUnit unit);
std::string_view unit_name(FreqUnit unit);
std::string_view format_name(DataFormat format);
// Case-insensitive "RI" / "MA" / "DB"; throws DomainError otherwise.
DataFormat parse_format(std::string_view text);

// Two-port Touchstone v1. Throws ParseError (with the 1-based line number
// where one applies); never returns partial data.
SParamSweep parse_touchstone(std::string_view text);
std::string write_touchstone(const SParamSweep& sweep, const TouchstoneOptions& opts = {});

struct MatrixDocument {
  CouplingMatrix matrix;
  std::optional<FrequencyPlan> plan;
};

// {"order", "labels", "matrix", "plan": {"f0_hz", "bw_hz"}}; asymmetry above
// 1e-9 is rejected naming the entry.
MatrixDocument read_matrix_json(std::string_view text);
std::string write_matrix_json(const CouplingMatrix& m,
                              const std::optional<FrequencyPlan>& plan = std::nullopt);

// Either {"order", "mask": [[0/1 or bool]]} or a matrix document whose
// nonzero off-diagonal entries become the permitted couplings.
TopologyMask read_mask_json(std::string_view text);
std::string write_mask_json(const TopologyMask& mask);

// Matrix document plus {"fit": {"cost", "iterations", "converged", "seed",
// "start", "history"}}.
std::string write_fit_json(const FitResult& result, const FrequencyPlan& plan);

// Absent optionals are omitted.
std::string write_report_json(const ExtractionReport& report);
std::string write_band_metrics_json(const BandMetrics& metrics);

// freq_hz,s11_db,s21_db,s11_deg,s21_deg,gd_s21_ns with 9 significant
// digits in plain decimal notation. Needs at least 3 points for the delay.
std::string write_csv(const SParamSweep& sweep);
// Inverse of write_csv. The file carries S11 and S21 only, so the sweep is
// completed as a reciprocal symmetric two-port (S12 = S21, S22 = S11).
SParamSweep parse_csv(std::string_view text);

// Plain decimal rendering with the given number of significant digits.
std::string format_significant(double value, int digits = 9);

}  // namespace xcoupler

#include "xcoupler/iofmt.hpp"

#include "xcoupler/error.hpp"
#include "xcoupler/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace xcoupler {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

std::optional<double> to_number(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

cplx decode_pair(DataFormat format, double a, double b) {
  switch (format) {
    case DataFormat::RI: return {a, b};
    case DataFormat::MA: return std::polar(a, b * kDeg);
    case DataFormat::DB: return std::polar(std::pow(10.0, a / 20.0), b * kDeg);
  }
  return {};
}

std::pair<double, double> encode_pair(DataFormat format, cplx v) {
  switch (format) {
    case DataFormat::RI: return {v.real(), v.imag()};
    case DataFormat::MA: return {std::abs(v), std::arg(v) / kDeg};
    case DataFormat::DB: return {to_db(std::abs(v)), std::arg(v) / kDeg};
  }
  return {};
}

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

int read_order(const json& doc) {
  if (!doc.is_object()) throw ParseError("matrix document must be a JSON object");
  if (!doc.contains("order") || !doc["order"].is_number_integer()) {
    throw ParseError("\"order\" must be an integer");
  }
  const int order = doc["order"].get<int>();
  if (order < 1) throw ParseError("\"order\" must be >= 1");
  return order;
}

// Rows of a square JSON array of size n; each element converted by get.
template <typename Get>
void read_square(const json& rows, int n, const char* key, Get&& get) {
  if (!rows.is_array()) throw ParseError(std::string("\"") + key + "\" must be an array of rows");
  if (static_cast<int>(rows.size()) != n) {
    throw ParseError(std::string("\"") + key + "\" has " + std::to_string(rows.size()) +
                     " rows but order implies " + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw ParseError(std::string("\"") + key + "\" is not square (row " + std::to_string(i) +
                       ")");
    }
    for (int j = 0; j < n; ++j) get(i, j, row[j]);
  }
}

std::vector<std::string> read_labels(const json& doc, int order) {
  if (!doc.contains("labels")) return CouplingMatrix::default_labels(order);
  const json& labels = doc["labels"];
  if (!labels.is_array() || static_cast<int>(labels.size()) != order + 2) {
    throw ParseError("\"labels\" must list " + std::to_string(order + 2) +
                     " names for order " + std::to_string(order));
  }
  std::vector<std::string> out;
  for (const auto& l : labels) {
    if (!l.is_string()) throw ParseError("\"labels\" entries must be strings");
    out.push_back(l.get<std::string>());
  }
  return out;
}

json matrix_json(const CouplingMatrix& m, const std::optional<FrequencyPlan>& plan) {
  const int n = m.size();
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int j = 0; j < n; ++j) row.push_back(0.5 * (m(i, j) + m(j, i)) + 0.0);
    rows.push_back(std::move(row));
  }
  json doc;
  doc["order"] = m.order();
  doc["labels"] = m.labels();
  doc["matrix"] = std::move(rows);
  if (plan) doc["plan"] = {{"f0_hz", plan->f0()}, {"bw_hz", plan->bw()}};
  return doc;
}

}  // namespace

double unit_scale(FreqUnit unit) {
  switch (unit) {
    case FreqUnit::Hz: return 1.0;
    case FreqUnit::kHz: return 1e3;
    case FreqUnit::MHz: return 1e6;
    case FreqUnit::GHz: return 1e9;
  }
  return 1.0;
}

std::string_view unit_name(FreqUnit unit) {
  switch (unit) {
    case FreqUnit::Hz: return "HZ";
    case FreqUnit::kHz: return "KHZ";
    case FreqUnit::MHz: return "MHZ";
    case FreqUnit::GHz: return "GHZ";
  }
  return "HZ";
}

std::string_view format_name(DataFormat format) {
  switch (format) {
    case DataFormat::RI: return "RI";
    case DataFormat::MA: return "MA";
    case DataFormat::DB: return "DB";
  }
  return "MA";
}

DataFormat parse_format(std::string_view text) {
  const std::string t = lower(text);
  if (t == "ri") return DataFormat::RI;
  if (t == "ma") return DataFormat::MA;
  if (t == "db") return DataFormat::DB;
  throw DomainError("unknown data format '" + std::string(text) + "' (expected RI, MA or DB)");
}

SParamSweep parse_touchstone(std::string_view text) {
  TouchstoneOptions opts;
  bool seen_option = false;
  SParamSweep sweep;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    std::string_view line = lines[ln];
    if (const auto bang = line.find('!'); bang != std::string_view::npos) line = line.substr(0, bang);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    if (tokens[0].front() == '[') {
      throw ParseError("Touchstone v2 keywords are not supported (v1 two-port only)", line_no);
    }
    if (tokens[0].front() == '#') {
      if (seen_option) throw ParseError("more than one option line", line_no);
      if (!sweep.empty()) throw ParseError("option line after data", line_no);
      seen_option = true;
      std::vector<std::string_view> opt_tokens;
      if (tokens[0].size() > 1) opt_tokens.push_back(tokens[0].substr(1));
      opt_tokens.insert(opt_tokens.end(), tokens.begin() + 1, tokens.end());
      for (std::size_t k = 0; k < opt_tokens.size(); ++k) {
        const std::string t = lower(opt_tokens[k]);
        if (t == "hz") opts.freq_unit = FreqUnit::Hz;
        else if (t == "khz") opts.freq_unit = FreqUnit::kHz;
        else if (t == "mhz") opts.freq_unit = FreqUnit::MHz;
        else if (t == "ghz") opts.freq_unit = FreqUnit::GHz;
        else if (t == "ri") opts.format = DataFormat::RI;
        else if (t == "ma") opts.format = DataFormat::MA;
        else if (t == "db") opts.format = DataFormat::DB;
        else if (t == "s") continue;
        else if (t == "y" || t == "z" || t == "h" || t == "g") {
          throw ParseError("parameter type '" + std::string(opt_tokens[k]) +
                               "' is not supported (S only)",
                           line_no);
        } else if (t == "r") {
          if (k + 1 >= opt_tokens.size()) throw ParseError("'R' needs an impedance value", line_no);
          const auto z = to_number(opt_tokens[++k]);
          if (!z || !(*z > 0.0)) throw ParseError("invalid reference impedance", line_no);
          opts.z_ref = *z;
        } else {
          throw ParseError("unrecognized option token '" + std::string(opt_tokens[k]) + "'",
                           line_no);
        }
      }
      continue;
    }

    if (tokens.size() != 9) {
      if (tokens.size() == 5 && !sweep.empty()) {
        throw ParseError("noise parameter data is not supported", line_no);
      }
      throw ParseError("expected 9 values on a two-port data line, found " +
                           std::to_string(tokens.size()),
                       line_no);
    }
    double v[9];
    for (int k = 0; k < 9; ++k) {
      const auto x = to_number(tokens[k]);
      if (!x) throw ParseError("invalid number '" + std::string(tokens[k]) + "'", line_no);
      v[k] = *x;
    }
    const double f = v[0] * unit_scale(opts.freq_unit);
    if (!(f > 0.0)) throw ParseError("frequency must be positive", line_no);
    if (!sweep.empty() && !(f > sweep.freqs_hz.back())) {
      throw ParseError("frequencies must be strictly increasing (duplicate or decreasing value)",
                       line_no);
    }
    sweep.freqs_hz.push_back(f);
    sweep.s.push_back({decode_pair(opts.format, v[1], v[2]), decode_pair(opts.format, v[3], v[4]),
                       decode_pair(opts.format, v[5], v[6]), decode_pair(opts.format, v[7], v[8])});
  }
  sweep.z_ref = opts.z_ref;
  return sweep;
}

std::string write_touchstone(const SParamSweep& sweep, const TouchstoneOptions& opts) {
  sweep.validate();
  std::ostringstream os;
  os << "! " << kToolName << ' ' << kVersion << '\n';
  os << "# " << unit_name(opts.freq_unit) << " S " << format_name(opts.format) << " R "
     << format_g9(sweep.z_ref) << '\n';
  const double scale = unit_scale(opts.freq_unit);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    os << format_g9(sweep.freqs_hz[i] / scale);
    const auto& p = sweep.s[i];
    for (const cplx v : {p.s11, p.s21, p.s12, p.s22}) {
      const auto [a, b] = encode_pair(opts.format, v);
      os << ' ' << format_g9(a) << ' ' << format_g9(b);
    }
    os << '\n';
  }
  return os.str();
}

MatrixDocument read_matrix_json(std::string_view text) {
  const json doc = parse_json(text);
  const int order = read_order(doc);
  const int n = order + 2;
  auto labels = read_labels(doc, order);
  if (!doc.contains("matrix")) throw ParseError("missing \"matrix\"");
  Eigen::MatrixXd values(n, n);
  read_square(doc["matrix"], n, "matrix", [&](int i, int j, const json& v) {
    if (!v.is_number()) throw ParseError("\"matrix\" entries must be numbers");
    values(i, j) = v.get<double>();
  });
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(values(i, j) - values(j, i)) > 1e-9) {
        std::ostringstream msg;
        msg << "matrix is not symmetric: M_" << labels[i] << labels[j] << " = " << values(i, j)
            << " but M_" << labels[j] << labels[i] << " = " << values(j, i) << " (row " << i
            << ", column " << j << ")";
        throw ParseError(msg.str());
      }
    }
  }
  std::optional<FrequencyPlan> plan;
  if (doc.contains("plan")) {
    const json& p = doc["plan"];
    if (!p.is_object() || !p.contains("f0_hz") || !p.contains("bw_hz") ||
        !p["f0_hz"].is_number() || !p["bw_hz"].is_number()) {
      throw ParseError("\"plan\" must hold numeric \"f0_hz\" and \"bw_hz\"");
    }
    try {
      plan.emplace(p["f0_hz"].get<double>(), p["bw_hz"].get<double>());
    } catch (const DomainError& e) {
      throw ParseError(std::string("invalid plan: ") + e.what());
    }
  }
  try {
    CouplingMatrix m(values, 1e-9);
    m.set_labels(std::move(labels));
    return {std::move(m), plan};
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

std::string write_matrix_json(const CouplingMatrix& m, const std::optional<FrequencyPlan>& plan) {
  return matrix_json(m, plan).dump(2) + "\n";
}

TopologyMask read_mask_json(std::string_view text) {
  const json doc = parse_json(text);
  const int order = read_order(doc);
  const int n = order + 2;
  if (!doc.contains("mask")) {
    if (doc.contains("matrix")) return TopologyMask::from_matrix(read_matrix_json(text).matrix);
    throw ParseError("mask document needs \"mask\" (or \"matrix\")");
  }
  std::vector<std::vector<bool>> bits(n, std::vector<bool>(n));
  read_square(doc["mask"], n, "mask", [&](int i, int j, const json& v) {
    if (v.is_boolean()) bits[i][j] = v.get<bool>();
    else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) bits[i][j] = v.get<int>() == 1;
    else throw ParseError("\"mask\" entries must be booleans or 0/1");
  });
  TopologyMask mask(order, bits[0][n - 1]);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (bits[i][j] != bits[j][i]) {
        throw ParseError("mask is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
      if (i == j) {
        if ((i == 0 || i == n - 1) && bits[i][j]) {
          throw ParseError("source/load self-coupling cannot be permitted");
        }
        continue;
      }
      if (bits[i][j]) mask.allow(i, j);
    }
  }
  return mask;
}

std::string write_mask_json(const TopologyMask& mask) {
  const int n = mask.size();
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int j = 0; j < n; ++j) row.push_back(mask.allowed(i, j) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  json doc;
  doc["order"] = mask.order();
  doc["labels"] = CouplingMatrix::default_labels(mask.order());
  doc["mask"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string write_fit_json(const FitResult& result, const FrequencyPlan& plan) {
  json doc = matrix_json(result.matrix, plan);
  json history = json::array();
  for (const auto& [it, cost] : result.history) history.push_back({it, cost});
  doc["fit"] = {{"cost", result.cost},
                {"iterations", result.iterations},
                {"converged", result.converged},
                {"seed", result.seed},
                {"start", result.start},
                {"history", std::move(history)}};
  return doc.dump(2) + "\n";
}

std::string write_report_json(const ExtractionReport& report) {
  json doc = json::object();
  if (report.k) doc["k"] = *report.k;
  if (report.m_normalized) doc["m_normalized"] = *report.m_normalized;
  if (report.q_ext) doc["q_ext"] = *report.q_ext;
  if (report.q_u) doc["q_u"] = *report.q_u;
  if (!report.diagnostics.empty()) doc["diagnostics"] = report.diagnostics;
  return doc.dump(2) + "\n";
}

std::string write_band_metrics_json(const BandMetrics& m) {
  json doc = {{"f_lo", m.f_lo},           {"f_hi", m.f_hi}, {"bw", m.bw},
              {"fbw", m.fbw},             {"rl_min_db", m.rl_min_db},
              {"tz_freqs", m.tz_freqs}};
  if (m.f_spur) doc["f_spur"] = *m.f_spur;
  if (m.sfr_hz) doc["sfr_hz"] = *m.sfr_hz;
  if (m.sfr_pct) doc["sfr_pct"] = *m.sfr_pct;
  return doc.dump(2) + "\n";
}

std::string format_significant(double value, int digits) {
  if (!std::isfinite(value)) return value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
  if (value == 0.0) return "0";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
  const int decimals = std::max(0, digits - 1 - exponent);
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string write_csv(const SParamSweep& sweep) {
  sweep.validate();
  const auto gd = group_delay(sweep, SParamKind::S21);
  std::ostringstream os;
  os << "freq_hz,s11_db,s21_db,s11_deg,s21_deg,gd_s21_ns\n";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& p = sweep.s[i];
    os << format_significant(sweep.freqs_hz[i]) << ',' << format_significant(to_db(std::abs(p.s11)))
       << ',' << format_significant(to_db(std::abs(p.s21))) << ','
       << format_significant(std::arg(p.s11) / kDeg) << ','
       << format_significant(std::arg(p.s21) / kDeg) << ',' << format_significant(gd[i] * 1e9)
       << '\n';
  }
  return os.str();
}

SParamSweep parse_csv(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t ln = 0;
  while (ln < lines.size() && split_ws(lines[ln]).empty()) ++ln;
  if (ln == lines.size()) throw ParseError("empty CSV input");
  std::string header(lines[ln]);
  header.erase(std::remove_if(header.begin(), header.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               header.end());
  if (header != "freq_hz,s11_db,s21_db,s11_deg,s21_deg,gd_s21_ns") {
    throw ParseError("unexpected CSV header", ln + 1);
  }
  SParamSweep sweep;
  for (++ln; ln < lines.size(); ++ln) {
    const std::string_view line = lines[ln];
    if (split_ws(line).empty()) continue;
    std::vector<double> v;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) field.remove_prefix(1);
      while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) field.remove_suffix(1);
      const auto x = to_number(field);
      if (!x) throw ParseError("invalid number '" + std::string(field) + "'", ln + 1);
      v.push_back(*x);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (v.size() != 6) {
      throw ParseError("expected 6 CSV fields, found " + std::to_string(v.size()), ln + 1);
    }
    if (!(v[0] > 0.0) || (!sweep.empty() && !(v[0] > sweep.freqs_hz.back()))) {
      throw ParseError("frequencies must be positive and strictly increasing", ln + 1);
    }
    const cplx s11 = decode_pair(DataFormat::DB, v[1], v[3]);
    const cplx s21 = decode_pair(DataFormat::DB, v[2], v[4]);
    sweep.freqs_hz.push_back(v[0]);
    sweep.s.push_back({s11, s21, s21, s11});
  }
  return sweep;
}

}  // namespace xcoupler

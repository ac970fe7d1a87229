#include "xcoupler/cli.hpp"

#include "xcoupler/error.hpp"
#include "xcoupler/extraction.hpp"
#include "xcoupler/fitter.hpp"
#include "xcoupler/iofmt.hpp"
#include "xcoupler/prototype.hpp"
#include "xcoupler/response.hpp"
#include "xcoupler/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace xcoupler::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

SParamSweep read_sweep(const std::string& path) {
  const std::string ext = extension(path);
  const std::string text = read_file(path);
  try {
    if (ext == ".csv") return parse_csv(text);
    if (ext == ".s2p") return parse_touchstone(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
  throw Error("unsupported sweep file '" + path + "' (expected .s2p or .csv)");
}

void write_sweep(const std::string& path, const SParamSweep& sweep, DataFormat format) {
  const std::string ext = extension(path);
  if (ext == ".csv") {
    write_file(path, write_csv(sweep));
  } else if (ext == ".s2p") {
    TouchstoneOptions opts;
    opts.format = format;
    opts.z_ref = sweep.z_ref;
    write_file(path, write_touchstone(sweep, opts));
  } else {
    throw Error("unsupported output file '" + path + "' (expected .s2p or .csv)");
  }
}

// Plan from explicit flags, else from the matrix document.
std::optional<FrequencyPlan> resolve_plan(const std::optional<double>& f0,
                                          const std::optional<double>& bw,
                                          const std::optional<FrequencyPlan>& fallback) {
  if (f0 && bw) return FrequencyPlan(*f0, *bw);
  if (f0 || bw) throw DomainError("--f0 and --bw must be given together");
  return fallback;
}

FrequencyPlan require_plan(const std::optional<FrequencyPlan>& plan) {
  if (!plan) throw DomainError("a frequency plan is required (--f0 and --bw)");
  return *plan;
}

TopologyMask resolve_mask(const std::string& spec) {
  if (spec == "fig7") return TopologyMask::fig7();
  return read_mask_json(read_file(spec));
}

struct Options {
  // synth
  int order = 0;
  double rl = 20.0;
  std::vector<double> tz_f;
  std::vector<double> tz_omega;
  std::string topology = "transversal";
  // shared
  std::optional<double> f0;
  std::optional<double> bw;
  std::string output;
  std::string input;
  std::string matrix;
  std::string format = "MA";
  // respond
  std::optional<double> qu;
  std::optional<double> fstart;
  std::optional<double> fstop;
  std::size_t points = 1001;
  // extract
  std::string kind;
  std::string edge = "rl";
  double edge_db = 3.0;
  double edge_rl = 19.5;
  double spur_db = -20.0;
  std::string formula = "mapped";
  // fit
  std::string target;
  std::string mask;
  std::string init;
  std::uint64_t seed = 0;
  int starts = 8;
  double tol = 1e-10;
  int max_iters = 5000;
  // convert
  std::string out_path;
};

void do_synth(const Options& o, std::ostream& out) {
  const auto plan = resolve_plan(o.f0, o.bw, std::nullopt);
  std::vector<double> tz = o.tz_omega;
  if (!o.tz_f.empty()) {
    const FrequencyPlan p = require_plan(plan);
    for (const double f : o.tz_f) tz.push_back(normalized_frequency(p, f));
  }
  const CharPoly cp = synthesize_polynomials(o.order, o.rl, tz);
  CouplingMatrix m = transversal_matrix(cp);
  if (o.topology == "fig7") {
    if (o.order != 4) throw DomainError("the fig7 topology is defined for order 4 only");
    m = reconfigure(m, TopologyMask::fig7());
  } else if (o.topology != "transversal") {
    m = reconfigure(m, resolve_mask(o.topology));
  }
  write_file(o.output, write_matrix_json(m, plan));
  out << "wrote " << o.output << '\n';
}

void do_respond(const Options& o, std::ostream& out) {
  const MatrixDocument doc = read_matrix_json(read_file(o.matrix));
  const FrequencyPlan plan = require_plan(resolve_plan(o.f0, o.bw, doc.plan));
  std::vector<double> grid;
  if (o.fstart || o.fstop) {
    if (!(o.fstart && o.fstop)) throw DomainError("--fstart and --fstop must be given together");
    grid = linear_grid(*o.fstart, *o.fstop, o.points);
  } else {
    grid = default_grid(plan, o.points);
  }
  const LossSpec loss = (!o.qu || *o.qu == 0.0) ? LossSpec::lossless() : LossSpec::with_qu(*o.qu);
  const SParamSweep sweep = sparams(doc.matrix, plan, grid, loss);
  write_sweep(o.output, sweep, parse_format(o.format));
  out << "wrote " << o.output << " (" << sweep.size() << " points)\n";
}

void do_extract(const Options& o, std::ostream& out) {
  const SParamSweep sweep = read_sweep(o.input);
  std::optional<MatrixDocument> doc;
  if (!o.matrix.empty()) doc = read_matrix_json(read_file(o.matrix));
  const std::optional<FrequencyPlan> doc_plan = doc ? doc->plan : std::nullopt;
  // Q_ext needs only the center frequency.
  const auto plan = o.kind == "qext" && !o.bw ? doc_plan : resolve_plan(o.f0, o.bw, doc_plan);

  std::string body;
  if (o.kind == "kij") {
    const SplitFormula formula = o.formula == "squared" ? SplitFormula::kSquaredRatio
                                                        : SplitFormula::kBandpassMapped;
    const auto [fa, fb] = find_even_odd_peaks(sweep);
    ExtractionReport r;
    r.k = extract_k_even_odd(fa, fb, formula);
    if (plan) r.m_normalized = normalize_coupling(*plan, *r.k);
    std::ostringstream diag;
    diag.precision(9);
    diag << "peaks at " << fa << " Hz and " << fb << " Hz";
    r.diagnostics = diag.str();
    body = write_report_json(r);
  } else if (o.kind == "qext") {
    double f0 = 0.0;
    if (o.f0) f0 = *o.f0;
    else if (plan) f0 = plan->f0();
    else throw DomainError("qext needs --f0");
    ExtractionReport r;
    r.q_ext = extract_qext_group_delay(sweep, f0);
    body = write_report_json(r);
  } else if (o.kind == "qu") {
    if (!doc) throw DomainError("qu extraction needs --matrix");
    const FrequencyPlan p = require_plan(plan);
    ExtractionReport r;
    r.q_u = extract_qu(sweep, doc->matrix, p);
    std::ostringstream diag;
    diag.precision(6);
    diag << "midband insertion loss " << midband_insertion_loss(sweep, p) << " dB";
    r.diagnostics = diag.str();
    body = write_report_json(r);
  } else {
    BandMetricsOptions bo;
    bo.criterion = o.edge == "drop" ? EdgeCriterion::kInsertionDrop : EdgeCriterion::kReturnLoss;
    bo.edge_drop_db = o.edge_db;
    bo.edge_rl_db = o.edge_rl;
    bo.spur_threshold_db = o.spur_db;
    body = write_band_metrics_json(band_metrics(sweep, require_plan(plan), bo));
  }
  write_file(o.output, body);
  out << "wrote " << o.output << '\n';
}

void do_fit(const Options& o, std::ostream& out) {
  const SParamSweep target = read_sweep(o.target);
  const MatrixDocument init = read_matrix_json(read_file(o.init));
  const FrequencyPlan plan = require_plan(resolve_plan(o.f0, o.bw, init.plan));
  FitProblem problem{resolve_mask(o.mask), init.matrix, plan, target, FitWeights{}, std::nullopt};
  FitOptions fo;
  fo.seed = o.seed;
  fo.multistart_count = o.starts;
  fo.tol = o.tol;
  fo.max_iters = o.max_iters;
  const FitResult result = fit_matrix(problem, fo);
  write_file(o.output, write_fit_json(result, plan));
  out << "wrote " << o.output << " (cost " << result.cost
      << (result.converged ? ", converged" : ", not converged") << ")\n";
}

void do_convert(const Options& o, std::ostream& out) {
  write_sweep(o.out_path, read_sweep(o.input), parse_format(o.format));
  out << "wrote " << o.out_path << '\n';
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupling-matrix filter synthesis and analysis", kToolName};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Synthesize a coupling matrix");
  synth->add_option("--order", o.order, "Filter order N")->required();
  synth->add_option("--rl", o.rl, "Return loss in dB")->required();
  synth->add_option("--tz-f", o.tz_f, "Transmission zero in Hz (needs --f0/--bw)");
  synth->add_option("--tz-omega", o.tz_omega, "Transmission zero, normalized");
  synth->add_option("--f0", o.f0, "Center frequency in Hz");
  synth->add_option("--bw", o.bw, "Bandwidth in Hz");
  synth->add_option("--topology", o.topology, "transversal, fig7 or a mask .json file")
      ->capture_default_str();
  synth->add_option("-o,--output", o.output, "Output matrix .json")->required();

  auto* respond = app.add_subcommand("respond", "Compute the S-parameter response of a matrix");
  respond->add_option("--matrix", o.matrix, "Matrix .json")->required();
  respond->add_option("--f0", o.f0, "Center frequency in Hz");
  respond->add_option("--bw", o.bw, "Bandwidth in Hz");
  respond->add_option("--qu", o.qu, "Unloaded Q (0 or absent: lossless)");
  respond->add_option("--fstart", o.fstart, "Sweep start in Hz");
  respond->add_option("--fstop", o.fstop, "Sweep stop in Hz");
  respond->add_option("--points", o.points, "Number of sweep points")->capture_default_str();
  respond->add_option("--format", o.format, "Touchstone data format RI|MA|DB")
      ->capture_default_str();
  respond->add_option("-o,--output", o.output, "Output .csv or .s2p")->required();

  auto* extract = app.add_subcommand("extract", "Extract figures of merit from a sweep");
  extract->add_option("kind", o.kind, "kij, qext, qu or band")
      ->required()
      ->check(CLI::IsMember({"kij", "qext", "qu", "band"}));
  extract->add_option("--in", o.input, "Input .s2p or .csv")->required();
  extract->add_option("--matrix", o.matrix, "Matrix .json (qu; also supplies the plan)");
  extract->add_option("--f0", o.f0, "Center frequency in Hz");
  extract->add_option("--bw", o.bw, "Bandwidth in Hz");
  auto* edge = extract->add_option("--edge", o.edge, "Band-edge criterion: rl or drop")
      ->check(CLI::IsMember({"rl", "drop"}))
      ->capture_default_str();
  extract->add_option("--edge-rl", o.edge_rl, "Return loss (dB) defining the band edge")
      ->capture_default_str();
  auto* edge_db = extract->add_option("--edge-db", o.edge_db,
                                      "Drop below midband |S21| (implies --edge drop)")
                      ->capture_default_str();
  extract->add_option("--spur-db", o.spur_db, "Spurious-band threshold in dB")
      ->capture_default_str();
  extract->add_option("--formula", o.formula, "kij split formula: mapped or squared")
      ->check(CLI::IsMember({"mapped", "squared"}))
      ->capture_default_str();
  extract->add_option("-o,--output", o.output, "Output report .json")->required();

  auto* fit = app.add_subcommand("fit", "Fit a coupling matrix to a target response");
  fit->add_option("--target", o.target, "Target .s2p or .csv")->required();
  fit->add_option("--mask", o.mask, "Mask .json or fig7")->required();
  fit->add_option("--init", o.init, "Initial matrix .json")->required();
  fit->add_option("--f0", o.f0, "Center frequency in Hz");
  fit->add_option("--bw", o.bw, "Bandwidth in Hz");
  fit->add_option("--seed", o.seed, "Multistart seed")->capture_default_str();
  fit->add_option("--starts", o.starts, "Number of starts")->capture_default_str();
  fit->add_option("--tol", o.tol, "Convergence cost")->capture_default_str();
  fit->add_option("--max-iters", o.max_iters, "Iterations per start")->capture_default_str();
  fit->add_option("-o,--output", o.output, "Output fit .json")->required();

  auto* convert = app.add_subcommand("convert", "Convert between .s2p and .csv");
  convert->add_option("--in", o.input, "Input .s2p or .csv")->required();
  convert->add_option("--out", o.out_path, "Output .s2p or .csv")->required();
  convert->add_option("--format", o.format, "Touchstone data format RI|MA|DB")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (const CLI::App* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return 2;
  }

  if (edge_db->count() > 0 && edge->count() == 0) o.edge = "drop";

  try {
    if (synth->parsed()) do_synth(o, out);
    else if (respond->parsed()) do_respond(o, out);
    else if (extract->parsed()) do_extract(o, out);
    else if (fit->parsed()) do_fit(o, out);
    else if (convert->parsed()) do_convert(o, out);
    return 0;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    err << "error: " << msg << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage{kToolName};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace xcoupler::cli

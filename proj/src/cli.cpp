#include "mrseries/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "mrseries/criteria.hpp"
#include "mrseries/error.hpp"
#include "mrseries/kernels.hpp"
#include "mrseries/measures.hpp"
#include "mrseries/montecarlo.hpp"

namespace mrseries::cli {

using nlohmann::json;

namespace {

template <class T>
std::function<void(RunConfig&, const json&)> setter(T RunConfig::*field) {
  return [field](RunConfig& c, const json& v) { c.*field = v.get<T>(); };
}

const std::map<std::string, std::function<void(RunConfig&, const json&)>>& setters() {
  static const std::map<std::string, std::function<void(RunConfig&, const json&)>> table = {
      {"command", setter(&RunConfig::command)},
      {"coeffs", setter(&RunConfig::coeffs)},
      {"kernel",
       [](RunConfig& c, const json& v) { c.kernel = v.is_string() ? v.get<std::string>() : v.dump(); }},
      {"truncations", setter(&RunConfig::truncations)},
      {"N", setter(&RunConfig::N)},
      {"replicates", setter(&RunConfig::replicates)},
      {"seed", setter(&RunConfig::seed)},
      {"bounds", setter(&RunConfig::bounds)},
      {"field", setter(&RunConfig::field)},
      {"repair", setter(&RunConfig::repair)},
      {"sigma_margin", setter(&RunConfig::sigma_margin)},
      {"psd_tolerance", setter(&RunConfig::psd_tolerance)},
      {"weight_b",
       [](RunConfig& c, const json& v) {
         if (v.is_null()) c.weight_b.reset();
         else c.weight_b = v.get<double>();
       }},
      {"a_exp", setter(&RunConfig::a_exp)},
      {"b_exp", setter(&RunConfig::b_exp)},
      {"c_exp", setter(&RunConfig::c_exp)},
      {"grid", setter(&RunConfig::grid)},
      {"plateau_ratio", setter(&RunConfig::plateau_ratio)},
      {"measure_spec", setter(&RunConfig::measure_spec)},
      {"range_lo", setter(&RunConfig::range_lo)},
      {"range_hi", setter(&RunConfig::range_hi)},
      {"alpha", setter(&RunConfig::alpha)},
      {"smallness", setter(&RunConfig::smallness)},
      {"measure", setter(&RunConfig::measure)},
      {"truncs", setter(&RunConfig::truncs)},
      {"points", setter(&RunConfig::points)},
      {"tolerance", setter(&RunConfig::tolerance)},
      {"plateau_threshold", setter(&RunConfig::plateau_threshold)},
      {"growth_slope", setter(&RunConfig::growth_slope)},
      {"output", setter(&RunConfig::output)},
      {"format", setter(&RunConfig::format)},
      {"csv", setter(&RunConfig::csv)},
  };
  return table;
}

json criterion_diagnostic(const CriterionValue& v, const DiagnosticThresholds& t) {
  json d = {{"criterion", to_string(v.kind)}};
  if (v.history.size() < 4) {
    d["verdict"] = nullptr;
    d["note"] = "convergence diagnostic needs at least 4 truncations";
    return d;
  }
  d.update(to_json(convergence_diagnostic(v, t)));
  return d;
}

json repair_json(const PreparedCovariance& p) {
  json d = {{"type", "covariance"}, {"jitter", p.jitter}, {"repaired", p.repair.has_value()}};
  if (p.used.min_eigen_estimate()) d["min_eigen"] = *p.used.min_eigen_estimate();
  if (p.repair) {
    d["repair"] = {{"min_eigen_before", p.repair->min_eigen_before},
                   {"clipped_eigenvalues", p.repair->clipped_eigenvalues},
                   {"frobenius_change", p.repair->frobenius_change},
                   {"max_entry_change", p.repair->max_entry_change}};
  }
  return d;
}

void run_criteria(const RunConfig& c, SimulationReport& report) {
  if (c.coeffs.empty()) throw ValidationError("criteria: --coeffs is required");
  const CoefficientSequence a = resolve_coefficients(c.coeffs);
  const CovarianceKernel kernel = make_kernel(resolve_kernel_descriptor(c.kernel));
  std::vector<std::size_t> ts = c.truncations;
  if (ts.empty()) ts = {a.size()};
  const DiagnosticThresholds thresholds{c.plateau_threshold, c.growth_slope};

  report.criterion_values.push_back(mr_sum(a, ts));
  report.criterion_values.push_back(theorem1_sum(a, kernel, ts));
  report.criterion_values.push_back(gaussian_condition_sum(a, kernel, ts));
  if (c.weight_b) report.criterion_values.push_back(weighted_sum(a, *c.weight_b, ts));
  for (const auto& v : report.criterion_values) report.diagnostics.push_back(criterion_diagnostic(v, thresholds));
}

ExitStatus run_simulate(const RunConfig& c, SimulationReport& report) {
  if (c.coeffs.empty()) throw ValidationError("simulate: --coeffs is required");
  const CoefficientSequence a = resolve_coefficients(c.coeffs);
  const CovarianceKernel kernel = make_kernel(resolve_kernel_descriptor(c.kernel));
  SimulationConfig sim;
  sim.N = c.N == 0 ? a.size() : c.N;
  sim.replicates = c.replicates;
  sim.seed = c.seed;
  sim.field = field_from_string(c.field);
  sim.repair = c.repair;
  sim.sigma_margin = c.sigma_margin;
  sim.psd_tolerance = c.psd_tolerance;
  std::vector<BoundName> bounds;
  for (const auto& b : c.bounds) bounds.push_back(bound_name_from_string(b));

  const SimulationOutcome out = run_bound_suite(a, kernel, sim, bounds);
  report.criterion_values = {out.theorem1, out.gaussian};
  report.bound_reports = out.bounds;
  report.estimates = {{"sup_sq", out.stats.sup_sq}, {"sup_abs", out.stats.sup_abs}, {"end_sq", out.stats.end_sq}};
  if (out.stats.blocks) {
    for (std::size_t k = 0; k < out.stats.blocks->per_block.size(); ++k) {
      report.estimates.push_back({"block_" + std::to_string(k) + "_sq", out.stats.blocks->per_block[k]});
    }
    report.estimates.push_back({"blocks_total_sq", out.stats.blocks->total});
  }
  report.diagnostics.push_back(repair_json(out.prepared));

  if (!c.csv.empty()) {
    const SampleMatrix samples = sample_gaussian(out.prepared, sim);
    CoefficientSequence coeffs = a.size() >= sim.N ? a.folded_prefix(sim.N) : a.padded(sim.N);
    if (const auto* scales = kernel.scales(); scales != nullptr && !scales->empty()) coeffs = coeffs.rescaled(*scales);
    write_replicate_maxima_csv(samples, coeffs, c.csv);
  }
  for (const auto& b : out.bounds) {
    if (b.verdict == BoundVerdict::fail) return kBoundFailure;
  }
  return kOk;
}

void run_schur(const RunConfig& c, SimulationReport& report) {
  std::vector<std::size_t> grid = c.grid;
  if (grid.empty()) grid = {256, 512, 1024, 2048};
  const SchurEstimate est = schur_bound_estimate(c.a_exp, c.b_exp, c.c_exp, grid);
  json ratios = json::array();
  for (const auto& p : est.ratios) ratios.push_back({{"N", p.N}, {"R", p.value}});
  bool plateau = !est.growth.empty();
  for (double g : est.growth) plateau = plateau && g <= c.plateau_ratio;
  report.diagnostics.push_back({{"type", "schur"},
                                {"a", est.a_exp},
                                {"b", est.b_exp},
                                {"c", est.c_exp},
                                {"admissible", est.admissible},
                                {"ratios", ratios},
                                {"growth", est.growth},
                                {"plateau_ratio", c.plateau_ratio},
                                {"plateau", plateau}});
}

void run_measure(const RunConfig& c, SimulationReport& report) {
  if (c.measure_spec.empty()) throw ValidationError("measure: --spec is required");
  const MeasureSpec mu = resolve_measure(c.measure_spec);
  const IndexRange range{c.range_lo, c.range_hi};
  const DecayFit fit = decay_fit(mu, range);
  json d = {{"type", "measure"},
            {"measure", mu.name()},
            {"support", mu.support()},
            {"fourier_0", mu.fourier(0).real()},
            {"decay_fit",
             {{"K_hat", fit.K_hat},
              {"a_hat", fit.a_hat},
              {"max_violation", fit.max_violation},
              {"range", {fit.fit_range.lo, fit.fit_range.hi}},
              {"points_used", fit.points_used}}}};
  if (range.hi - range.lo >= 3) {
    const WitnessResult w = fourier_dimension_witness(mu, c.alpha, range, c.smallness);
    d["witness"] = {{"witness", w.witness},
                    {"alpha", w.alpha},
                    {"lower_statistic", w.lower_statistic},
                    {"upper_statistic", w.upper_statistic}};
  }
  report.diagnostics.push_back(d);
  if (!c.csv.empty()) save_fourier_table_csv(mu, range, c.csv);
}

void run_ae_probe(const RunConfig& c, SimulationReport& report) {
  if (c.coeffs.empty()) throw ValidationError("ae-probe: --coeffs is required");
  if (c.measure.empty()) throw ValidationError("ae-probe: --measure is required");
  const CoefficientSequence a = resolve_coefficients(c.coeffs);
  const MeasureSpec mu = resolve_measure(c.measure);
  AeProbeOptions options;
  options.tolerance = c.tolerance;
  const AeProbeResult r = ae_probe(a, mu, c.truncs, c.points, c.seed, options);
  report.diagnostics.push_back({{"type", "ae_probe"},
                                {"measure", mu.name()},
                                {"truncations", r.truncations},
                                {"median_gaps", r.median_gaps},
                                {"median_trend_decreasing", r.median_trend_decreasing},
                                {"fraction_below_tolerance", r.fraction_below_tolerance},
                                {"verdict", r.verdict == ProbeVerdict::converging ? "converging" : "inconclusive"}});
  if (!c.csv.empty()) write_ae_probe_csv(r, c.csv);
}

std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
}

}  // namespace

json to_json(const RunConfig& c) {
  json kernel;
  if (!c.kernel.empty() && c.kernel.front() == '{') {
    kernel = json::parse(c.kernel, nullptr, false);
    if (kernel.is_discarded()) kernel = c.kernel;
  } else {
    kernel = c.kernel;
  }
  return {{"command", c.command},
          {"coeffs", c.coeffs},
          {"kernel", kernel},
          {"truncations", c.truncations},
          {"N", c.N},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"bounds", c.bounds},
          {"field", c.field},
          {"repair", c.repair},
          {"sigma_margin", c.sigma_margin},
          {"psd_tolerance", c.psd_tolerance},
          {"weight_b", c.weight_b ? json(*c.weight_b) : json(nullptr)},
          {"a_exp", c.a_exp},
          {"b_exp", c.b_exp},
          {"c_exp", c.c_exp},
          {"grid", c.grid},
          {"plateau_ratio", c.plateau_ratio},
          {"measure_spec", c.measure_spec},
          {"range_lo", c.range_lo},
          {"range_hi", c.range_hi},
          {"alpha", c.alpha},
          {"smallness", c.smallness},
          {"measure", c.measure},
          {"truncs", c.truncs},
          {"points", c.points},
          {"tolerance", c.tolerance},
          {"plateau_threshold", c.plateau_threshold},
          {"growth_slope", c.growth_slope},
          {"output", c.output},
          {"format", c.format},
          {"csv", c.csv}};
}

void merge_from_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError("config: unknown key '" + key + "'");
    try {
      it->second(c, value);
    } catch (const json::exception& e) {
      throw ValidationError("config: bad value for '" + key + "': " + e.what());
    }
  }
}

RunResult run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  SimulationReport& report = result.report;
  report.command = config.command;
  report.config = to_json(config);
  report.seed = config.seed;

  if (config.command == "criteria") {
    run_criteria(config, report);
  } else if (config.command == "simulate") {
    result.status = run_simulate(config, report);
  } else if (config.command == "schur") {
    run_schur(config, report);
  } else if (config.command == "measure") {
    run_measure(config, report);
  } else if (config.command == "ae-probe") {
    run_ae_probe(config, report);
  } else {
    throw ValidationError("unknown command '" + config.command + "' (criteria, simulate, schur, measure, ae-probe)");
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

int main_entry(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Convergence criteria and maximal-inequality checks for random series"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::int64_t> range;
  bool no_repair = false;

  try {
    config_path = find_config_path(argc, argv);
    if (!config_path.empty()) merge_from_json(cfg, load_json_file(config_path));

    app.add_option("--config", config_path, "JSON file with any of the run settings; flags override it");
    app.add_option("-o,--output", cfg.output, "report path (default: $MRSERIES_OUTPUT_DIR/<command>.<ext> or stdout)");
    app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto* criteria = app.add_subcommand("criteria", "evaluate the convergence criteria");
    criteria->add_option("--coeffs", cfg.coeffs, "coefficient file or generator");
    criteria->add_option("--kernel", cfg.kernel, "kernel descriptor");
    criteria->add_option("--trunc", cfg.truncations, "truncations N[,N...]")->delimiter(',');
    criteria->add_option("-b,--weight-b", cfg.weight_b, "also evaluate the weighted criterion with exponent b");
    criteria->add_option("--plateau-threshold", cfg.plateau_threshold);
    criteria->add_option("--growth-slope", cfg.growth_slope);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the maximal inequalities");
    simulate->add_option("--coeffs", cfg.coeffs, "coefficient file or generator");
    simulate->add_option("--kernel", cfg.kernel, "kernel descriptor");
    simulate->add_option("-N", cfg.N, "truncation (default: coefficient length)");
    simulate->add_option("--reps", cfg.replicates, "replicates");
    simulate->add_option("--seed", cfg.seed);
    simulate->add_option("--bounds", cfg.bounds, "lemma,theorem,blocks,sudakov")->delimiter(',');
    simulate->add_option("--field", cfg.field)->check(CLI::IsMember({"real", "complex"}));
    simulate->add_flag("--no-repair", no_repair, "fail instead of clipping an indefinite covariance");
    simulate->add_option("--sigma-margin", cfg.sigma_margin);
    simulate->add_option("--psd-tolerance", cfg.psd_tolerance);
    simulate->add_option("--csv", cfg.csv, "write per-replicate maxima");

    auto* schur = app.add_subcommand("schur", "Schur-test row ratios for power-law kernels");
    schur->add_option("-a", cfg.a_exp);
    schur->add_option("-b", cfg.b_exp);
    schur->add_option("-c", cfg.c_exp);
    schur->add_option("--grid", cfg.grid, "N,N,...")->delimiter(',');
    schur->add_option("--plateau-ratio", cfg.plateau_ratio);

    auto* measure = app.add_subcommand("measure", "Fourier decay of a measure");
    measure->add_option("--spec", cfg.measure_spec, "cantor | lebesgue | synthetic:a[:K[:max_n]] | table:FILE[:K:a]");
    measure->add_option("--range", range, "A,B")->delimiter(',')->expected(2);
    measure->add_option("--alpha", cfg.alpha);
    measure->add_option("--smallness", cfg.smallness);
    measure->add_option("--csv", cfg.csv, "write the Fourier table over the range");

    auto* probe = app.add_subcommand("ae-probe", "pointwise convergence probe of a trigonometric series");
    probe->add_option("--coeffs", cfg.coeffs, "coefficient file or generator");
    probe->add_option("--measure", cfg.measure, "measure to draw points from");
    probe->add_option("--truncs", cfg.truncs, "M,M,...")->delimiter(',');
    probe->add_option("--points", cfg.points);
    probe->add_option("--seed", cfg.seed);
    probe->add_option("--tolerance", cfg.tolerance);
    probe->add_option("--csv", cfg.csv, "write t, M, |S_M(t)|, oscillation");

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kValidationError;
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    if (no_repair) cfg.repair = false;
    if (range.size() == 2) {
      cfg.range_lo = range[0];
      cfg.range_hi = range[1];
    }
    if (cfg.command.empty()) throw ValidationError("no command given (criteria, simulate, schur, measure, ae-probe)");

    const RunResult result = run(cfg);
    const EmitFormat format = cfg.format == "csv" ? EmitFormat::csv_summary : EmitFormat::json;
    std::string output = cfg.output;
    if (output.empty()) {
      if (const char* dir = std::getenv("MRSERIES_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
        output = (std::filesystem::path(dir) / (cfg.command + (format == EmitFormat::json ? ".json" : ".csv"))).string();
      }
    }
    if (output.empty()) {
      std::cout << emit(result.report, format);
    } else {
      emit_to_file(result.report, format, output);
    }
    if (result.status == kBoundFailure) std::cerr << "bound failure: at least one inequality was violated\n";
    return result.status;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace mrseries::cli

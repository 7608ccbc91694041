#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrseries/cli.hpp"
#include "mrseries/error.hpp"
#include "mrseries/report.hpp"

using namespace mrseries;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mrseries_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mrseries");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json without_wall_time(json j) {
  j.erase("wall_time");
  j["config"].erase("output");
  return j;
}

SimulationReport sample_report() {
  SimulationReport r;
  r.command = "simulate";
  r.config = {{"seed", 3}};
  CriterionValue v;
  v.kind = CriterionKind::weighted;
  v.b = 0.25;
  v.partial_value = 2.5;
  v.truncation = 10;
  v.history = {{1, 1.0}, {10, 2.5}};
  r.criterion_values.push_back(v);
  BoundReport b;
  b.bound_name = BoundName::sudakov;
  b.theoretical = 4.0;
  b.empirical = {1.0, 0.01};
  b.verdict = BoundVerdict::pass;
  b.margin_sigmas = 300.0;
  b.criterion_value = 4.0;
  r.bound_reports = {b, b};
  r.bound_reports[1].bound_name = BoundName::lemma;
  r.bound_reports[1].margin_sigmas.reset();
  r.estimates.push_back({"sup_abs", {1.0, 0.01}});
  r.seed = 3;
  r.wall_time = 0.5;
  return r;
}

}  // namespace

TEST(Report, JsonRoundTrip) {
  const auto r = sample_report();
  EXPECT_EQ(report_from_json(json::parse(emit(r, EmitFormat::json))), r);
}

TEST(Report, EmptyDiagnosticsIsArray) {
  const auto j = json::parse(emit(SimulationReport{}, EmitFormat::json));
  EXPECT_TRUE(j.at("diagnostics").is_array());
  EXPECT_TRUE(j.at("diagnostics").empty());
  EXPECT_EQ(j.at("schema_version"), "1.0");
}

TEST(Report, UnknownMajorRejected) {
  auto j = to_json(sample_report());
  j["schema_version"] = "2.0";
  EXPECT_THROW(report_from_json(j), ValidationError);
  j["schema_version"] = "1.7";
  EXPECT_NO_THROW(report_from_json(j));
}

TEST(Report, CsvSummaryRowPerBound) {
  const auto csv = emit(sample_report(), EmitFormat::csv_summary);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 1u + 2u);
  EXPECT_EQ(csv.rfind("bound,criterion,criterion_value,theoretical,empirical,stderr,margin_sigmas,verdict", 0), 0u);
}

TEST(Report, NonFiniteBecomesNull) {
  auto r = sample_report();
  r.bound_reports[0].margin_sigmas = std::numeric_limits<double>::infinity();
  const auto j = to_json(r);
  EXPECT_TRUE(j["bound_reports"][0]["margin_sigmas"].is_null());
}

TEST(Report, UnwritablePathIsIoError) {
  EXPECT_THROW(emit_to_file(sample_report(), EmitFormat::json, "/proc/nope/report.json"), IoError);
}

TEST(BoundVerdicts, ViolationFails) {
  MaximalStatistics st;
  const auto a = CoefficientSequence::one_sided(std::vector<double>{1.0});
  st.N = 1;
  st.replicates = 1000;
  st.coefficient_fingerprint = a.fingerprint();
  st.sup_abs = {3.0, 0.1};
  const auto b = bound_report(st, a, identity_kernel(), 1, BoundName::sudakov);
  EXPECT_EQ(b.verdict, BoundVerdict::fail);
  EXPECT_NEAR(*b.margin_sigmas, -10.0, 1e-12);
}

TEST(Cli, CriteriaDelta) {
  const auto out = scratch("criteria.json");
  ASSERT_EQ(invoke({"criteria", "--coeffs", "delta:5", "--kernel", "identity", "--trunc", "1,5", "-o", out.string()}),
            cli::kOk);
  const auto j = json::parse(slurp(out));
  EXPECT_EQ(j["criterion_values"][0]["kind"], "MR");
  EXPECT_EQ(j["criterion_values"][0]["partial_value"], 1.0);
  EXPECT_EQ(j["criterion_values"][1]["kind"], "theorem1_L");
  EXPECT_EQ(j["criterion_values"][1]["partial_value"], 1.0);
}

TEST(Cli, SimulateIsDeterministic) {
  const auto a = scratch("sim_a.json"), b = scratch("sim_b.json");
  const std::vector<std::string> base = {"simulate", "--coeffs", "power:1:32", "--kernel", "power_decay:1:1",
                                         "-N",       "32",       "--reps",     "500",      "--seed",
                                         "42"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"-o", a.string()});
  args_b.insert(args_b.end(), {"-o", b.string()});
  ASSERT_EQ(invoke(args_a), cli::kOk);
  ASSERT_EQ(invoke(args_b), cli::kOk);
  EXPECT_EQ(without_wall_time(json::parse(slurp(a))), without_wall_time(json::parse(slurp(b))));
}

TEST(Cli, EmbeddedConfigReproducesReport) {
  const auto first = scratch("cfg_first.json");
  ASSERT_EQ(invoke({"simulate", "--coeffs", "geometric:0.5:16", "--reps", "300", "--seed", "9", "-o", first.string()}),
            cli::kOk);
  const auto report = json::parse(slurp(first));
  auto config = report["config"];
  const auto second = scratch("cfg_second.json");
  config["output"] = second.string();
  const auto cfg_path = scratch("cfg.json");
  std::ofstream(cfg_path) << config.dump();
  ASSERT_EQ(invoke({"--config", cfg_path.string()}), cli::kOk);
  const auto again = json::parse(slurp(second));
  EXPECT_EQ(without_wall_time(again), without_wall_time(report));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto cfg_path = scratch("override.json");
  std::ofstream(cfg_path) << R"({"command": "criteria", "coeffs": "delta:3", "truncations": [3]})";
  const auto out = scratch("override_out.json");
  ASSERT_EQ(invoke({"--config", cfg_path.string(), "criteria", "--coeffs", "power:1:4", "-o", out.string()}), cli::kOk);
  const auto j = json::parse(slurp(out));
  EXPECT_EQ(j["config"]["coeffs"], "power:1:4");
  EXPECT_EQ(j["criterion_values"][0]["truncation"], 3);
}

TEST(Cli, UnknownConfigKeyIsValidationError) {
  const auto cfg_path = scratch("bad.json");
  std::ofstream(cfg_path) << R"({"command": "criteria", "nonsense": 1})";
  EXPECT_EQ(invoke({"--config", cfg_path.string()}), cli::kValidationError);
}

TEST(Cli, ExitStatuses) {
  EXPECT_EQ(invoke({"criteria", "--coeffs", "/nonexistent/a.csv"}), cli::kValidationError);
  EXPECT_EQ(invoke({"bogus"}), cli::kValidationError);
  EXPECT_EQ(invoke({"simulate", "--coeffs", "power:1:64", "--kernel", "power_decay:1:1", "--no-repair", "--reps",
                    "10", "-o", scratch("x.json").string()}),
            cli::kNumericalError);
}

TEST(Cli, SchurReport) {
  const auto out = scratch("schur.json");
  ASSERT_EQ(invoke({"schur", "-a", "0.2", "-b", "0.1", "-c", "0.1", "--grid", "16,32", "-o", out.string()}), cli::kOk);
  const auto d = json::parse(slurp(out))["diagnostics"][0];
  EXPECT_EQ(d["admissible"], false);
  EXPECT_EQ(d["ratios"].size(), 2u);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch("envdir");
  fs::remove_all(dir);
  ::setenv("MRSERIES_OUTPUT_DIR", dir.string().c_str(), 1);
  const int status = invoke({"measure", "--spec", "synthetic:0.5:1:256", "--range", "1,256", "--format", "csv"});
  ::unsetenv("MRSERIES_OUTPUT_DIR");
  ASSERT_EQ(status, cli::kOk);
  EXPECT_TRUE(fs::exists(dir / "measure.csv"));
}

TEST(Cli, AeProbeWritesCsv) {
  const auto out = scratch("probe.json"), csv = scratch("probe.csv");
  ASSERT_EQ(invoke({"ae-probe", "--coeffs", "sobolev:1.6:1000", "--measure", "cantor", "--truncs", "10,100,1000",
                    "--points", "20", "--seed", "1", "--csv", csv.string(), "-o", out.string()}),
            cli::kOk);
  EXPECT_EQ(json::parse(slurp(out))["diagnostics"][0]["verdict"], "converging");
  EXPECT_EQ(slurp(csv).rfind("t,M,abs_S,osc", 0), 0u);
}

TEST(RunConfig, JsonRoundTrip) {
  cli::RunConfig c;
  c.command = "schur";
  c.weight_b = 0.3;
  c.grid = {4, 8};
  c.kernel = R"({"type":"power_decay","K":1,"a":1})";
  cli::RunConfig back;
  cli::merge_from_json(back, cli::to_json(c));
  EXPECT_EQ(cli::to_json(back), cli::to_json(c));
}

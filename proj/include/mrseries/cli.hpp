#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrseries/report.hpp"

namespace mrseries::cli {

enum ExitStatus : int {
  kOk = 0,
  kValidationError = 2,
  kNumericalError = 3,
  kBoundFailure = 4,
};

/// Every field a run can depend on. Reports embed it verbatim, so re-running
/// the echoed config reproduces the report.
struct RunConfig {
  std::string command;  // criteria | simulate | schur | measure | ae-probe
  std::string coeffs;
  std::string kernel = "identity";
  std::vector<std::size_t> truncations;
  std::size_t N = 0;
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  std::vector<std::string> bounds = {"lemma", "theorem", "blocks", "sudakov"};
  std::string field = "real";
  bool repair = true;
  double sigma_margin = 3.0;
  double psd_tolerance = 1e-8;
  std::optional<double> weight_b;
  double a_exp = 0.0;
  double b_exp = 0.0;
  double c_exp = 0.0;
  std::vector<std::size_t> grid;
  double plateau_ratio = 1.05;
  std::string measure_spec;
  std::int64_t range_lo = 1;
  std::int64_t range_hi = 1;
  double alpha = 0.5;
  double smallness = 0.5;
  std::string measure;
  std::vector<std::size_t> truncs;
  std::size_t points = 200;
  double tolerance = 1e-2;
  double plateau_threshold = 1e-4;
  double growth_slope = -0.5;
  std::string output;
  std::string format = "json";
  std::string csv;
};

nlohmann::json to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void merge_from_json(RunConfig& c, const nlohmann::json& j);

struct RunResult {
  SimulationReport report;
  ExitStatus status = kOk;
};

/// Dispatches to the module pipeline. Library errors propagate.
RunResult run(const RunConfig& config);

/// Parses argv, runs, writes outputs and returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace mrseries::cli

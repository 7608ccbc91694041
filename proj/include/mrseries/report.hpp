#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrseries/criteria.hpp"
#include "mrseries/montecarlo.hpp"

namespace mrseries {

inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;
inline constexpr const char* kToolVersion = "0.3.0";

struct NamedEstimate {
  std::string name;
  Estimate estimate;
  friend bool operator==(const NamedEstimate&, const NamedEstimate&) = default;
};

struct SimulationReport {
  std::string schema_version = std::to_string(kSchemaMajor) + "." + std::to_string(kSchemaMinor);
  std::string tool_version = kToolVersion;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<CriterionValue> criterion_values;
  std::vector<BoundReport> bound_reports;
  std::vector<NamedEstimate> estimates;
  std::vector<nlohmann::json> diagnostics;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  friend bool operator==(const SimulationReport&, const SimulationReport&) = default;
};

nlohmann::json to_json(const CriterionValue& v);
CriterionValue criterion_value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundReport& b);
BoundReport bound_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConvergenceVerdict& v);

nlohmann::json to_json(const SimulationReport& report);
/// Rejects reports whose schema major version differs from kSchemaMajor.
SimulationReport report_from_json(const nlohmann::json& j);

enum class EmitFormat { json, csv_summary };

/// JSON report or a CSV summary with one row per bound report.
std::string emit(const SimulationReport& report, EmitFormat format);
void emit_to_file(const SimulationReport& report, EmitFormat format, const std::filesystem::path& path);

}  // namespace mrseries

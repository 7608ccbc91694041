#include "mrseries/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mrseries/error.hpp"

namespace mrseries {

using nlohmann::json;

namespace {

// Non-finite doubles are written as null and read back as NaN.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double get_num(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("report field '") + key + "' is missing");
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ValidationError(std::string("report field '") + key + "' must be a number");
  return v.get<double>();
}

json to_json(const Estimate& e) { return {{"mean", num(e.mean)}, {"stderr", num(e.std_error)}}; }

Estimate estimate_from_json(const json& j) { return {get_num(j, "mean"), get_num(j, "stderr")}; }

std::string csv_number(double x) {
  if (!std::isfinite(x)) return "";
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

json to_json(const CriterionValue& v) {
  json history = json::array();
  for (const auto& p : v.history) history.push_back({{"N", p.N}, {"value", num(p.value)}});
  json j = {{"kind", to_string(v.kind)},
            {"partial_value", num(v.partial_value)},
            {"truncation", v.truncation},
            {"history", history}};
  if (v.kind == CriterionKind::weighted) j["b"] = v.b;
  return j;
}

CriterionValue criterion_value_from_json(const json& j) {
  try {
    CriterionValue v;
    v.kind = criterion_kind_from_string(j.at("kind").get<std::string>());
    v.b = j.value("b", 0.0);
    v.partial_value = get_num(j, "partial_value");
    v.truncation = j.at("truncation").get<std::size_t>();
    for (const auto& p : j.at("history")) v.history.push_back({p.at("N").get<std::size_t>(), get_num(p, "value")});
    return v;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed criterion value: ") + e.what());
  }
}

json to_json(const BoundReport& b) {
  return {{"bound_name", to_string(b.bound_name)},
          {"theoretical", num(b.theoretical)},
          {"empirical", to_json(b.empirical)},
          {"verdict", to_string(b.verdict)},
          {"margin_sigmas", b.margin_sigmas ? num(*b.margin_sigmas) : json(nullptr)},
          {"criterion_value", num(b.criterion_value)}};
}

BoundReport bound_report_from_json(const json& j) {
  try {
    BoundReport b;
    b.bound_name = bound_name_from_string(j.at("bound_name").get<std::string>());
    b.theoretical = get_num(j, "theoretical");
    b.empirical = estimate_from_json(j.at("empirical"));
    b.verdict = bound_verdict_from_string(j.at("verdict").get<std::string>());
    if (j.contains("margin_sigmas") && !j.at("margin_sigmas").is_null()) b.margin_sigmas = get_num(j, "margin_sigmas");
    b.criterion_value = get_num(j, "criterion_value");
    return b;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed bound report: ") + e.what());
  }
}

json to_json(const ConvergenceVerdict& v) {
  return {{"verdict", to_string(v.verdict)},
          {"growth_exponent_estimate", num(v.growth_exponent_estimate)},
          {"last_relative_increment", num(v.last_relative_increment)}};
}

json to_json(const SimulationReport& report) {
  json criteria = json::array();
  for (const auto& c : report.criterion_values) criteria.push_back(to_json(c));
  json bounds = json::array();
  for (const auto& b : report.bound_reports) bounds.push_back(to_json(b));
  json estimates = json::array();
  for (const auto& e : report.estimates) {
    json item = to_json(e.estimate);
    item["name"] = e.name;
    estimates.push_back(item);
  }
  return {{"schema_version", report.schema_version},
          {"tool_version", report.tool_version},
          {"command", report.command},
          {"config", report.config},
          {"criterion_values", criteria},
          {"bound_reports", bounds},
          {"estimates", estimates},
          {"diagnostics", report.diagnostics},
          {"seed", report.seed},
          {"wall_time", num(report.wall_time)}};
}

SimulationReport report_from_json(const json& j) {
  try {
    SimulationReport r;
    r.schema_version = j.at("schema_version").get<std::string>();
    const auto dot = r.schema_version.find('.');
    int major = -1;
    try {
      major = std::stoi(r.schema_version.substr(0, dot));
    } catch (const std::exception&) {
      throw ValidationError("unreadable schema version '" + r.schema_version + "'");
    }
    if (major != kSchemaMajor) {
      throw UnsupportedConfiguration("report schema " + r.schema_version + " is not supported (expected major " +
                                     std::to_string(kSchemaMajor) + ")");
    }
    r.tool_version = j.at("tool_version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.config = j.at("config");
    for (const auto& c : j.at("criterion_values")) r.criterion_values.push_back(criterion_value_from_json(c));
    for (const auto& b : j.at("bound_reports")) r.bound_reports.push_back(bound_report_from_json(b));
    for (const auto& e : j.at("estimates")) r.estimates.push_back({e.at("name").get<std::string>(), estimate_from_json(e)});
    for (const auto& d : j.at("diagnostics")) r.diagnostics.push_back(d);
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_time = get_num(j, "wall_time");
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

std::string emit(const SimulationReport& report, EmitFormat format) {
  if (format == EmitFormat::json) return to_json(report).dump(2) + "\n";
  std::ostringstream out;
  out << "bound,criterion,criterion_value,theoretical,empirical,stderr,margin_sigmas,verdict\n";
  for (const auto& b : report.bound_reports) {
    const bool uses_l = b.bound_name == BoundName::theorem_8L || b.bound_name == BoundName::blocks_4L;
    out << to_string(b.bound_name) << ',' << (uses_l ? "theorem1_L" : "gaussian") << ','
        << csv_number(b.criterion_value) << ',' << csv_number(b.theoretical) << ',' << csv_number(b.empirical.mean)
        << ',' << csv_number(b.empirical.std_error) << ',' << (b.margin_sigmas ? csv_number(*b.margin_sigmas) : "")
        << ',' << to_string(b.verdict) << '\n';
  }
  return out.str();
}

void emit_to_file(const SimulationReport& report, EmitFormat format, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << emit(report, format);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mrseries

#include "mrseries/sequence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mrseries/error.hpp"
#include "mrseries/rng.hpp"

namespace mrseries {

namespace {

void require_finite(const std::vector<cdouble>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag())) {
      throw ValidationError("coefficient " + std::to_string(i) + " is not finite");
    }
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": cannot parse number '" + t + "'");
  }
}

cdouble parse_json_scalar(const nlohmann::json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ValidationError(where + ": expected a number or a [re, im] pair");
}

CoefficientSequence from_natural_map(const std::map<std::int64_t, cdouble>& entries) {
  if (entries.empty()) throw ValidationError("coefficient set is empty");
  const std::int64_t lo = entries.begin()->first;
  if (lo >= 1) {
    std::vector<cdouble> v(static_cast<std::size_t>(entries.rbegin()->first), cdouble{});
    for (const auto& [n, x] : entries) v[static_cast<std::size_t>(n - 1)] = x;
    return CoefficientSequence::one_sided(std::move(v));
  }
  std::int64_t M = 0;
  for (const auto& [n, x] : entries) M = std::max(M, n < 0 ? -n : n);
  std::vector<cdouble> v(static_cast<std::size_t>(2 * M + 1), cdouble{});
  for (const auto& [n, x] : entries) v[static_cast<std::size_t>(n + M)] = x;
  return CoefficientSequence::two_sided(std::move(v));
}

}  // namespace

std::size_t fold_position(std::int64_t n) {
  if (n == 0) return 1;
  if (n > 0) return static_cast<std::size_t>(2 * n);
  return static_cast<std::size_t>(-2 * n + 1);
}

std::int64_t unfold_position(std::size_t k) {
  if (k == 0) throw IndexError("folded positions start at 1");
  if (k == 1) return 0;
  const auto j = static_cast<std::int64_t>(k / 2);
  return (k % 2 == 0) ? j : -j;
}

CoefficientSequence::CoefficientSequence(Sidedness sidedness, std::vector<cdouble> values)
    : sidedness_(sidedness), values_(std::move(values)) {
  require_finite(values_);
}

CoefficientSequence CoefficientSequence::one_sided(std::vector<cdouble> values) {
  return CoefficientSequence(Sidedness::one_sided, std::move(values));
}

CoefficientSequence CoefficientSequence::one_sided(const std::vector<double>& values) {
  return one_sided(std::vector<cdouble>(values.begin(), values.end()));
}

CoefficientSequence CoefficientSequence::two_sided(std::vector<cdouble> values) {
  if (values.size() % 2 == 0) {
    throw ValidationError("two-sided coefficients need odd length (a_-M..a_M)");
  }
  const auto M = static_cast<std::int64_t>(values.size() / 2);
  std::vector<cdouble> folded(values.size());
  for (std::int64_t n = -M; n <= M; ++n) {
    folded[fold_position(n) - 1] = values[static_cast<std::size_t>(n + M)];
  }
  return CoefficientSequence(Sidedness::two_sided, std::move(folded));
}

std::size_t CoefficientSequence::half_width() const {
  return is_two_sided() ? values_.size() / 2 : values_.size();
}

cdouble CoefficientSequence::at(std::int64_t n) const {
  if (!is_two_sided()) {
    if (n < 1 || static_cast<std::size_t>(n) > values_.size()) return {};
    return values_[static_cast<std::size_t>(n - 1)];
  }
  const std::size_t k = fold_position(n);
  return k <= values_.size() ? values_[k - 1] : cdouble{};
}

cdouble CoefficientSequence::folded(std::size_t k) const {
  if (k == 0 || k > values_.size()) {
    throw IndexError("folded position " + std::to_string(k) + " outside [1, " + std::to_string(values_.size()) + "]");
  }
  return values_[k - 1];
}

std::int64_t CoefficientSequence::index_at(std::size_t k) const {
  return is_two_sided() ? unfold_position(k) : static_cast<std::int64_t>(k);
}

CoefficientSequence CoefficientSequence::scaled(cdouble factor) const {
  CoefficientSequence out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

CoefficientSequence CoefficientSequence::padded(std::size_t n) const {
  if (is_two_sided()) throw ContractViolation("padding applies to one-sided sequences");
  CoefficientSequence out = *this;
  if (out.values_.size() < n) out.values_.resize(n, cdouble{});
  return out;
}

CoefficientSequence CoefficientSequence::folded_prefix(std::size_t n) const {
  if (n > values_.size()) throw SizeError("prefix longer than the sequence");
  return CoefficientSequence(Sidedness::one_sided, std::vector<cdouble>(values_.begin(), values_.begin() + n));
}

CoefficientSequence CoefficientSequence::rescaled(const std::vector<double>& scales) const {
  if (is_two_sided()) throw ContractViolation("rescaling applies to one-sided sequences");
  CoefficientSequence out = *this;
  const std::size_t n = std::min(scales.size(), out.values_.size());
  for (std::size_t i = 0; i < n; ++i) out.values_[i] *= scales[i];
  return out;
}

std::uint64_t CoefficientSequence::fingerprint() const {
  std::uint64_t h = splitmix64_mix(is_two_sided() ? 2 : 1);
  h = splitmix64_mix(h ^ values_.size());
  for (const auto& v : values_) {
    h = splitmix64_mix(h ^ std::bit_cast<std::uint64_t>(v.real()));
    h = splitmix64_mix(h ^ std::bit_cast<std::uint64_t>(v.imag()));
  }
  return h;
}

CoefficientSequence load_coefficients_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coefficient file " + path.string());
  std::map<std::int64_t, cdouble> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line_no == 1 && !fields.empty() && !trim(fields[0]).empty() &&
        std::isalpha(static_cast<unsigned char>(trim(fields[0])[0]))) {
      continue;  // header
    }
    if (fields.size() < 2 || fields.size() > 3) {
      throw ValidationError(where + ": expected 'index,re[,im]'");
    }
    const double idx = parse_double(fields[0], where + " field index");
    if (idx != std::floor(idx)) throw ValidationError(where + ": index must be an integer");
    const double re = parse_double(fields[1], where + " field re");
    const double im = fields.size() == 3 ? parse_double(fields[2], where + " field im") : 0.0;
    const auto n = static_cast<std::int64_t>(idx);
    if (!entries.emplace(n, cdouble{re, im}).second) {
      throw ValidationError(where + ": duplicate index " + std::to_string(n));
    }
  }
  return from_natural_map(entries);
}

CoefficientSequence coefficients_from_json(const nlohmann::json& j) {
  if (j.is_array()) {
    std::vector<cdouble> v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(parse_json_scalar(j[i], "values[" + std::to_string(i) + "]"));
    return CoefficientSequence::one_sided(std::move(v));
  }
  if (j.is_object() && j.contains("values")) {
    const std::string side = j.value("sidedness", "one-sided");
    std::vector<cdouble> v;
    const auto& arr = j.at("values");
    if (!arr.is_array()) throw ValidationError("values: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) v.push_back(parse_json_scalar(arr[i], "values[" + std::to_string(i) + "]"));
    if (side == "one-sided") return CoefficientSequence::one_sided(std::move(v));
    if (side == "two-sided") return CoefficientSequence::two_sided(std::move(v));
    throw ValidationError("sidedness: expected 'one-sided' or 'two-sided'");
  }
  throw ValidationError("coefficients: expected an array or an object with 'values'");
}

nlohmann::json coefficients_to_json(const CoefficientSequence& a) {
  nlohmann::json values = nlohmann::json::array();
  if (a.is_two_sided()) {
    const auto M = static_cast<std::int64_t>(a.half_width());
    for (std::int64_t n = -M; n <= M; ++n) values.push_back({a.at(n).real(), a.at(n).imag()});
  } else {
    for (std::size_t k = 1; k <= a.size(); ++k) values.push_back({a.folded(k).real(), a.folded(k).imag()});
  }
  return {{"sidedness", a.is_two_sided() ? "two-sided" : "one-sided"}, {"values", values}};
}

CoefficientSequence resolve_coefficients(const std::string& descriptor) {
  const std::filesystem::path p(descriptor);
  if (p.extension() == ".csv") return load_coefficients_csv(p);
  if (p.extension() == ".json") {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open coefficient file " + descriptor);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(descriptor + ": " + e.what());
    }
    return coefficients_from_json(j);
  }

  const auto parts = split(descriptor, ':');
  const std::string& kind = parts.empty() ? descriptor : parts[0];
  auto count = [&](std::size_t i) {
    if (parts.size() <= i) throw ValidationError("coefficient generator '" + descriptor + "' is missing a length");
    const double v = parse_double(parts[i], "coefficient generator length");
    if (v < 1 || v != std::floor(v)) throw ValidationError("coefficient generator length must be a positive integer");
    return static_cast<std::size_t>(v);
  };
  auto param = [&](std::size_t i) {
    if (parts.size() <= i) throw ValidationError("coefficient generator '" + descriptor + "' is missing a parameter");
    return parse_double(parts[i], "coefficient generator parameter");
  };
  auto two_sided = [](std::size_t M, auto&& f) {
    std::vector<cdouble> v(2 * M + 1);
    const auto m = static_cast<std::int64_t>(M);
    for (std::int64_t n = -m; n <= m; ++n) v[static_cast<std::size_t>(n + m)] = f(n);
    return CoefficientSequence::two_sided(std::move(v));
  };

  if (kind == "power") {
    const double p_exp = param(1);
    const std::size_t N = count(2);
    std::vector<cdouble> v(N);
    for (std::size_t n = 1; n <= N; ++n) v[n - 1] = std::pow(static_cast<double>(n), -p_exp);
    return CoefficientSequence::one_sided(std::move(v));
  }
  if (kind == "geometric") {
    const double q = param(1);
    const std::size_t N = count(2);
    std::vector<cdouble> v(N);
    for (std::size_t n = 1; n <= N; ++n) v[n - 1] = std::pow(q, static_cast<double>(n));
    return CoefficientSequence::one_sided(std::move(v));
  }
  if (kind == "delta") {
    std::vector<cdouble> v(count(1));
    v[0] = 1.0;
    return CoefficientSequence::one_sided(std::move(v));
  }
  if (kind == "sobolev") {
    const double s = param(1);
    return two_sided(count(2), [s](std::int64_t n) {
      return cdouble{1.0 / (1.0 + std::pow(std::abs(static_cast<double>(n)), s))};
    });
  }
  if (kind == "invlog") {
    return two_sided(count(1), [](std::int64_t n) {
      return cdouble{1.0 / std::log(2.0 + std::abs(static_cast<double>(n)))};
    });
  }
  if (kind == "nlog") {
    return two_sided(count(1), [](std::int64_t n) {
      if (n == 0) return cdouble{};
      const double m = std::abs(static_cast<double>(n));
      return cdouble{1.0 / (m * std::log(2.0 + m))};
    });
  }
  throw ValidationError("unknown coefficient descriptor '" + descriptor + "'");
}

}  // namespace mrseries

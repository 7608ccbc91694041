#include "mrseries/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mrseries/error.hpp"
#include "mrseries/rng.hpp"
#include "mrseries/summation.hpp"

namespace mrseries {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

double parse_double(std::string text, const std::string& where) {
  text.erase(0, text.find_first_not_of(" \t\r"));
  text.erase(text.find_last_not_of(" \t\r") + 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": cannot parse number '" + text + "'");
  }
}

// exp(2 pi i n t) with the phase reduced to [0, 1) before scaling.
cdouble unit_phase(std::int64_t n, double t) {
  double x = static_cast<double>(n) * t;
  x -= std::floor(x);
  const double angle = kTwoPi * x;
  return {std::cos(angle), std::sin(angle)};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

void require_range(IndexRange range) {
  if (range.lo < 1 || range.hi < range.lo) {
    throw RangeError("index range must satisfy 1 <= lo <= hi");
  }
}

}  // namespace

MeasureSpec MeasureSpec::cantor() {
  return MeasureSpec(CantorMiddleThirds{}, "middle-thirds Cantor set (ternary digits in {0, 2})");
}

MeasureSpec MeasureSpec::lebesgue() { return MeasureSpec(LebesgueMeasure{}, "whole circle, uniform"); }

MeasureSpec MeasureSpec::fourier_table(FourierTable table) {
  if (!(table.K > 0.0) || !std::isfinite(table.K)) throw ValidationError("fourier table envelope needs K > 0");
  if (!(table.a >= 0.0) || !std::isfinite(table.a)) throw ValidationError("fourier table envelope needs a >= 0");
  if (auto it = table.table.find(0); it != table.table.end()) {
    if (it->second != cdouble{1.0, 0.0}) throw ValidationError("fourier table must have mu^(0) = 1");
  } else {
    table.table.emplace(0, cdouble{1.0, 0.0});
  }
  for (const auto& [n, v] : table.table) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ValidationError("fourier table entry " + std::to_string(n) + " is not finite");
    }
    if (n == 0) continue;
    const double envelope = table.K * std::pow(std::abs(static_cast<double>(n)), -table.a);
    if (std::abs(v) > envelope * (1.0 + 1e-12)) {
      throw ValidationError("fourier table entry " + std::to_string(n) + " exceeds the envelope K|n|^-a");
    }
    if (n > 0) {
      if (auto neg = table.table.find(-n); neg != table.table.end()) {
        if (std::abs(neg->second - std::conj(v)) > 1e-12 * std::max(1.0, std::abs(v))) {
          throw ValidationError("fourier table entries at +-" + std::to_string(n) + " are not conjugate");
        }
      }
    }
  }
  return MeasureSpec(std::move(table), "tabulated Fourier coefficients");
}

MeasureSpec MeasureSpec::synthetic_power_law(double a, std::int64_t max_n, double K) {
  if (max_n < 1) throw ValidationError("synthetic table needs max_n >= 1");
  FourierTable t;
  t.K = K;
  t.a = a;
  for (std::int64_t n = 1; n <= max_n; ++n) {
    t.table.emplace_hint(t.table.end(), n, cdouble{K * std::pow(static_cast<double>(n), -a), 0.0});
  }
  return fourier_table(std::move(t));
}

cdouble MeasureSpec::fourier(std::int64_t n) const {
  return std::visit(
      [n](const auto& v) -> cdouble {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CantorMiddleThirds>) {
          return cantor_fourier(n);
        } else if constexpr (std::is_same_v<T, LebesgueMeasure>) {
          return n == 0 ? cdouble{1.0, 0.0} : cdouble{};
        } else {
          if (auto it = v.table.find(n); it != v.table.end()) return it->second;
          if (auto it = v.table.find(-n); it != v.table.end()) return std::conj(it->second);
          throw IndexError("Fourier coefficient " + std::to_string(n) + " is not tabulated");
        }
      },
      variant_);
}

bool MeasureSpec::samplable() const { return !std::holds_alternative<FourierTable>(variant_); }

std::string MeasureSpec::name() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CantorMiddleThirds>) {
          return "cantor_middle_thirds";
        } else if constexpr (std::is_same_v<T, LebesgueMeasure>) {
          return "lebesgue";
        } else {
          return "fourier_table";
        }
      },
      variant_);
}

cdouble cantor_fourier(std::int64_t n) {
  if (n == 0) return {1.0, 0.0};
  const std::uint64_t m = n < 0 ? static_cast<std::uint64_t>(-n) : static_cast<std::uint64_t>(n);
  if (m > static_cast<std::uint64_t>(kCantorIndexBudget)) {
    throw RangeError("cantor_fourier: |n| exceeds 3^20");
  }
  // mu^(n) = prod_k exp(-2 pi i n 3^-k) cos(2 pi n 3^-k) and sum_k 3^-k = 1/2,
  // so the phases collapse to (-1)^n and the coefficient is real.
  double product = (m % 2 == 0) ? 1.0 : -1.0;
  std::uint64_t pow3 = 1;
  double pow3_d = 1.0;
  for (int k = 1; k <= 80; ++k) {
    pow3_d *= 3.0;
    const double raw_angle = kTwoPi * static_cast<double>(m) / pow3_d;
    // Every later factor is closer to 1 than this one.
    if (0.5 * raw_angle * raw_angle < 1e-15) break;
    double frac;
    if (k <= 40) {
      pow3 *= 3;
      frac = static_cast<double>(m % pow3) / static_cast<double>(pow3);
    } else {
      frac = static_cast<double>(m) / pow3_d;
    }
    if (frac > 0.5) frac -= 1.0;
    product *= std::cos(kTwoPi * frac);
  }
  return {product, 0.0};
}

DecayFit decay_fit(const MeasureSpec& mu, IndexRange range, double window_ratio) {
  require_range(range);
  if (!(window_ratio > 1.0)) throw ValidationError("decay_fit window ratio must exceed 1");

  std::vector<double> mags(static_cast<std::size_t>(range.hi - range.lo + 1));
  bool any_positive = false;
  for (std::int64_t n = range.lo; n <= range.hi; ++n) {
    const double v = std::abs(mu.fourier(n));
    mags[static_cast<std::size_t>(n - range.lo)] = v;
    any_positive = any_positive || v > 0.0;
  }
  if (!any_positive) throw DegenerateFit("all Fourier coefficients vanish on the fit range");

  std::vector<double> xs;
  std::vector<double> ys;
  std::int64_t w = range.lo;
  while (w <= range.hi) {
    const auto next = std::max<std::int64_t>(w + 1, static_cast<std::int64_t>(std::ceil(static_cast<double>(w) * window_ratio)));
    const std::int64_t end = std::min(range.hi, next - 1);
    std::int64_t best_n = w;
    double best = -1.0;
    for (std::int64_t n = w; n <= end; ++n) {
      const double v = mags[static_cast<std::size_t>(n - range.lo)];
      if (v > best) {
        best = v;
        best_n = n;
      }
    }
    if (best > 0.0) {
      xs.push_back(std::log(static_cast<double>(best_n)));
      ys.push_back(std::log(best));
    }
    w = next;
  }
  if (xs.size() < 2) throw DegenerateFit("fewer than two nonzero window maxima on the fit range");

  const double n = static_cast<double>(xs.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxy, sxx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (!(sxx.value() > 0.0)) throw DegenerateFit("fit range spans a single abscissa");

  DecayFit fit;
  fit.a_hat = -sxy.value() / sxx.value();
  fit.fit_range = range;
  fit.points_used = xs.size();
  for (std::int64_t k = range.lo; k <= range.hi; ++k) {
    const double v = mags[static_cast<std::size_t>(k - range.lo)];
    if (v > 0.0) fit.K_hat = std::max(fit.K_hat, v * std::pow(static_cast<double>(k), fit.a_hat));
  }
  for (std::int64_t k = range.lo; k <= range.hi; ++k) {
    const double v = mags[static_cast<std::size_t>(k - range.lo)];
    const double envelope = fit.K_hat * std::pow(static_cast<double>(k), -fit.a_hat);
    fit.max_violation = std::max(fit.max_violation, v - envelope);
  }
  return fit;
}

std::vector<double> sample_measure(const MeasureSpec& mu, std::size_t count, std::uint64_t seed) {
  if (!mu.samplable()) throw UnsupportedConfiguration("sampling is not available for " + mu.name() + " measures");
  if (count == 0) throw ValidationError("sample count must be positive");
  const bool cantor = std::holds_alternative<CantorMiddleThirds>(mu.variant());
  std::vector<double> points(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterStream stream(seed, i);
    if (!cantor) {
      points[i] = stream.next_unit();
      continue;
    }
    const std::uint64_t bits = stream.next_u64();
    double t = 0.0;
    for (int k = kCantorDigits; k >= 1; --k) {
      const double digit = ((bits >> (k - 1)) & 1U) ? 2.0 : 0.0;
      t = (t + digit) / 3.0;
    }
    points[i] = t < 1.0 ? t : std::nextafter(1.0, 0.0);
  }
  return points;
}

cdouble trig_partial_sum(const CoefficientSequence& a, double t, std::size_t M) {
  CompensatedComplexSum acc;
  acc += a.at(0);
  for (std::size_t k = 1; k <= M; ++k) {
    const auto n = static_cast<std::int64_t>(k);
    acc += a.at(n) * unit_phase(n, t);
    acc += a.at(-n) * unit_phase(-n, t);
  }
  return acc.value();
}

AeProbeResult ae_probe(const CoefficientSequence& a, const MeasureSpec& mu, const std::vector<std::size_t>& truncations,
                       std::size_t points, std::uint64_t seed, const AeProbeOptions& options) {
  if (truncations.size() < 2) throw InsufficientData("ae_probe needs at least two truncations");
  for (std::size_t i = 1; i < truncations.size(); ++i) {
    if (truncations[i] <= truncations[i - 1]) throw ValidationError("ae_probe truncations must increase");
  }

  AeProbeResult result;
  result.truncations = truncations;
  const auto ts = sample_measure(mu, points, seed);
  result.points.reserve(ts.size());
  for (double t : ts) {
    ProbePoint p;
    p.t = t;
    CompensatedComplexSum acc;
    acc += a.at(0);
    std::size_t done = 0;
    std::vector<cdouble> partials;
    for (std::size_t M : truncations) {
      for (std::size_t k = done + 1; k <= M; ++k) {
        const auto n = static_cast<std::int64_t>(k);
        acc += a.at(n) * unit_phase(n, t);
        acc += a.at(-n) * unit_phase(-n, t);
      }
      done = M;
      partials.push_back(acc.value());
      p.abs_partial.push_back(std::abs(partials.back()));
    }
    for (std::size_t i = 0; i + 1 < partials.size(); ++i) {
      p.gaps.push_back(std::abs(partials[i + 1] - partials[i]));
      p.oscillation = std::max(p.oscillation, p.gaps.back());
    }
    result.points.push_back(std::move(p));
  }

  const std::size_t pairs = truncations.size() - 1;
  std::size_t settled = 0;
  for (const auto& p : result.points) {
    if (p.gaps.back() < options.tolerance) ++settled;
  }
  for (std::size_t i = 0; i < pairs; ++i) {
    std::vector<double> g;
    g.reserve(result.points.size());
    for (const auto& p : result.points) g.push_back(p.gaps[i]);
    result.median_gaps.push_back(median(std::move(g)));
  }
  result.median_trend_decreasing = true;
  for (std::size_t i = 1; i < pairs; ++i) {
    const double g = result.median_gaps[i];
    if (!(g < result.median_gaps[i - 1] || g == 0.0)) result.median_trend_decreasing = false;
  }
  result.fraction_below_tolerance = static_cast<double>(settled) / static_cast<double>(result.points.size());
  result.verdict = (result.median_trend_decreasing && result.fraction_below_tolerance >= options.required_fraction)
                       ? ProbeVerdict::converging
                       : ProbeVerdict::inconclusive;
  return result;
}

void write_ae_probe_csv(const AeProbeResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "t,M,abs_S,osc\n";
  for (const auto& p : result.points) {
    for (std::size_t i = 0; i < result.truncations.size(); ++i) {
      out << p.t << ',' << result.truncations[i] << ',' << p.abs_partial[i] << ',' << p.oscillation << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

double sobolev_norm(const CoefficientSequence& a, double p) {
  if (!(p >= 0.0)) throw ValidationError("sobolev_norm needs p >= 0");
  CompensatedSum acc;
  for (std::size_t k = 1; k <= a.size(); ++k) {
    const double n = static_cast<double>(a.index_at(k));
    acc += std::norm(a.folded(k)) * std::pow(1.0 + n * n, p);
  }
  return std::sqrt(acc.value());
}

WitnessResult fourier_dimension_witness(const MeasureSpec& mu, double alpha, IndexRange range, double smallness) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw RangeError("alpha must lie in [0, 1]");
  if (!(smallness > 0.0)) throw ValidationError("smallness factor must be positive");
  require_range(range);
  if (range.hi - range.lo < 3) throw InsufficientData("witness range needs at least four indices");

  const std::int64_t mid = range.lo + (range.hi - range.lo + 1) / 2;
  auto stat = [&](std::int64_t lo, std::int64_t hi) {
    double best = 0.0;
    for (std::int64_t n = lo; n <= hi; ++n) {
      best = std::max(best, std::norm(mu.fourier(n)) * std::pow(static_cast<double>(n), alpha));
    }
    return best;
  };
  WitnessResult w;
  w.alpha = alpha;
  w.range = range;
  w.lower_statistic = stat(range.lo, mid - 1);
  w.upper_statistic = stat(mid, range.hi);
  w.witness = w.upper_statistic == 0.0 || w.upper_statistic < smallness * w.lower_statistic;
  return w;
}

FourierTable load_fourier_table_csv(const std::filesystem::path& path, double K, double a) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open Fourier table " + path.string());
  FourierTable t;
  t.K = K;
  t.a = a;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (line_no == 1 && !fields.empty() && fields[0].find_first_of("nN") != std::string::npos &&
        fields[0].find_first_of("0123456789") == std::string::npos) {
      continue;
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 3) throw ValidationError(where + ": expected 'n,re,im'");
    const double n = parse_double(fields[0], where);
    if (n != std::floor(n)) throw ValidationError(where + ": index must be an integer");
    t.table[static_cast<std::int64_t>(n)] = {parse_double(fields[1], where), parse_double(fields[2], where)};
  }
  return t;
}

void save_fourier_table_csv(const MeasureSpec& mu, IndexRange range, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "n,re,im\n";
  for (std::int64_t n = range.lo; n <= range.hi; ++n) {
    const cdouble v = mu.fourier(n);
    out << n << ',' << v.real() << ',' << v.imag() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

MeasureSpec resolve_measure(const std::string& descriptor) {
  const auto parts = split(descriptor, ':');
  if (parts.empty()) throw ValidationError("empty measure descriptor");
  const std::string& kind = parts[0];
  if (kind == "cantor" || kind == "cantor_middle_thirds") return MeasureSpec::cantor();
  if (kind == "lebesgue") return MeasureSpec::lebesgue();
  if (kind == "synthetic") {
    if (parts.size() < 2) throw ValidationError("synthetic measure needs an exponent: synthetic:a[:K[:max_n]]");
    const double a = parse_double(parts[1], "synthetic exponent");
    const double K = parts.size() > 2 ? parse_double(parts[2], "synthetic K") : 1.0;
    const double max_n = parts.size() > 3 ? parse_double(parts[3], "synthetic max_n") : 65536.0;
    return MeasureSpec::synthetic_power_law(a, static_cast<std::int64_t>(max_n), K);
  }
  if (kind == "table") {
    if (parts.size() != 2 && parts.size() != 4) {
      throw ValidationError("table measure syntax: table:FILE or table:FILE:K:a");
    }
    double K = 1.0;
    double a = 0.0;
    if (parts.size() == 4) {
      K = parse_double(parts[2], "table K");
      a = parse_double(parts[3], "table a");
    }
    return MeasureSpec::fourier_table(load_fourier_table_csv(parts[1], K, a));
  }
  throw ValidationError("unknown measure '" + descriptor + "'");
}

}  // namespace mrseries

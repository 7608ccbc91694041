#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mrseries/sequence.hpp"

namespace mrseries {

struct CantorMiddleThirds {};
struct LebesgueMeasure {};

/// Finite Fourier table with a decay envelope |mu^(n)| <= K |n|^-a. Entries
/// for negative n are derived by conjugation when only n > 0 is tabulated.
struct FourierTable {
  std::map<std::int64_t, cdouble> table;
  double K = 1.0;
  double a = 0.0;
};

/// A Borel probability measure on the circle R/Z, described through its
/// Fourier coefficients mu^(n) = integral of exp(-2 pi i n t) d mu(t).
class MeasureSpec {
 public:
  using Variant = std::variant<CantorMiddleThirds, LebesgueMeasure, FourierTable>;

  static MeasureSpec cantor();
  static MeasureSpec lebesgue();
  /// Validates mu^(0) = 1 (inserted if absent), Hermitian pairs and the
  /// envelope on every tabulated n != 0.
  static MeasureSpec fourier_table(FourierTable table);
  /// mu^(n) = K |n|^-a on 1 <= |n| <= max_n; a synthetic envelope instance.
  static MeasureSpec synthetic_power_law(double a, std::int64_t max_n, double K = 1.0);

  [[nodiscard]] cdouble fourier(std::int64_t n) const;
  [[nodiscard]] bool samplable() const;
  [[nodiscard]] std::string name() const;
  [[nodiscard]] const std::string& support() const { return support_; }
  [[nodiscard]] const Variant& variant() const { return variant_; }

 private:
  MeasureSpec(Variant v, std::string support) : variant_(std::move(v)), support_(std::move(support)) {}

  Variant variant_;
  std::string support_;
};

/// Largest |n| accepted by cantor_fourier.
inline constexpr std::int64_t kCantorIndexBudget = 3486784401LL;  // 3^20

/// Fourier coefficient of the middle-thirds Cantor measure from the
/// self-similar product (-1)^n prod_k cos(2 pi n / 3^k).
cdouble cantor_fourier(std::int64_t n);

struct IndexRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
};

struct DecayFit {
  double K_hat = 0.0;
  double a_hat = 0.0;
  double max_violation = 0.0;
  IndexRange fit_range;
  std::size_t points_used = 0;
};

/// Fits |mu^(n)| <= K n^-a on [lo, hi]. The slope comes from least squares on
/// log|mu^| vs log n over the maxima of geometric windows [w, ratio * w); K is
/// then the smallest constant for which the envelope holds on the whole range.
DecayFit decay_fit(const MeasureSpec& mu, IndexRange range, double window_ratio = 2.0);

/// Points in [0, 1), point i a pure function of (seed, i). Cantor points use
/// 40 random ternary digits from {0, 2}.
std::vector<double> sample_measure(const MeasureSpec& mu, std::size_t count, std::uint64_t seed);

inline constexpr int kCantorDigits = 40;

/// sum_{|n| <= M} a_n exp(2 pi i n t), summed as a_0, then the pairs (n, -n)
/// for ascending n with compensation. Coefficients outside the support are 0.
cdouble trig_partial_sum(const CoefficientSequence& a, double t, std::size_t M);

struct AeProbeOptions {
  double tolerance = 1e-2;
  /// Fraction of points whose final gap must be below tolerance.
  double required_fraction = 0.9;
};

struct ProbePoint {
  double t = 0.0;
  std::vector<double> abs_partial;  // |S_M(t)| per truncation
  std::vector<double> gaps;         // |S_{M_{i+1}}(t) - S_{M_i}(t)|
  double oscillation = 0.0;         // max of gaps
};

enum class ProbeVerdict { converging, inconclusive };

struct AeProbeResult {
  std::vector<std::size_t> truncations;
  std::vector<ProbePoint> points;
  std::vector<double> median_gaps;  // per successive truncation pair
  bool median_trend_decreasing = false;
  double fraction_below_tolerance = 0.0;
  ProbeVerdict verdict = ProbeVerdict::inconclusive;
};

/// Diagnostic only: a "converging" verdict needs strictly decreasing median
/// gaps and enough points settled below tolerance; it certifies nothing.
AeProbeResult ae_probe(const CoefficientSequence& a, const MeasureSpec& mu,
                       const std::vector<std::size_t>& truncations, std::size_t points,
                       std::uint64_t seed, const AeProbeOptions& options = {});

void write_ae_probe_csv(const AeProbeResult& result, const std::filesystem::path& path);

/// (sum_n |a_n|^2 (1 + n^2)^p)^(1/2) over natural indices.
double sobolev_norm(const CoefficientSequence& a, double p);

struct WitnessResult {
  bool witness = false;
  double alpha = 0.0;
  double lower_statistic = 0.0;
  double upper_statistic = 0.0;
  IndexRange range;
};

/// Finite-range proxy for |mu^(n)|^2 = o(|n|^-alpha): compares
/// max |mu^(n)|^2 n^alpha on the upper half of the range against
/// `smallness` times the same statistic on the lower half.
WitnessResult fourier_dimension_witness(const MeasureSpec& mu, double alpha, IndexRange range,
                                        double smallness = 0.5);

FourierTable load_fourier_table_csv(const std::filesystem::path& path, double K, double a);
void save_fourier_table_csv(const MeasureSpec& mu, IndexRange range, const std::filesystem::path& path);

/// "cantor", "lebesgue", "synthetic:a[:K[:max_n]]" or "table:FILE[:K:a]".
MeasureSpec resolve_measure(const std::string& descriptor);

}  // namespace mrseries

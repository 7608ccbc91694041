#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrseries/kernels.hpp"
#include "mrseries/sequence.hpp"

namespace mrseries {

enum class CriterionKind { menshov_rademacher, theorem1, weighted, gaussian };

std::string to_string(CriterionKind kind);
CriterionKind criterion_kind_from_string(const std::string& s);

struct TruncationPoint {
  std::size_t N = 0;
  double value = 0.0;
  friend bool operator==(const TruncationPoint&, const TruncationPoint&) = default;
};

struct CriterionValue {
  CriterionKind kind = CriterionKind::menshov_rademacher;
  double b = 0.0;  // weighted criterion exponent
  double partial_value = 0.0;
  std::size_t truncation = 0;
  std::vector<TruncationPoint> history;
  friend bool operator==(const CriterionValue&, const CriterionValue&) = default;
};

// Truncated criterion sums. Each comes in a single-truncation form and a
// history form evaluated at every entry of `truncations` (ascending); the
// history form's partial_value is the value at the last truncation. Indices
// are folded positions n = 1..N; kernels see the sequence's natural index.

/// sum_n |a_n|^2 log2^2(n + 1)
CriterionValue mr_sum(const CoefficientSequence& a, std::size_t N);
CriterionValue mr_sum(const CoefficientSequence& a, std::span<const std::size_t> truncations);

/// L_N = sum_{n,m} |a_n||a_m||gamma(n,m)| log2(n + 1) log2(m + 1)
CriterionValue theorem1_sum(const CoefficientSequence& a, const CovarianceKernel& kernel, std::size_t N);
CriterionValue theorem1_sum(const CoefficientSequence& a, const CovarianceKernel& kernel,
                            std::span<const std::size_t> truncations);

/// sum_n |a_n|^2 n^(2b) log2^2(n + 1)
CriterionValue weighted_sum(const CoefficientSequence& a, double b, std::size_t N);
CriterionValue weighted_sum(const CoefficientSequence& a, double b, std::span<const std::size_t> truncations);

/// sum_{n,m} |a_n||a_m||gamma(n,m)|
CriterionValue gaussian_condition_sum(const CoefficientSequence& a, const CovarianceKernel& kernel, std::size_t N);
CriterionValue gaussian_condition_sum(const CoefficientSequence& a, const CovarianceKernel& kernel,
                                      std::span<const std::size_t> truncations);

/// The Schur-test row ratio max_n (1/x_n) sum_m beta(n,m) x_m over 1..N.
double schur_row_ratio(const std::function<double(std::size_t, std::size_t)>& beta,
                       const std::function<double(std::size_t)>& x, std::size_t N);

struct SchurEstimate {
  double a_exp = 0.0;
  double b_exp = 0.0;
  double c_exp = 0.0;
  bool admissible = false;  // a + b + c > 1
  std::vector<TruncationPoint> ratios;  // R_N per grid entry
  /// R_{N_{i+1}} / R_{N_i} for consecutive grid entries.
  std::vector<double> growth;
};

/// beta(n,m) = |n - m|^-a n^-b m^-b with beta(n,n) = n^-2b, tested against
/// x_n = n^-c.
SchurEstimate schur_bound_estimate(double a_exp, double b_exp, double c_exp, std::span<const std::size_t> grid);
SchurEstimate schur_bound_estimate(double a_exp, double b_exp, double c_exp, std::size_t N);

/// Critical weight exponent (1 - a) / 2 for power-decay kernels, a in [0, 1].
double threshold_b(double a);

struct DiagnosticThresholds {
  /// Plateau when the last relative increment falls below this.
  double plateau = 1e-4;
  /// Growing when the fitted increment exponent exceeds this, i.e. the
  /// increments between truncations decay slower than N^growth_slope.
  double growth_slope = -0.5;
};

enum class Convergence { plateau, growing, inconclusive };
std::string to_string(Convergence v);

struct ConvergenceVerdict {
  Convergence verdict = Convergence::inconclusive;
  /// Least-squares slope of log(increment) against log N; NaN when fewer
  /// than two increments are positive.
  double growth_exponent_estimate = 0.0;
  double last_relative_increment = 0.0;
};

/// Judges a truncation history (>= 4 points). A diagnostic, never a proof.
ConvergenceVerdict convergence_diagnostic(const CriterionValue& value, const DiagnosticThresholds& thresholds = {});

}  // namespace mrseries

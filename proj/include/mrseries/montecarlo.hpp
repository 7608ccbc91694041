#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrseries/criteria.hpp"
#include "mrseries/kernels.hpp"
#include "mrseries/sequence.hpp"

namespace mrseries {

enum class Field { real, complex };

std::string to_string(Field f);
Field field_from_string(const std::string& s);

inline constexpr std::size_t kMaxDenseDimension = 4096;
inline constexpr std::size_t kMinReplicatesForVerdict = 100;

struct SimulationConfig {
  std::size_t N = 1;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  Field field = Field::real;
  bool repair = true;
  double sigma_margin = 3.0;
  double psd_tolerance = 1e-8;
};

/// Covariance actually sampled from, with its factor F (F F^* = covariance).
struct PreparedCovariance {
  GramMatrix used;
  std::optional<RepairRecord> repair;
  /// Diagonal jitter added before factorization, relative to the largest
  /// diagonal entry; 0 when none was needed.
  double jitter = 0.0;
  Eigen::MatrixXcd factor;
};

/// Validates PSD, applies the clipping repair when allowed, then factors with
/// a pivoted LDL^* decomposition, escalating diagonal jitter through
/// 0, 1e-12, 1e-10, 1e-8 (relative) before giving up.
PreparedCovariance prepare_covariance(const GramMatrix& gram, const SimulationConfig& config);

/// Replicates stored column-wise: column r is replicate r.
class SampleMatrix {
 public:
  SampleMatrix(Field field, Eigen::MatrixXd real, Eigen::MatrixXcd complex);

  [[nodiscard]] Field field() const { return field_; }
  [[nodiscard]] std::size_t width() const;
  [[nodiscard]] std::size_t replicates() const;
  [[nodiscard]] cdouble at(std::size_t n, std::size_t replicate) const;
  [[nodiscard]] const Eigen::MatrixXd& real() const { return real_; }
  [[nodiscard]] const Eigen::MatrixXcd& complex() const { return complex_; }

  friend bool operator==(const SampleMatrix& x, const SampleMatrix& y);

 private:
  Field field_;
  Eigen::MatrixXd real_;
  Eigen::MatrixXcd complex_;
};

/// Zero-mean Gaussian replicates with covariance `prepared.used`. Replicate r
/// draws its normals from the stream (seed, r). Complex replicates use
/// independent N(0, 1/2) real and imaginary parts.
SampleMatrix sample_gaussian(const PreparedCovariance& prepared, const SimulationConfig& config);
SampleMatrix sample_gaussian(const GramMatrix& gram, const SimulationConfig& config);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  friend bool operator==(const Estimate&, const Estimate&) = default;
};

/// Mean and standard error with a fixed-shape pairwise reduction.
Estimate estimate_mean(std::span<const double> values);

struct BlockStatistics {
  unsigned r = 0;
  std::vector<Estimate> per_block;  // E(S°_k)^2 for k = 0..r
  Estimate total;                   // sum_k (S°_k)^2 per replicate, then averaged
};

struct MaximalStatistics {
  std::size_t N = 0;
  std::size_t replicates = 0;
  std::uint64_t coefficient_fingerprint = 0;
  Estimate sup_sq;   // (S*_N)^2
  Estimate sup_abs;  // S*_N
  Estimate end_sq;   // |S_N|^2
  std::optional<BlockStatistics> blocks;
};

/// Running partial sums S_j = sum_{n<=j} a_n X_n per replicate; records
/// S*_N = max_j |S_j| and |S_N|. N is the sample width.
MaximalStatistics maximal_statistics(const SampleMatrix& samples, const CoefficientSequence& a);

/// Per-replicate maxima S*_N, in replicate order.
std::vector<double> replicate_maxima(const SampleMatrix& samples, const CoefficientSequence& a);

/// S°_k = max_{2^k <= j < 2^(k+1), j <= 2^r} |sum_{n=2^k}^{j} a_n X_n| for
/// k = 0..r; the last block is the single index 2^r. Requires 2^r <= sample width and at least 2^r coefficients; shorter
/// sequences must be padded explicitly.
BlockStatistics block_maxima(const SampleMatrix& samples, const CoefficientSequence& a, unsigned r);

enum class BoundName { lemma, theorem_8L, blocks_4L, sudakov };
std::string to_string(BoundName b);
BoundName bound_name_from_string(const std::string& s);

enum class BoundVerdict { pass, fail, insufficient };
std::string to_string(BoundVerdict v);
BoundVerdict bound_verdict_from_string(const std::string& s);

struct BoundReport {
  BoundName bound_name = BoundName::lemma;
  double theoretical = 0.0;
  Estimate empirical;
  BoundVerdict verdict = BoundVerdict::insufficient;
  /// (theoretical - empirical) / stderr; empty when stderr is zero.
  std::optional<double> margin_sigmas;
  /// Criterion value the bound is built from (ΣΣ|a||a||γ| or L_N).
  double criterion_value = 0.0;
  friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

/// Theoretical bounds:
///   lemma      (2 + log2 N)^2 * sum |a_n||a_m||gamma|
///   theorem_8L 8 L_N
///   blocks_4L  4 L_N           (needs stats.blocks)
///   sudakov    2 (sum |a_n||a_m||gamma|)^(1/2), compared with E S*_N
/// Pass iff empirical + sigma_margin * stderr <= theoretical; fewer than 100
/// replicates gives "insufficient".
BoundReport bound_report(const MaximalStatistics& stats, const CoefficientSequence& a,
                         const CovarianceKernel& kernel, std::size_t N, BoundName which,
                         double sigma_margin = 3.0);

/// Real-field check of E sup_{n<=N} |S_n| <= 2 (sum |a_n||a_m||gamma|)^(1/2).
/// A complex field is refused.
BoundReport sudakov_check(const CoefficientSequence& a, const CovarianceKernel& kernel, std::size_t N,
                          const SimulationConfig& config);

/// Explicit kernel over the matrix that was actually sampled.
CovarianceKernel sampled_kernel(const PreparedCovariance& prepared);

struct SimulationOutcome {
  PreparedCovariance prepared;
  MaximalStatistics stats;
  std::vector<BoundReport> bounds;
  CriterionValue theorem1;
  CriterionValue gaussian;
};

/// Samples once and evaluates every requested bound on the same replicates,
/// against the criteria of the covariance actually sampled.
SimulationOutcome run_bound_suite(const CoefficientSequence& a, const CovarianceKernel& kernel,
                                  const SimulationConfig& config, const std::vector<BoundName>& bounds);

/// One row per replicate: replicate, sup_abs, end_abs.
void write_replicate_maxima_csv(const SampleMatrix& samples, const CoefficientSequence& a,
                                const std::filesystem::path& path);

}  // namespace mrseries

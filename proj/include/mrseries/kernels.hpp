#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mrseries/measures.hpp"
#include "mrseries/sequence.hpp"

namespace mrseries {

struct IdentityKernel {};
struct AllOnesKernel {};

/// gamma(n, n) = 1 and gamma(n, m) = K |n - m|^-a otherwise.
struct PowerDecayKernel {
  double K = 1.0;
  double a = 0.0;
};

/// gamma(n, m) = mu^(n - m).
struct FourierKernel {
  MeasureSpec mu;
};

/// Unit-diagonal matrix indexed from index_base; `scales` holds the sigma_n
/// removed during normalization.
struct ExplicitKernel {
  Eigen::MatrixXcd matrix;
  std::vector<double> scales;
};

struct KernelDescriptor {
  enum class Kind { identity, all_ones, power_decay, fourier, explicit_matrix };
  Kind kind = Kind::identity;
  double K = 1.0;
  double a = 0.0;
  std::optional<MeasureSpec> measure;
  Eigen::MatrixXcd matrix;
  /// Rescale a non-unit diagonal to 1. When false the diagonal must already
  /// be positive real and is kept as given.
  bool normalize = true;
  std::int64_t index_base = 1;
};

/// Second-moment kernel gamma(n, m) = E(X_n conj(X_m)); immutable.
class CovarianceKernel {
 public:
  using Variant = std::variant<IdentityKernel, AllOnesKernel, PowerDecayKernel, FourierKernel, ExplicitKernel>;

  [[nodiscard]] cdouble operator()(std::int64_t n, std::int64_t m) const { return eval(n, m); }
  [[nodiscard]] cdouble eval(std::int64_t n, std::int64_t m) const;
  [[nodiscard]] double magnitude(std::int64_t n, std::int64_t m) const { return std::abs(eval(n, m)); }

  /// |gamma(n, m)| for every m in `ms`; one dispatch per call.
  void magnitudes(std::int64_t n, std::span<const std::int64_t> ms, std::span<double> out) const;

  /// True when gamma(n, m) depends on n - m only.
  [[nodiscard]] bool stationary() const;
  [[nodiscard]] std::int64_t index_base() const { return index_base_; }
  /// Number of addressable indices for explicit kernels.
  [[nodiscard]] std::optional<std::size_t> extent() const;
  /// sigma_n folded out during normalization (explicit kernels only).
  [[nodiscard]] const std::vector<double>* scales() const;
  [[nodiscard]] std::string name() const;
  [[nodiscard]] const Variant& variant() const { return variant_; }

 private:
  friend CovarianceKernel make_kernel(const KernelDescriptor& spec);
  CovarianceKernel(Variant v, std::int64_t base) : variant_(std::move(v)), index_base_(base) {}

  Variant variant_;
  std::int64_t index_base_ = 1;
};

CovarianceKernel make_kernel(const KernelDescriptor& spec);

CovarianceKernel identity_kernel();
CovarianceKernel all_ones_kernel();
CovarianceKernel power_decay_kernel(double K, double a);
CovarianceKernel fourier_kernel(MeasureSpec mu);
CovarianceKernel explicit_kernel(Eigen::MatrixXcd matrix, bool normalize = true);

/// Descriptor schema:
///   {"type": "identity" | "all_ones"}
///   {"type": "power_decay", "K": 1, "a": 1}
///   {"type": "fourier", "measure": "cantor" | "lebesgue" | "synthetic:0.5" | ...}
///   {"type": "explicit", "csv": "path"} or {"type": "explicit", "matrix": [[x, ...], ...]}
/// where matrix entries are reals or [re, im] pairs.
KernelDescriptor kernel_descriptor_from_json(const nlohmann::json& j);
/// Accepts inline JSON, a path to a JSON file, a CSV path, or a shorthand:
/// identity, all_ones, power_decay:K:a, fourier:<measure>.
KernelDescriptor resolve_kernel_descriptor(const std::string& text);

/// Row-major CSV of complex entries written as re,im pairs.
Eigen::MatrixXcd load_kernel_csv(const std::filesystem::path& path);

/// N x N truncation, entries[i][j] = gamma(base + i, base + j).
class GramMatrix {
 public:
  explicit GramMatrix(Eigen::MatrixXcd entries, double psd_tolerance = 1e-8);

  [[nodiscard]] const Eigen::MatrixXcd& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  [[nodiscard]] double psd_tolerance() const { return psd_tolerance_; }
  [[nodiscard]] std::optional<double> min_eigen_estimate() const { return min_eigen_; }
  [[nodiscard]] bool is_hermitian(double tol = 0.0) const;
  [[nodiscard]] bool is_real() const;

  GramMatrix with_min_eigen(double value) const;

 private:
  Eigen::MatrixXcd entries_;
  double psd_tolerance_ = 1e-8;
  std::optional<double> min_eigen_;
};

/// Builds the truncation and averages it with its conjugate transpose.
GramMatrix gram_matrix(const CovarianceKernel& kernel, std::size_t N);

struct PsdVerdict {
  bool valid = false;
  double min_eigen = 0.0;
  double max_eigen = 0.0;
};

/// Valid iff the smallest eigenvalue is >= -tol * max(|largest|, 1).
/// Non-Hermitian input is a contract violation.
PsdVerdict validate_psd(const GramMatrix& gram, double tol = 1e-8);

struct RepairRecord {
  double min_eigen_before = 0.0;
  std::size_t clipped_eigenvalues = 0;
  /// Frobenius norm of (repaired - original).
  double frobenius_change = 0.0;
  /// Largest entrywise change.
  double max_entry_change = 0.0;
};

struct RepairedGram {
  GramMatrix gram;
  RepairRecord record;
};

/// Sets negative eigenvalues to zero, then rescales back to unit diagonal.
RepairedGram clip_repair(const GramMatrix& gram);

}  // namespace mrseries

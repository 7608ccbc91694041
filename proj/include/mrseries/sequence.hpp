#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace mrseries {

using cdouble = std::complex<double>;

enum class Sidedness { one_sided, two_sided };

/// Finitely supported coefficients (a_n).
///
/// One-sided sequences hold a_1..a_N. Two-sided sequences hold a_{-M}..a_M and
/// are read through the folding order 0, +1, -1, +2, -2, ..., so folded
/// position k (1-based) carries frequency 0 for k = 1, +j for k = 2j and -j for
/// k = 2j + 1. Criteria always see the folded, one-sided view.
class CoefficientSequence {
 public:
  CoefficientSequence() = default;

  static CoefficientSequence one_sided(std::vector<cdouble> values);
  static CoefficientSequence one_sided(const std::vector<double>& values);
  /// `values` holds a_{-M}..a_M, so its length must be odd.
  static CoefficientSequence two_sided(std::vector<cdouble> values);

  [[nodiscard]] Sidedness sidedness() const { return sidedness_; }
  [[nodiscard]] bool is_two_sided() const { return sidedness_ == Sidedness::two_sided; }

  /// Number of folded positions (N, or 2M + 1).
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  /// M for two-sided sequences, N for one-sided ones.
  [[nodiscard]] std::size_t half_width() const;

  /// Coefficient at natural index n; zero outside the stored support.
  [[nodiscard]] cdouble at(std::int64_t n) const;
  /// Coefficient at folded position k >= 1.
  [[nodiscard]] cdouble folded(std::size_t k) const;
  /// Natural index carried by folded position k: k itself for one-sided
  /// sequences, the interleaved frequency for two-sided ones.
  [[nodiscard]] std::int64_t index_at(std::size_t k) const;

  [[nodiscard]] CoefficientSequence scaled(cdouble factor) const;
  /// Zero-extends a one-sided sequence to length n (no-op if already longer).
  [[nodiscard]] CoefficientSequence padded(std::size_t n) const;
  /// One-sided sequence holding the first n folded positions.
  [[nodiscard]] CoefficientSequence folded_prefix(std::size_t n) const;
  /// One-sided sequence with a_k multiplied by scales[k - 1].
  [[nodiscard]] CoefficientSequence rescaled(const std::vector<double>& scales) const;

  /// Stable 64-bit fingerprint of sidedness and values.
  [[nodiscard]] std::uint64_t fingerprint() const;

  friend bool operator==(const CoefficientSequence&, const CoefficientSequence&) = default;

 private:
  CoefficientSequence(Sidedness sidedness, std::vector<cdouble> values);

  Sidedness sidedness_ = Sidedness::one_sided;
  // Stored in folded order.
  std::vector<cdouble> values_;
};

/// Folded position of frequency n: 0 -> 1, +j -> 2j, -j -> 2j + 1.
std::size_t fold_position(std::int64_t n);
std::int64_t unfold_position(std::size_t k);

/// CSV rows "index,re,im" (a header line is allowed). Any index < 1 makes the
/// sequence two-sided over [-M, M] with M the largest |index|.
CoefficientSequence load_coefficients_csv(const std::filesystem::path& path);
/// JSON: an array of reals, an array of [re, im] pairs, or an object
/// {"sidedness": "one-sided"|"two-sided", "values": [...]}.
CoefficientSequence coefficients_from_json(const nlohmann::json& j);
nlohmann::json coefficients_to_json(const CoefficientSequence& a);

/// Resolves a coefficient argument: a .csv or .json path, or a generator
///   power:p:N      a_n = n^-p, n = 1..N
///   geometric:q:N  a_n = q^n
///   delta:N        a_1 = 1, rest zero
///   sobolev:s:M    a_n = 1 / (1 + |n|^s), |n| <= M
///   invlog:M       a_n = 1 / log(2 + |n|), |n| <= M
///   nlog:M         a_n = 1 / (|n| log(2 + |n|)), a_0 = 0, |n| <= M
CoefficientSequence resolve_coefficients(const std::string& descriptor);

}  // namespace mrseries

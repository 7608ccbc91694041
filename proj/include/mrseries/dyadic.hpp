#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mrseries {

/// Half-open integer range (start, end].
struct DyadicInterval {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  /// Digit position k that produced the interval; its length is 2^(r - k).
  unsigned digit = 0;

  [[nodiscard]] std::uint64_t length() const { return end - start; }
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

struct DyadicDecomposition {
  std::uint64_t j = 0;
  unsigned r = 0;
  std::vector<std::uint8_t> digits;  // xi_0 .. xi_r, most significant first
  std::vector<DyadicInterval> intervals;
};

inline constexpr unsigned kMaxDyadicLevel = 62;

/// Bits xi_0..xi_r with j = sum_k xi_k 2^(r - k), for 1 <= j <= 2^r.
std::vector<std::uint8_t> dyadic_digits(std::uint64_t j, unsigned r);

/// For each k with xi_k = 1, the range (sum_{s<k} xi_s 2^(r-s), sum_{s<=k} xi_s 2^(r-s)],
/// in increasing order. Together they partition {1..j}.
std::vector<DyadicInterval> dyadic_intervals(std::uint64_t j, unsigned r);

DyadicDecomposition dyadic_decomposition(std::uint64_t j, unsigned r);

}  // namespace mrseries

#include "mrseries/dyadic.hpp"

#include <string>

#include "mrseries/error.hpp"

namespace mrseries {

namespace {

void require_index(std::uint64_t j, unsigned r) {
  if (r > kMaxDyadicLevel) throw RangeError("dyadic level " + std::to_string(r) + " exceeds " + std::to_string(kMaxDyadicLevel));
  if (j < 1 || j > (std::uint64_t{1} << r)) {
    throw RangeError("dyadic index " + std::to_string(j) + " outside [1, 2^" + std::to_string(r) + "]");
  }
}

}  // namespace

std::vector<std::uint8_t> dyadic_digits(std::uint64_t j, unsigned r) {
  require_index(j, r);
  std::vector<std::uint8_t> digits(r + 1);
  for (unsigned k = 0; k <= r; ++k) digits[k] = static_cast<std::uint8_t>((j >> (r - k)) & 1U);
  return digits;
}

std::vector<DyadicInterval> dyadic_intervals(std::uint64_t j, unsigned r) {
  const auto digits = dyadic_digits(j, r);
  std::vector<DyadicInterval> out;
  std::uint64_t start = 0;
  for (unsigned k = 0; k <= r; ++k) {
    if (!digits[k]) continue;
    const std::uint64_t end = start + (std::uint64_t{1} << (r - k));
    out.push_back({start, end, k});
    start = end;
  }
  return out;
}

DyadicDecomposition dyadic_decomposition(std::uint64_t j, unsigned r) {
  return {j, r, dyadic_digits(j, r), dyadic_intervals(j, r)};
}

}  // namespace mrseries

#include <gtest/gtest.h>

#include <vector>

#include "mrseries/dyadic.hpp"
#include "mrseries/error.hpp"

using namespace mrseries;

TEST(Dyadic, DigitsMostSignificantFirst) {
  EXPECT_EQ(dyadic_digits(5, 3), (std::vector<std::uint8_t>{0, 1, 0, 1}));
  EXPECT_EQ(dyadic_digits(8, 3), (std::vector<std::uint8_t>{1, 0, 0, 0}));
  EXPECT_EQ(dyadic_digits(1, 3), (std::vector<std::uint8_t>{0, 0, 0, 1}));
}

TEST(Dyadic, DigitsOutOfRange) {
  EXPECT_THROW(dyadic_digits(0, 3), RangeError);
  EXPECT_THROW(dyadic_digits(9, 3), RangeError);
}

TEST(Dyadic, IntervalExamples) {
  EXPECT_EQ(dyadic_intervals(5, 3), (std::vector<DyadicInterval>{{0, 4, 1}, {4, 5, 3}}));
  EXPECT_EQ(dyadic_intervals(8, 3), (std::vector<DyadicInterval>{{0, 8, 0}}));
  EXPECT_EQ(dyadic_intervals(7, 3), (std::vector<DyadicInterval>{{0, 4, 1}, {4, 6, 2}, {6, 7, 3}}));
}

TEST(Dyadic, PartitionExhaustive) {
  for (unsigned r = 0; r <= 10; ++r) {
    for (std::uint64_t j = 1; j <= (std::uint64_t{1} << r); ++j) {
      const auto d = dyadic_decomposition(j, r);
      std::uint64_t expected_start = 0, recomposed = 0;
      for (unsigned k = 0; k <= r; ++k) recomposed += std::uint64_t{d.digits[k]} << (r - k);
      ASSERT_EQ(recomposed, j);
      ASSERT_LE(d.intervals.size(), r + 1);
      for (const auto& iv : d.intervals) {
        ASSERT_EQ(iv.start, expected_start);
        ASSERT_EQ(iv.length(), std::uint64_t{1} << (r - iv.digit));
        ASSERT_EQ(iv.start % iv.length(), 0u);
        expected_start = iv.end;
      }
      ASSERT_EQ(expected_start, j);
    }
  }
}

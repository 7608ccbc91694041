#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mrseries/error.hpp"
#include "mrseries/rng.hpp"
#include "mrseries/sequence.hpp"
#include "mrseries/summation.hpp"

using namespace mrseries;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Summation, CompensatedRecoversCancellation) {
  CompensatedSum s;
  s += 1e16;
  s += 1.0;
  s += -1e16;
  EXPECT_EQ(s.value(), 1.0);
}

TEST(Summation, PairwiseShapeIsFixed) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(1000);
  for (auto& x : v) x = u(rng);
  EXPECT_EQ(pairwise_sum(v), pairwise_sum(v));
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_NEAR(pairwise_sum(v), naive, 1e-12);
}

TEST(CounterStream, DependsOnlyOnSeedAndIndex) {
  CounterStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}

TEST(CounterStream, NormalMoments) {
  CounterStream s(1, 0);
  CompensatedSum m1, m2;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = s.next_normal();
    m1 += z;
    m2 += z * z;
  }
  EXPECT_NEAR(m1.value() / n, 0.0, 5 * std::sqrt(1.0 / n));
  EXPECT_NEAR(m2.value() / n, 1.0, 5 * std::sqrt(2.0 / n));
}

TEST(Sequence, FoldingInterleaves) {
  EXPECT_EQ(fold_position(0), 1u);
  EXPECT_EQ(fold_position(1), 2u);
  EXPECT_EQ(fold_position(-1), 3u);
  EXPECT_EQ(fold_position(5), 10u);
  EXPECT_EQ(fold_position(-5), 11u);
  for (std::int64_t n = -50; n <= 50; ++n) EXPECT_EQ(unfold_position(fold_position(n)), n);
}

TEST(Sequence, TwoSidedAccess) {
  // a_{-2} .. a_2
  const auto a = CoefficientSequence::two_sided({{-2, 0}, {-1, 0}, {0, 0}, {1, 0}, {2, 0}});
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(a.half_width(), 2u);
  EXPECT_EQ(a.at(-2).real(), -2.0);
  EXPECT_EQ(a.at(7), cdouble{});
  EXPECT_EQ(a.folded(1).real(), 0.0);
  EXPECT_EQ(a.folded(2).real(), 1.0);
  EXPECT_EQ(a.folded(3).real(), -1.0);
  EXPECT_EQ(a.index_at(5), -2);
  EXPECT_THROW((void)a.folded(6), IndexError);
  EXPECT_THROW(CoefficientSequence::two_sided({{1, 0}, {2, 0}}), ValidationError);
}

TEST(Sequence, RejectsNonFinite) {
  EXPECT_THROW(CoefficientSequence::one_sided(std::vector<double>{1.0, NAN}), ValidationError);
  EXPECT_THROW(CoefficientSequence::one_sided(std::vector<double>{INFINITY}), ValidationError);
}

TEST(Sequence, PaddingAndFingerprint) {
  const auto a = CoefficientSequence::one_sided(std::vector<double>{1.0, 2.0});
  const auto p = a.padded(4);
  EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(p.folded(4), cdouble{});
  EXPECT_NE(a.fingerprint(), p.fingerprint());
  EXPECT_EQ(a.fingerprint(), CoefficientSequence::one_sided(std::vector<double>{1.0, 2.0}).fingerprint());
  EXPECT_EQ(p.folded_prefix(2), a);
}

TEST(Sequence, CsvLoadOneSided) {
  const auto path = temp_file("mrseries_seq1.csv", "index,re,im\n1,1.5,0\n2,0,-1\n3,0.25,0\n");
  const auto a = load_coefficients_csv(path);
  EXPECT_FALSE(a.is_two_sided());
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(a.folded(2), cdouble(0.0, -1.0));
}

TEST(Sequence, CsvLoadTwoSidedWhenIndicesGoNegative) {
  const auto path = temp_file("mrseries_seq2.csv", "-1,2\n0,1\n1,3\n");
  const auto a = load_coefficients_csv(path);
  EXPECT_TRUE(a.is_two_sided());
  EXPECT_EQ(a.at(-1).real(), 2.0);
  EXPECT_EQ(a.at(1).real(), 3.0);
}

TEST(Sequence, CsvErrorsCarryLineAndField) {
  const auto path = temp_file("mrseries_seq3.csv", "1,1\n2,abc\n");
  try {
    (void)load_coefficients_csv(path);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":2 field re"), std::string::npos) << msg;
  }
}

TEST(Sequence, JsonRoundTrip) {
  const auto a = CoefficientSequence::two_sided({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(coefficients_from_json(coefficients_to_json(a)), a);
  const auto b = CoefficientSequence::one_sided(std::vector<double>{1.0, 0.5});
  EXPECT_EQ(coefficients_from_json(coefficients_to_json(b)), b);
}

TEST(Sequence, Generators) {
  const auto p = resolve_coefficients("power:2:10");
  EXPECT_EQ(p.size(), 10u);
  EXPECT_DOUBLE_EQ(p.folded(3).real(), 1.0 / 9.0);
  const auto g = resolve_coefficients("geometric:0.5:4");
  EXPECT_DOUBLE_EQ(g.folded(4).real(), 0.0625);
  const auto d = resolve_coefficients("delta:3");
  EXPECT_EQ(d.folded(1).real(), 1.0);
  EXPECT_EQ(d.folded(2).real(), 0.0);
  const auto s = resolve_coefficients("nlog:3");
  EXPECT_TRUE(s.is_two_sided());
  EXPECT_EQ(s.at(0), cdouble{});
  EXPECT_DOUBLE_EQ(s.at(-2).real(), 1.0 / (2.0 * std::log(4.0)));
  EXPECT_THROW(resolve_coefficients("bogus:1"), ValidationError);
  EXPECT_THROW(resolve_coefficients("missing.csv"), ValidationError);
}

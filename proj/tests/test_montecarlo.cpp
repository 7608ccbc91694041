#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mrseries/error.hpp"
#include "mrseries/montecarlo.hpp"
#include "oracle_values.hpp"

using namespace mrseries;

namespace {

SimulationConfig config(std::size_t N, std::size_t reps, std::uint64_t seed, Field field = Field::real) {
  SimulationConfig c;
  c.N = N;
  c.replicates = reps;
  c.seed = seed;
  c.field = field;
  return c;
}

CoefficientSequence ones(std::size_t N) { return CoefficientSequence::one_sided(std::vector<double>(N, 1.0)); }

CoefficientSequence inv_n(std::size_t N) {
  std::vector<double> v(N);
  for (std::size_t n = 1; n <= N; ++n) v[n - 1] = 1.0 / static_cast<double>(n);
  return CoefficientSequence::one_sided(v);
}

}  // namespace

TEST(Sampling, AllOnesReplicatesAreConstantVectors) {
  const auto s = sample_gaussian(gram_matrix(all_ones_kernel(), 8), config(8, 50, 1));
  for (std::size_t r = 0; r < 50; ++r) {
    for (std::size_t n = 1; n < 8; ++n) ASSERT_EQ(s.at(n, r), s.at(0, r));
  }
}

TEST(Sampling, DeterministicPerSeed) {
  const auto g = gram_matrix(power_decay_kernel(0.5, 1.5), 16);
  EXPECT_EQ(sample_gaussian(g, config(16, 100, 7)), sample_gaussian(g, config(16, 100, 7)));
  EXPECT_FALSE(sample_gaussian(g, config(16, 100, 7)) == sample_gaussian(g, config(16, 100, 8)));
}

TEST(Sampling, EmpiricalCovarianceMatchesKernel) {
  const auto g = gram_matrix(power_decay_kernel(0.5, 1.0), 6);
  const std::size_t R = 40000;
  const auto s = sample_gaussian(g, config(6, R, 3));
  const Eigen::MatrixXd cov = s.real() * s.real().transpose() / static_cast<double>(R);
  EXPECT_LT((cov - g.entries().real()).cwiseAbs().maxCoeff(), 0.04);
}

TEST(Sampling, ComplexFieldIsCircular) {
  const std::size_t R = 40000;
  const auto s = sample_gaussian(gram_matrix(identity_kernel(), 2), config(2, R, 4, Field::complex));
  double second = 0.0;
  cdouble pseudo{};
  for (std::size_t r = 0; r < R; ++r) {
    second += std::norm(s.at(0, r));
    pseudo += s.at(0, r) * s.at(0, r);
  }
  EXPECT_NEAR(second / R, 1.0, 0.03);
  EXPECT_LT(std::abs(pseudo / static_cast<double>(R)), 0.03);
}

TEST(Prepare, IndefiniteWithoutRepairIsNumericalError) {
  auto c = config(64, 10, 1);
  c.repair = false;
  EXPECT_THROW(prepare_covariance(gram_matrix(power_decay_kernel(1, 1), 64), c), NumericalError);
  c.repair = true;
  const auto p = prepare_covariance(gram_matrix(power_decay_kernel(1, 1), 64), c);
  ASSERT_TRUE(p.repair.has_value());
  EXPECT_GT(p.repair->clipped_eigenvalues, 0u);
  const Eigen::MatrixXcd ff = p.factor * p.factor.adjoint();
  EXPECT_LT((ff - p.used.entries()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Prepare, RealFieldNeedsRealCovariance) {
  Eigen::MatrixXcd m(2, 2);
  m << 1.0, cdouble(0, 0.5), cdouble(0, -0.5), 1.0;
  EXPECT_THROW(prepare_covariance(GramMatrix(m), config(2, 10, 1)), UnsupportedConfiguration);
  EXPECT_NO_THROW(prepare_covariance(GramMatrix(m), config(2, 10, 1, Field::complex)));
}

TEST(Statistics, SupSquaredOracle) {
  const auto s = sample_gaussian(gram_matrix(identity_kernel(), 4), config(4, 200000, 11));
  const auto st = maximal_statistics(s, ones(4));
  const double tol = 4.0 * std::hypot(st.sup_sq.std_error, oracle::kSupSqIdentity4Stderr);
  EXPECT_NEAR(st.sup_sq.mean, oracle::kSupSqIdentity4, tol);
  EXPECT_NEAR(st.end_sq.mean, 4.0, 4.0 * st.end_sq.std_error);
}

TEST(Statistics, BlockOracle) {
  const auto s = sample_gaussian(gram_matrix(identity_kernel(), 8), config(8, 200000, 12));
  const auto b = block_maxima(s, inv_n(8), 3);
  ASSERT_EQ(b.per_block.size(), 4u);
  const double tol = 4.0 * std::hypot(b.total.std_error, oracle::kBlocksIdentityR3Stderr);
  EXPECT_NEAR(b.total.mean, oracle::kBlocksIdentityR3, tol);
  // The last block is the single index 8.
  EXPECT_NEAR(b.per_block[3].mean, 1.0 / 64.0, 4.0 * b.per_block[3].std_error);
}

TEST(Statistics, SingleTermBlock) {
  const auto s = sample_gaussian(gram_matrix(identity_kernel(), 2), config(2, 20000, 13));
  const auto a = CoefficientSequence::one_sided(std::vector<double>{0.0, 1.0});
  const auto b = block_maxima(s, a, 1);
  EXPECT_EQ(b.per_block[0].mean, 0.0);
  EXPECT_NEAR(b.per_block[1].mean, 1.0, 3.0 * b.per_block[1].std_error);
}

TEST(Statistics, SupportOnFirstTermLeavesLaterBlocksEmpty) {
  const auto s = sample_gaussian(gram_matrix(identity_kernel(), 8), config(8, 100, 14));
  const auto b = block_maxima(s, CoefficientSequence::one_sided(std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0}), 3);
  for (std::size_t k = 1; k < b.per_block.size(); ++k) EXPECT_EQ(b.per_block[k].mean, 0.0);
}

TEST(Statistics, BlockPreconditions) {
  const auto s = sample_gaussian(gram_matrix(identity_kernel(), 4), config(4, 10, 1));
  EXPECT_THROW(block_maxima(s, ones(4), 3), SizeError);
  EXPECT_THROW(block_maxima(s, ones(2), 2), ContractViolation);
}

TEST(Bounds, ZeroCoefficientsPassExactly) {
  const auto zero = CoefficientSequence::one_sided(std::vector<double>(16, 0.0));
  const auto out = run_bound_suite(zero, power_decay_kernel(1, 1), config(16, 200, 1),
                                   {BoundName::lemma, BoundName::theorem_8L, BoundName::blocks_4L, BoundName::sudakov});
  for (const auto& b : out.bounds) {
    EXPECT_EQ(b.empirical.mean, 0.0);
    EXPECT_EQ(b.theoretical, 0.0);
    EXPECT_EQ(b.verdict, BoundVerdict::pass);
    EXPECT_FALSE(b.margin_sigmas.has_value());
  }
}

TEST(Bounds, FewReplicatesAreInsufficient) {
  const auto out = run_bound_suite(inv_n(8), identity_kernel(), config(8, 50, 1), {BoundName::theorem_8L});
  EXPECT_EQ(out.bounds[0].verdict, BoundVerdict::insufficient);
}

TEST(Bounds, MismatchedStatisticsAreRejected) {
  const auto s = sample_gaussian(gram_matrix(identity_kernel(), 8), config(8, 100, 1));
  const auto st = maximal_statistics(s, inv_n(8));
  EXPECT_THROW(bound_report(st, ones(8), identity_kernel(), 8, BoundName::lemma), ContractViolation);
  EXPECT_THROW(bound_report(st, inv_n(8), identity_kernel(), 4, BoundName::lemma), ContractViolation);
  EXPECT_THROW(bound_report(st, inv_n(8), identity_kernel(), 8, BoundName::blocks_4L), ContractViolation);
}

TEST(Bounds, BlocksNeedPowerOfTwo) {
  EXPECT_THROW(run_bound_suite(inv_n(6), identity_kernel(), config(6, 100, 1), {BoundName::blocks_4L}),
               ContractViolation);
}

TEST(Bounds, TheoremHoldsForIdentity) {
  const auto out = run_bound_suite(inv_n(64), identity_kernel(), config(64, 2000, 5),
                                   {BoundName::lemma, BoundName::theorem_8L, BoundName::blocks_4L});
  for (const auto& b : out.bounds) EXPECT_EQ(b.verdict, BoundVerdict::pass) << to_string(b.bound_name);
}

TEST(Sudakov, SingleTermAnalytic) {
  const auto a = CoefficientSequence::one_sided(std::vector<double>{1.0});
  const auto b = sudakov_check(a, identity_kernel(), 1, config(1, 100000, 21));
  EXPECT_NEAR(b.empirical.mean, std::sqrt(2.0 / std::numbers::pi), 4.0 * b.empirical.std_error);
  EXPECT_DOUBLE_EQ(b.theoretical, 2.0);
  EXPECT_EQ(b.verdict, BoundVerdict::pass);
}

TEST(Sudakov, ComplexFieldRefused) {
  EXPECT_THROW(sudakov_check(ones(2), identity_kernel(), 2, config(2, 100, 1, Field::complex)),
               UnsupportedConfiguration);
}

TEST(Simulation, NormalizedExplicitKernelFoldsScales) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 0) = 4.0;
  m(1, 1) = 9.0;
  const auto out = run_bound_suite(ones(2), explicit_kernel(m), config(2, 40000, 2), {BoundName::theorem_8L});
  EXPECT_NEAR(out.stats.end_sq.mean, 13.0, 4.0 * out.stats.end_sq.std_error);
}

TEST(Simulation, TwoSidedRefused) {
  const auto a = CoefficientSequence::two_sided({{1, 0}, {1, 0}, {1, 0}});
  EXPECT_THROW(run_bound_suite(a, identity_kernel(), config(3, 100, 1), {BoundName::lemma}), UnsupportedConfiguration);
}

TEST(Estimate, MeanAndStderr) {
  const double v[] = {1.0, 2.0, 3.0, 4.0};
  const auto e = estimate_mean(v);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.std_error, std::sqrt((5.0 / 3.0) / 4.0), 1e-15);
  EXPECT_THROW(estimate_mean(std::span<const double>{}), InsufficientData);
}

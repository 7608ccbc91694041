#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mrseries/error.hpp"
#include "mrseries/kernels.hpp"

using namespace mrseries;

TEST(Kernels, BasicValues) {
  const auto id = identity_kernel();
  EXPECT_EQ(id(3, 3), cdouble(1.0));
  EXPECT_EQ(id(3, 4), cdouble(0.0));
  const auto ones = all_ones_kernel();
  EXPECT_EQ(ones(1, 100), cdouble(1.0));
  const auto pd = power_decay_kernel(1.0, 1.0);
  EXPECT_EQ(pd(5, 5), cdouble(1.0));
  EXPECT_DOUBLE_EQ(pd(1, 5).real(), 0.25);
  EXPECT_TRUE(pd.stationary());
}

TEST(Kernels, PowerDecayValidation) {
  EXPECT_THROW(power_decay_kernel(0.0, 1.0), ValidationError);
  EXPECT_THROW(power_decay_kernel(1.0, -0.1), ValidationError);
}

TEST(Kernels, FourierKernelIsHermitian) {
  const auto k = fourier_kernel(MeasureSpec::cantor());
  for (std::int64_t n = -10; n <= 10; ++n) {
    for (std::int64_t m = -10; m <= 10; ++m) EXPECT_EQ(k(n, m), std::conj(k(m, n)));
  }
  EXPECT_EQ(k(4, 4), cdouble(1.0));
}

TEST(Kernels, ExplicitNormalizesToUnitDiagonal) {
  Eigen::MatrixXcd m(2, 2);
  m << 4.0, 1.0, 1.0, 9.0;
  const auto k = explicit_kernel(m);
  EXPECT_DOUBLE_EQ(k(1, 1).real(), 1.0);
  EXPECT_DOUBLE_EQ(k(1, 2).real(), 1.0 / 6.0);
  ASSERT_NE(k.scales(), nullptr);
  EXPECT_DOUBLE_EQ((*k.scales())[1], 3.0);
  EXPECT_THROW((void)k(1, 3), IndexError);
  EXPECT_FALSE(k.stationary());
}

TEST(Kernels, ExplicitRejectsNonHermitian) {
  Eigen::MatrixXcd m(2, 2);
  m << 1.0, 0.5, 0.1, 1.0;
  EXPECT_THROW(explicit_kernel(m), ValidationError);
}

TEST(Kernels, CsvLoad) {
  const auto path = std::filesystem::temp_directory_path() / "mrseries_kernel.csv";
  std::ofstream(path) << "1,0,0.5,0.5\n0.5,-0.5,1,0\n";
  const auto m = load_kernel_csv(path);
  ASSERT_EQ(m.rows(), 2);
  EXPECT_EQ(m(0, 1), cdouble(0.5, 0.5));
  const auto k = make_kernel(resolve_kernel_descriptor("explicit:" + path.string()));
  EXPECT_EQ(k(2, 1), cdouble(0.5, -0.5));
}

TEST(Kernels, DescriptorParsing) {
  EXPECT_EQ(make_kernel(resolve_kernel_descriptor("identity")).name(), identity_kernel().name());
  const auto k = make_kernel(resolve_kernel_descriptor(R"({"type": "power_decay", "K": 0.5, "a": 2})"));
  EXPECT_DOUBLE_EQ(k(1, 3).real(), 0.125);
  const auto s = make_kernel(resolve_kernel_descriptor("power_decay:1:1"));
  EXPECT_DOUBLE_EQ(s(2, 4).real(), 0.5);
  EXPECT_THROW(resolve_kernel_descriptor("nonsense"), ValidationError);
}

TEST(Gram, IdentityAndAllOnes) {
  const auto g = gram_matrix(identity_kernel(), 5);
  EXPECT_TRUE(g.entries().isApprox(Eigen::MatrixXcd::Identity(5, 5)));
  EXPECT_TRUE(validate_psd(g).valid);
  const auto ones = gram_matrix(all_ones_kernel(), 6);
  const auto v = validate_psd(ones);
  EXPECT_TRUE(v.valid);
  EXPECT_NEAR(v.max_eigen, 6.0, 1e-12);
}

TEST(Gram, PowerDecayIndefiniteAndRepair) {
  const auto g = gram_matrix(power_decay_kernel(1.0, 1.0), 64);
  const auto v = validate_psd(g);
  EXPECT_FALSE(v.valid);
  EXPECT_LT(v.min_eigen, 0.0);
  const auto repaired = clip_repair(g);
  EXPECT_TRUE(validate_psd(repaired.gram).valid);
  EXPECT_GT(repaired.record.clipped_eigenvalues, 0u);
  EXPECT_GT(repaired.record.frobenius_change, 0.0);
  for (Eigen::Index i = 0; i < 64; ++i) EXPECT_NEAR(repaired.gram.entries()(i, i).real(), 1.0, 1e-12);
}

TEST(Gram, NonHermitianInputIsContractViolation) {
  Eigen::MatrixXcd m(2, 2);
  m << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(validate_psd(GramMatrix(m)), ContractViolation);
}

TEST(Gram, FourierKernelOfMeasureIsPsd) {
  // Bochner: mu^(n - m) is positive definite for any probability measure.
  const auto g = gram_matrix(fourier_kernel(MeasureSpec::cantor()), 40);
  EXPECT_TRUE(g.is_hermitian(0.0));
  EXPECT_TRUE(validate_psd(g).valid);
}

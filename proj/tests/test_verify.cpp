#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vdcs/phantom.hpp"
#include "vdcs/verify.hpp"

namespace vdcs {
namespace {

Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.normal() / std::sqrt(static_cast<double>(rows));
  return a;
}

// eigenvalues of a 2x2 Hermitian Gram in closed form
double two_column_deviation(const Matrix& a, int i, int j) {
  const double g11 = a.col(i).squaredNorm(), g22 = a.col(j).squaredNorm();
  const double off = std::abs(a.col(i).dot(a.col(j)));
  const double mid = 0.5 * (g11 + g22), rad = std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + off * off);
  return std::max(std::abs(mid + rad - 1.0), std::abs(1.0 - (mid - rad)));
}

TEST(RipExact, UnitaryIsZero) {
  const auto q = Matrix::Identity(6, 6);
  for (std::size_t s = 1; s <= 6; ++s) EXPECT_NEAR(*rip_exact(q, s).delta_exact, 0.0, 1e-12);
  const Matrix full = build_preconditioned_matrix(lowest_frequencies(8, 64)) * 8.0;
  for (std::size_t s = 1; s <= 2; ++s) EXPECT_NEAR(*rip_exact(full, s).delta_exact, 0.0, 1e-10);
}

TEST(RipExact, DuplicatedColumn) {
  Matrix a = Matrix::Zero(3, 2);
  a(0, 0) = a(0, 1) = 1.0;
  EXPECT_NEAR(*rip_exact(a, 2).delta_exact, 1.0, 1e-12);
}

TEST(RipExact, MatchesClosedFormTwoByTwoOracle) {
  const auto a = gaussian_matrix(6, 12, 3);
  double oracle = 0.0;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j) oracle = std::max(oracle, two_column_deviation(a, i, j));
  const auto est = rip_exact(a, 2);
  EXPECT_NEAR(*est.delta_exact, oracle, 1e-12);
  EXPECT_EQ(est.supports_checked, 66u);
  EXPECT_EQ(est.method, RipEstimate::Method::exhaustive);
}

TEST(RipExact, NonDecreasingInOrderAndBudget) {
  const auto a = gaussian_matrix(8, 14, 5);
  double prev = 0.0;
  for (std::size_t s = 1; s <= 4; ++s) {
    const double d = *rip_exact(a, s).delta_exact;
    EXPECT_GE(d, prev - 1e-12);
    prev = d;
  }
  EXPECT_THROW(rip_exact(gaussian_matrix(4, 100, 1), 5), std::length_error);
  EXPECT_THROW(rip_exact(a, 0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(binomial(64, 2), 2016.0);
  EXPECT_DOUBLE_EQ(binomial(10, 11), 0.0);
}

TEST(RipMonteCarlo, LowerBoundAndDeterminism) {
  const auto a = gaussian_matrix(6, 12, 3);
  const auto mc = rip_monte_carlo(a, 3, 50, 9);
  EXPECT_FALSE(mc.delta_exact.has_value());
  EXPECT_EQ(mc.method, RipEstimate::Method::monte_carlo);
  EXPECT_LE(mc.delta_lower_mc, *rip_exact(a, 3).delta_exact + 1e-12);
  EXPECT_EQ(rip_monte_carlo(a, 3, 50, 9).delta_lower_mc, mc.delta_lower_mc);
  EXPECT_NEAR(rip_monte_carlo(Matrix::Identity(5, 5), 2, 10, 1).delta_lower_mc, 0.0, 1e-12);
  EXPECT_THROW(rip_monte_carlo(a, 3, 0, 1), std::invalid_argument);
}

TEST(PreconditionedMatrix, RowsAreScaledHaarSpectra) {
  const auto plan = draw_plan(density_inverse_square(8), 10, 2);
  const auto a = build_preconditioned_matrix(plan);
  ASSERT_EQ(a.rows(), 10);
  ASSERT_EQ(a.cols(), 64);
  for (int j = 0; j < 10; ++j) {
    // each Fourier row has unit norm in the Haar basis
    EXPECT_NEAR(a.row(j).squaredNorm(), plan.rho[j] * plan.rho[j] / 10.0, 1e-12);
    const auto atom = haar_atom_2d(haar_index_at(17, 3), 3);
    EXPECT_NEAR(std::abs(a(j, 17) - plan.rho[j] / std::sqrt(10.0) * dft2_forward(atom).at(plan.freqs[j])), 0.0, 1e-14);
  }
  SamplingPlan big{32, {{0, 0}}, {1.0}, "x", 0, "deterministic"};
  EXPECT_THROW(build_preconditioned_matrix(big), std::length_error);
}

TEST(PreconditionedMatrix, IsotropyIdentity) {
  EXPECT_LE(isotropy_deviation(density_from_kappa(kappa_table(8, KappaVariant::kappa))), 1e-10);
  EXPECT_LE(isotropy_deviation(density_inverse_square(8)), 1e-10);
  EXPECT_LE(isotropy_deviation(density_power_law(4, 3.0)), 1e-10);
}

TEST(PreconditionedMatrix, MeanRowEnergyIsOne) {
  for (const auto& d : {density_inverse_square(8), density_from_kappa(kappa_table(8, KappaVariant::kappa)),
                        density_inverse_max(8)})
    EXPECT_NEAR(mean_row_energy(d, 10000, 17), 1.0, 0.05) << d.label;
}

TEST(PreconditionedMatrix, MedianRipDecreasesWithM) {
  double prev = 1e9;
  for (std::size_t m : {16u, 32u, 64u, 128u}) {
    std::vector<double> d;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      d.push_back(*rip_exact(build_preconditioned_matrix(draw_plan(density_inverse_square(8), m, seed)), 2).delta_exact);
    std::sort(d.begin(), d.end());
    const double median = 0.5 * (d[9] + d[10]);
    EXPECT_LT(median, prev) << "m=" << m;
    prev = median;
  }
}

TEST(EdgeLemma, BoundAndRecordedMaxima) {
  const std::size_t expected[] = {2, 8, 14, 20, 26, 32};
  std::size_t i = 0;
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u, 64u}) {
    const auto c = check_edge_lemma(n);
    EXPECT_TRUE(c.passed()) << n;
    EXPECT_EQ(c.bound, 6u * static_cast<std::size_t>(log2_exact(n)));
    EXPECT_EQ(c.max_count, expected[i++]) << n;
  }
  EXPECT_THROW(check_edge_lemma(128), std::length_error);
}

TEST(AtomTv, BoundAndRecordedMaxima) {
  EXPECT_EQ(tv_norm(haar_atom_2d(HaarIndex::constant(), 4)), 0.0);
  // e=(1,1), n=0 on 16x16: 2 interior sign lines of length 16 at jump 2 * 2^-4
  EXPECT_NEAR(tv_norm(haar_atom_2d(HaarIndex::detail({1, 1}, 0, 0, 0), 4)), 4.0, 1e-12);
  const double expected[] = {4, 6, 8, 8, 8, 8};
  std::size_t i = 0;
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u, 64u}) {
    const auto c = check_atom_tv(n);
    EXPECT_TRUE(c.passed()) << n;
    EXPECT_NEAR(c.max_tv, expected[i++], 1e-12) << n;
  }
}

TEST(CoeffDecay, SingleAtomRandomImagesAndConstant) {
  const auto atom = haar_atom_2d(HaarIndex::detail({0, 1}, 1, 1, 0), 4);
  // mean-zero atom: one coefficient of modulus 1, so the constant is 1 / TV
  EXPECT_NEAR(check_coeff_decay(atom), 1.0 / tv_norm(atom), 1e-12);
  double lo = 1e9, hi = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double c = check_coeff_decay(random_image(32, seed));
    ASSERT_TRUE(std::isfinite(c));
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  // regression envelope from an exhaustive run of these 100 seeds
  EXPECT_GT(lo, 0.1);
  EXPECT_LT(hi, 0.25);
  EXPECT_THROW(check_coeff_decay(Image(16, 2.0)), std::domain_error);
}

}  // namespace
}  // namespace vdcs

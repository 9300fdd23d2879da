#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rmps/errors.hpp"
#include "rmps/random.hpp"
#include "rmps/stats.hpp"
#include "test_util.hpp"

using namespace rmps;

namespace {

double unitarity_error(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

// Eigen-angle counts of 2×2 unitaries in `bins` bins on [−π, π).
std::vector<double> angle_histogram(int samples, int bins, bool phase_fix) {
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (int s = 0; s < samples; ++s) {
    const ComplexMatrix u = detail::qr_unitary(ginibre(2, subseed(Seed{77}, s)), phase_fix);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(u);
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double theta = std::arg(es.eigenvalues()(k));
      int b = static_cast<int>((theta + std::numbers::pi) / (2 * std::numbers::pi) * bins);
      b = std::clamp(b, 0, bins - 1);
      counts[static_cast<std::size_t>(b)] += 1.0;
    }
  }
  return counts;
}

double worst_bin_z(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  const double p = 1.0 / static_cast<double>(counts.size());
  const double sigma = std::sqrt(total * p * (1 - p));
  double worst = 0.0;
  for (double c : counts) worst = std::max(worst, std::abs(c - total * p) / sigma);
  return worst;
}

}  // namespace

TEST(seed, mix_and_subseed_are_deterministic) {
  EXPECT_EQ(mix64(12345), mix64(12345));
  EXPECT_NE(mix64(1), mix64(2));
  EXPECT_EQ(subseed(Seed{9}, 4), subseed(Seed{9}, 4));
  EXPECT_NE(subseed(Seed{9}, 4).value, subseed(Seed{9}, 5).value);
  EXPECT_NE(subseed(Seed{9}, 4).value, subseed(Seed{10}, 4).value);
  for (std::uint64_t s = 0; s < 64; ++s)
    for (std::uint64_t i = 0; i < 64; ++i) EXPECT_NE(derive_seed(Seed{3}, s).value, subseed(Seed{3}, i).value);
}

TEST(ginibre, deterministic_in_seed) {
  EXPECT_EQ(ginibre(1, Seed{42})(0, 0), ginibre(1, Seed{42})(0, 0));
  const ComplexMatrix a = ginibre(5, Seed{7});
  const ComplexMatrix b = ginibre(5, Seed{7});
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(ginibre(2, Seed{1}) == ginibre(2, Seed{2}));
}

TEST(ginibre, rejects_empty_dimension) {
  EXPECT_THROW(ginibre(0, Seed{1}), InvalidDimension);
  EXPECT_THROW(haar_unitary(0, Seed{1}), InvalidDimension);
  EXPECT_THROW(haar_state(0, Seed{1}), InvalidDimension);
  EXPECT_THROW(ginibre(-3, Seed{1}), InvalidDimension);
}

TEST(ginibre, entry_has_unit_gaussian_moments) {
  const int n = 100000;
  std::vector<double> re(n), im(n);
  for (int i = 0; i < n; ++i) {
    const Complex z = ginibre(2, subseed(Seed{2024}, i))(1, 0);
    re[i] = z.real();
    im[i] = z.imag();
  }
  const double sigma = 1.0 / std::sqrt(static_cast<double>(n));
  EXPECT_LT(std::abs(mean(re)), 3 * sigma);
  EXPECT_LT(std::abs(mean(im)), 3 * sigma);
  EXPECT_NEAR(sample_stddev(re) * sample_stddev(re), 1.0, 0.05);
  EXPECT_NEAR(sample_stddev(im) * sample_stddev(im), 1.0, 0.05);
}

TEST(haar_unitary, one_by_one_is_a_phase) {
  for (int s = 0; s < 20; ++s) EXPECT_NEAR(std::abs(haar_unitary(1, Seed{std::uint64_t(s)}).matrix()(0, 0)), 1.0, 1e-12);
}

TEST(haar_unitary, unitary_to_tolerance) {
  for (int n : {1, 2, 3, 5, 8, 16, 64, 128, 256}) {
    const UnitaryMatrix u = haar_unitary(n, Seed{static_cast<std::uint64_t>(n)});
    EXPECT_EQ(u.dim(), n);
    EXPECT_LE(unitarity_error(u.matrix()), UnitaryMatrix::kTolerance) << "n=" << n;
  }
}

TEST(haar_unitary, from_matrix_checks_the_bound) {
  EXPECT_NO_THROW(UnitaryMatrix::from_matrix(ComplexMatrix::Identity(3, 3)));
  EXPECT_THROW(UnitaryMatrix::from_matrix(2.0 * ComplexMatrix::Identity(3, 3)), std::invalid_argument);
  EXPECT_THROW(UnitaryMatrix::from_matrix(ComplexMatrix::Identity(3, 2)), std::invalid_argument);
}

TEST(haar_unitary, entry_second_moment_is_one_over_n) {
  const int n = 100000;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::norm(haar_unitary(2, subseed(Seed{11}, i)).matrix()(0, 0));
  EXPECT_LT(std::abs(mean(v) - 0.5), 3 * standard_error(v));
}

TEST(haar_unitary, phase_fix_flattens_eigenangles) {
  const int samples = 10000;
  const int bins = 16;
  const double with_fix = worst_bin_z(angle_histogram(samples, bins, true));
  const double without_fix = worst_bin_z(angle_histogram(samples, bins, false));
  EXPECT_LT(with_fix, 4.0);
  EXPECT_GT(without_fix, 4.0);
}

TEST(haar_state, unit_norm) {
  EXPECT_NEAR(std::abs(haar_state(1, Seed{5}).amplitudes(0)), 1.0, 1e-12);
  for (int d : {1, 2, 7, 64, 1000}) EXPECT_NEAR(haar_state(d, Seed{1}).amplitudes.norm(), 1.0, 1e-12);
}

TEST(haar_state, first_column_of_haar_unitary) {
  for (int d : {1, 2, 5, 32}) {
    const Seed s{static_cast<std::uint64_t>(100 + d)};
    const ComplexVector col = haar_unitary(d, s).matrix().col(0);
    EXPECT_LE((haar_state(d, s).amplitudes - col).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(haar_state, first_amplitude_moment) {
  const int n = 10000;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::norm(haar_state(4, subseed(Seed{31}, i)).amplitudes(0));
  EXPECT_LT(std::abs(mean(v) - 0.25), 3 * standard_error(v));
}

TEST(haar_state, site_dims_recorded) {
  const DenseState psi = haar_state(std::vector<int>{2, 3, 2}, Seed{8});
  EXPECT_EQ(psi.total_dim(), 12u);
  EXPECT_EQ(psi.dims, (std::vector<int>{2, 3, 2}));
}

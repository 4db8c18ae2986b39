#include "gal/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include <random>

namespace gal {
namespace {

TEST(Stats, MeanAndSpread) {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_EQ(mean(xs), 5.0);
  EXPECT_NEAR(sample_stddev(xs), std::sqrt(32.0 / 7.0), 1e-15);
  EXPECT_NEAR(standard_error(xs), std::sqrt(32.0 / 7.0) / std::sqrt(8.0), 1e-15);
  EXPECT_EQ(sample_stddev(std::vector<double>{3.0}), 0.0);
  EXPECT_THROW(mean(std::vector<double>{}), Error);
}

TEST(Stats, IncompleteBetaAgainstBoost) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double a = 0.1 + 30 * u(rng), b = 0.1 + 30 * u(rng), x = u(rng);
    EXPECT_NEAR(regularized_incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12)
        << a << " " << b << " " << x;
  }
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 1.0), 1.0);
  EXPECT_NEAR(regularized_incomplete_beta(1, 1, 0.37), 0.37, 1e-15);
}

// Reference tails from scipy.stats.t.sf.
TEST(Stats, TwoSidedTailValues) {
  EXPECT_NEAR(student_t_two_sided(1.5, 3), 0.23058386524482283, 1e-12);
  EXPECT_NEAR(student_t_two_sided(0.3, 25), 0.7666574936530572, 1e-12);
  EXPECT_NEAR(student_t_two_sided(4.2, 9), 0.0023066925065402376, 1e-14);
  EXPECT_EQ(student_t_two_sided(0.0, 4), 1.0);
  EXPECT_NEAR(student_t_two_sided(-1.5, 3), student_t_two_sided(1.5, 3), 1e-16);
}

TEST(Stats, CdfAgainstBoost) {
  for (double dof : {1.0, 2.0, 4.5, 9.0, 30.0, 200.0}) {
    boost::math::students_t dist(dof);
    for (double t = -8.0; t <= 8.0; t += 0.37) {
      EXPECT_NEAR(student_t_cdf(t, dof), boost::math::cdf(dist, t), 1e-12) << dof << " " << t;
    }
  }
}

// Reference p-values from scipy.stats.ttest_rel.
TEST(Stats, PairedTTestMatchesReference) {
  const std::vector<double> a{0.71, 0.74, 0.69, 0.77, 0.72, 0.75, 0.70, 0.73, 0.76, 0.68};
  const std::vector<double> b{0.52, 0.61, 0.47, 0.58, 0.55, 0.49, 0.63, 0.50, 0.57, 0.44};
  const auto r = paired_t_test(a, b);
  EXPECT_NEAR(r.p_value, 2.0964593087491904e-06, 1e-15);
  EXPECT_GT(r.t, 0.0);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(paired_t_test(std::vector<double>{1.0, 2.0, 3.5, 2.5}, std::vector<double>{1.1, 1.7, 3.6, 2.0}).p_value,
              0.39100221895577075, 1e-12);
}

TEST(Stats, PairedTTestDegenerateCases) {
  const std::vector<double> a{0.5, 0.6, 0.7};
  const auto same = paired_t_test(a, a);
  EXPECT_TRUE(same.degenerate);
  EXPECT_EQ(same.p_value, 1.0);
  const std::vector<double> shifted{0.4, 0.5, 0.6};
  const auto shift = paired_t_test(a, shifted);
  EXPECT_TRUE(shift.degenerate || shift.p_value < 1e-10);
  const auto exact = paired_t_test(std::vector<double>{10.0, 11.0, 12.0}, std::vector<double>{0.0, 1.0, 2.0});
  EXPECT_TRUE(exact.degenerate);
  EXPECT_EQ(exact.p_value, 0.0);
  EXPECT_THROW(paired_t_test(a, std::vector<double>{1.0}), Error);
  EXPECT_THROW(paired_t_test(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
}

TEST(Stats, PairedTTestIsSymmetric) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(10), b(10);
    for (int i = 0; i < 10; ++i) {
      a[i] = normal(rng);
      b[i] = normal(rng) + 0.3;
    }
    const auto ab = paired_t_test(a, b), ba = paired_t_test(b, a);
    EXPECT_NEAR(ab.p_value, ba.p_value, 1e-14);
    EXPECT_NEAR(ab.t, -ba.t, 1e-12);
    EXPECT_GE(ab.p_value, 0.0);
    EXPECT_LE(ab.p_value, 1.0);
  }
}

}  // namespace
}  // namespace gal

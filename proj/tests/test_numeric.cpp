#include <gtest/gtest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <random>

#include "ordinal/numeric.hpp"

namespace num = ordinal::numeric;

TEST(Numeric, NormalCdfMatchesBoost) {
  const boost::math::normal_distribution<double> n;
  for (double x = -9.0; x <= 9.0; x += 0.25) {
    const double ref = boost::math::cdf(n, x);
    EXPECT_NEAR(num::normal_cdf(x), ref, 1e-15 + 1e-13 * ref) << x;
    EXPECT_NEAR(num::normal_pdf(x), boost::math::pdf(n, x), 1e-15);
  }
}

TEST(Numeric, SigmoidIsStableAtExtremes) {
  EXPECT_DOUBLE_EQ(num::sigmoid(0.0), 0.5);
  EXPECT_GT(num::sigmoid(-800.0), -1.0);
  EXPECT_EQ(num::sigmoid(800.0), 1.0);
  EXPECT_NEAR(num::sigmoid(1.0) + num::sigmoid(-1.0), 1.0, 1e-15);
}

TEST(Numeric, AdaptiveSimpsonPolynomialAndGaussian) {
  EXPECT_NEAR(num::integrate([](double x) { return x * x * x - 2 * x; }, -1.0, 2.0), 0.75, 1e-12);
  const double g = num::integrate([](double x) { return num::normal_pdf(x); }, -10.0, 10.0, 1e-12);
  EXPECT_NEAR(g, 1.0, 1e-11);
  EXPECT_EQ(num::integrate([](double) { return 1.0; }, 1.0, 1.0), 0.0);
}

TEST(Numeric, GaussLegendreIsExactForPolynomials) {
  // 20 nodes integrate degree-39 polynomials exactly.
  const double v = num::gauss_legendre([](double x) { return std::pow(x, 30) + 3 * std::pow(x, 7); }, -1.0, 1.0, 1);
  EXPECT_NEAR(v, 2.0 / 31.0, 1e-14);
  EXPECT_NEAR(num::gauss_legendre([](double x) { return std::exp(x); }, 0.0, 3.0, 4), std::exp(3.0) - 1.0, 1e-12);
}

TEST(Numeric, IncompleteBetaMatchesBoost) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> shape(0.2, 60.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = shape(rng), b = shape(rng), x = unit(rng);
    EXPECT_NEAR(num::incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12) << a << ' ' << b << ' ' << x;
  }
  EXPECT_EQ(num::incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(num::incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(Numeric, FDistributionSurvivalMatchesBoost) {
  for (double d1 : {1.0, 3.0, 13.0, 78.0}) {
    for (double d2 : {2.0, 10.0, 252.0, 1862.0}) {
      const boost::math::fisher_f_distribution<double> f(d1, d2);
      for (double x : {0.01, 0.5, 1.0, 2.5, 7.0, 40.0}) {
        const double ref = boost::math::cdf(boost::math::complement(f, x));
        EXPECT_NEAR(num::f_distribution_sf(x, d1, d2), ref, 1e-12 + 1e-9 * ref) << d1 << ' ' << d2 << ' ' << x;
      }
    }
  }
  EXPECT_EQ(num::f_distribution_sf(0.0, 2, 3), 1.0);
}

#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <vector>

#include "ordinal/softlabel.hpp"

using namespace ordinal;

namespace {

void expect_unimodal_at(const ProbabilityVector& p, Label k, double tol = 0.0) {
  EXPECT_EQ(argmax_label(p), k);
  for (std::size_t j = static_cast<std::size_t>(k); j + 1 < p.size(); ++j) EXPECT_GE(p[j] + tol, p[j + 1]);
  for (std::size_t j = static_cast<std::size_t>(k); j > 0; --j) EXPECT_GE(p[j] + tol, p[j - 1]);
}

// Midpoint rule with `steps` cells per class interval.
template <class Pdf>
std::vector<double> fine_grid_masses(const Pdf& pdf, int J, int steps = 20000) {
  std::vector<double> m(static_cast<std::size_t>(J), 0.0);
  const double h = 1.0 / (static_cast<double>(J) * steps);
  double total = 0.0;
  for (int j = 0; j < J; ++j) {
    for (int s = 0; s < steps; ++s) m[static_cast<std::size_t>(j)] += pdf((j * steps + s + 0.5) * h) * h;
    total += m[static_cast<std::size_t>(j)];
  }
  for (double& v : m) v /= total;
  return m;
}

// Triangular density written out independently of the library.
double triangle_pdf(double x, int k, int J, double alpha) {
  const double w = 1.0 / J;
  if (k == 0 || k == J - 1) {
    const double s = w / (1.0 - std::sqrt(alpha));
    const double u = k == 0 ? x : 1.0 - x;
    return u <= s ? 2.0 * (s - u) / (s * s) : 0.0;
  }
  const double h = 0.5 * w / (1.0 - std::sqrt(2.0 * alpha));
  const double c = (k + 0.5) * w;
  return std::max(0.0, h - std::abs(x - c)) / (h * h);
}

const std::vector<int> kClassCounts = {3, 4, 5, 10};
const std::vector<double> kEta = {0.8, 1.0};
const std::vector<double> kAdjacent = {0.01, 0.05, 0.10};
const std::vector<double> kExponents = {1.0, 1.5, 2.0};

}  // namespace

TEST(UniformSmooth, Examples) {
  const auto a = uniform_smooth(2, 4, 0.0).dist;
  EXPECT_EQ(a, (ProbabilityVector{0, 0, 1, 0}));
  for (double v : uniform_smooth(2, 4, 1.0).dist) EXPECT_DOUBLE_EQ(v, 0.25);
  const auto c = uniform_smooth(2, 4, 0.4).dist;
  const ProbabilityVector want{0.1, 0.1, 0.7, 0.1};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(c[j], want[j], 1e-15);
  EXPECT_EQ(uniform_smooth(2, 4, 0.4).true_class, 2);
  EXPECT_THROW(uniform_smooth(4, 4, 0.1), std::out_of_range);
  EXPECT_THROW(uniform_smooth(0, 4, 1.5), std::invalid_argument);
}

TEST(UniformSmooth, AffineInLambda) {
  for (int J : kClassCounts) {
    for (Label k = 0; k < J; ++k) {
      const auto zero = uniform_smooth(k, J, 0.0).dist;
      const auto one = uniform_smooth(k, J, 1.0).dist;
      for (double l : {0.1, 0.33, 0.8}) {
        const auto mid = uniform_smooth(k, J, l).dist;
        for (int j = 0; j < J; ++j) EXPECT_NEAR(mid[j], (1 - l) * zero[j] + l * one[j], 1e-15);
      }
    }
  }
}

TEST(TriangularTarget, SymmetricInteriorAndBoundarySupport) {
  for (Label k : {1, 2}) {
    const auto p = triangular_target(k, 4, 0.05);
    EXPECT_NEAR(p[k - 1], p[k + 1], 1e-12);
  }
  // The boundary triangle reaches only the adjacent class; beyond it the
  // mass is exactly zero.
  const auto p0 = triangular_target(0, 4, 0.05);
  EXPECT_GT(p0[0], p0[1]);
  EXPECT_GT(p0[1], 0.0);
  EXPECT_EQ(p0[2], 0.0);
  EXPECT_EQ(p0[3], 0.0);
  double s = 0.0;
  for (double v : p0) s += v;
  EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(TriangularTarget, AdjacentClassReceivesAlpha) {
  for (int J : kClassCounts) {
    for (double a : kAdjacent) {
      EXPECT_NEAR(triangular_target(0, J, a)[1], a, 1e-12);
      EXPECT_NEAR(triangular_target(J - 1, J, a)[J - 2], a, 1e-12);
      if (J > 2) {
        const auto p = triangular_target(1, J, a);
        if (J > 3) {
          EXPECT_NEAR(p[2], a, 1e-12);
        }
      }
    }
  }
}

TEST(TriangularTarget, MatchesFineGridIntegration) {
  for (int J : kClassCounts) {
    for (double a : kAdjacent) {
      for (Label k = 0; k < J; ++k) {
        const auto p = triangular_target(k, J, a);
        const auto oracle = fine_grid_masses([&](double x) { return triangle_pdf(x, k, J, a); }, J);
        for (int j = 0; j < J; ++j) EXPECT_NEAR(p[j], oracle[j], 1e-6) << J << ' ' << a << ' ' << k << ' ' << j;
      }
    }
  }
}

TEST(BetaTarget, MatchesIncompleteBetaAndFineGrid) {
  for (int J : kClassCounts) {
    for (double c : {4.0, 10.0, 50.0}) {
      for (Label k = 0; k < J; ++k) {
        const auto shape = beta_shape(k, J, c);
        const auto p = beta_target(k, J, c);
        const auto grid = fine_grid_masses(
            [&](double x) { return std::pow(x, shape.a - 1) * std::pow(1 - x, shape.b - 1); }, J);
        for (int j = 0; j < J; ++j) {
          const double exact = boost::math::ibeta(shape.a, shape.b, (j + 1.0) / J) -
                               boost::math::ibeta(shape.a, shape.b, static_cast<double>(j) / J);
          EXPECT_NEAR(p[j], exact, 1e-7);
          EXPECT_NEAR(p[j], grid[j], 1e-6);
        }
      }
    }
  }
}

TEST(BetaTarget, ArgmaxAndConcentration) {
  EXPECT_EQ(argmax_label(beta_target(1, 4, 10.0)), 1);
  double prev = 0.0;
  for (double c : {10.0, 50.0, 200.0}) {
    const double v = beta_target(2, 4, c)[2];
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_GT(prev, 0.99);
  EXPECT_THROW(beta_target(0, 4, 2.0), std::invalid_argument);
}

TEST(BetaShape, ModeSitsAtClassCentre) {
  for (int J : kClassCounts) {
    for (Label k = 0; k < J; ++k) {
      const auto s = beta_shape(k, J, 10.0);
      EXPECT_NEAR((s.a - 1) / (s.a + s.b - 2), (k + 0.5) / J, 1e-12);
      EXPECT_NEAR(s.a + s.b, 10.0, 1e-12);
    }
  }
}

TEST(ExponentialTarget, Examples) {
  const auto p = exponential_target(2, 4, 1.0, 1.0);
  const ProbabilityVector want{0.0723, 0.1966, 0.5344, 0.1966};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(p[j], want[j], 5e-5);
  const auto sharp = exponential_target(1, 5, 60.0, 1.0);
  EXPECT_NEAR(sharp[1], 1.0, 1e-12);
  for (int J : kClassCounts) {
    const auto lo = exponential_target(0, J, 1.0, 1.5);
    const auto hi = exponential_target(J - 1, J, 1.0, 1.5);
    for (int j = 0; j < J; ++j) EXPECT_DOUBLE_EQ(lo[j], hi[J - 1 - j]);
  }
  EXPECT_THROW(exponential_target(0, 4, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(exponential_target(0, 4, 1.0, 0.5), std::invalid_argument);
}

TEST(OrdinalSmooth, Examples) {
  const auto base = exponential_target(2, 4, 1.0, 1.0);  // ~ {0.0723, 0.1966, 0.5344, 0.1966}
  EXPECT_EQ(ordinal_smooth(2, 4, 0.0, base).dist, (ProbabilityVector{0, 0, 1, 0}));
  const auto same = ordinal_smooth(2, 4, 1.0, base).dist;
  for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(same[j], base[j]);
  const auto p = ordinal_smooth(2, 4, 0.8, base).dist;
  const ProbabilityVector want{0.05786, 0.15729, 0.62756, 0.15729};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(p[j], want[j], 5e-5);
  EXPECT_THROW(ordinal_smooth(1, 4, 0.5, base), std::invalid_argument);
  EXPECT_THROW(ordinal_smooth(2, 3, 0.5, base), std::invalid_argument);
}

TEST(OrdinalSmooth, AffineInLambda) {
  const auto base = beta_target(1, 5, 10.0);
  const auto zero = ordinal_smooth(1, 5, 0.0, base).dist;
  const auto one = ordinal_smooth(1, 5, 1.0, base).dist;
  for (double l : {0.2, 0.8}) {
    const auto mid = ordinal_smooth(1, 5, l, base).dist;
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(mid[j], (1 - l) * zero[j] + l * one[j], 1e-15);
  }
}

TEST(SoftTarget, GridPropertiesForEveryEncoder) {
  std::vector<SoftLabelConfig> grid;
  for (double eta : kEta) {
    for (double a : kAdjacent) grid.push_back({SoftLabelKind::triangular, eta, a});
    for (double c : {4.0, 10.0, 50.0}) grid.push_back({SoftLabelKind::beta, eta, 0.05, c});
    for (double pe : kExponents) grid.push_back({SoftLabelKind::exponential, eta, 0.05, 10.0, 1.0, pe});
  }
  for (double l : {0.0, 0.1, 0.5, 0.9}) grid.push_back({SoftLabelKind::uniform, l});
  for (const auto& cfg : grid) {
    for (int J : kClassCounts) {
      const auto table = soft_target_table(J, cfg);
      for (Label k = 0; k < J; ++k) {
        const auto& p = table[static_cast<std::size_t>(k)];
        double s = 0.0;
        for (double v : p) {
          EXPECT_GE(v, 0.0);
          s += v;
        }
        EXPECT_NEAR(s, 1.0, cfg.kind == SoftLabelKind::beta ? 1e-6 : 1e-9);
        expect_unimodal_at(p, k);
      }
    }
  }
}

TEST(SoftLabelConfig, Validation) {
  SoftLabelConfig c{SoftLabelKind::triangular, 1.0, 0.6};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {SoftLabelKind::uniform, -0.1};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(unimodal_distribution(0, 3, SoftLabelConfig{}), std::invalid_argument);
}

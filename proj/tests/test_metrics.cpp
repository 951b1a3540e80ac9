#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ordinal/metrics.hpp"

using namespace ordinal;

namespace {

ConfusionMatrix matrix(const std::vector<std::vector<long long>>& rows) {
  ConfusionMatrix o(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) o.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return o;
}

// Straight from the definition, nothing shared with the library.
double brute_qwk(const ConfusionMatrix& o, int n, bool by_classes) {
  const int J = o.num_classes();
  double total = 0.0;
  std::vector<double> r(J, 0.0), c(J, 0.0);
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) {
      total += o.at(i, j);
      r[i] += o.at(i, j);
      c[j] += o.at(i, j);
    }
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) {
      const double w = std::pow(std::abs(i - j) / (J - 1.0), n);
      num += w * o.at(i, j);
      den += w * r[i] * c[j] / (by_classes ? J : total);
    }
  }
  return 1.0 - num / den;
}

ConfusionMatrix random_matrix(std::mt19937_64& rng, int J) {
  ConfusionMatrix o(J);
  std::uniform_int_distribution<int> count(0, 30);
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) o.at(i, j) = count(rng);
  }
  o.at(0, 0) += 1;
  o.at(J - 1, J - 1) += 1;
  return o;
}

}  // namespace

TEST(Qwk, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    const int J = 2 + static_cast<int>(rng() % 7);
    const auto o = random_matrix(rng, J);
    for (int n : {1, 2}) {
      EXPECT_NEAR(qwk(o, n), brute_qwk(o, n, false), 1e-12);
      EXPECT_NEAR(qwk(o, n, ExpectedNormalization::class_count), brute_qwk(o, n, true), 1e-12);
    }
  }
}

TEST(Qwk, PerfectAgreementIsOne) {
  std::mt19937_64 rng(2);
  for (int J = 2; J <= 8; ++J) {
    ConfusionMatrix o(J);
    for (int i = 0; i < J; ++i) o.at(i, i) = 1 + static_cast<long long>(rng() % 20);
    EXPECT_DOUBLE_EQ(qwk(o), 1.0);
    EXPECT_DOUBLE_EQ(qwk(o, 1), 1.0);
  }
}

TEST(Qwk, SmallExample) {
  const auto o = matrix({{1, 1}, {0, 2}});
  EXPECT_NEAR(qwk(o), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(accuracy(o), 0.75);
  const auto sens = per_class_sensitivity(o);
  EXPECT_DOUBLE_EQ(*sens[0], 0.5);
  EXPECT_DOUBLE_EQ(*sens[1], 1.0);
}

TEST(Qwk, InvariantToScalingCounts) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto o = random_matrix(rng, 4);
    ConfusionMatrix scaled(4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) scaled.at(i, j) = 7 * o.at(i, j);
    }
    EXPECT_NEAR(qwk(o), qwk(scaled), 1e-12);
  }
}

TEST(Qwk, IndependentMarginsGiveZero) {
  // Outer product of the margins: observed equals chance agreement.
  const std::vector<long long> rows{2, 3, 5}, cols{4, 1, 5};
  ConfusionMatrix o(3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) o.at(i, j) = rows[i] * cols[j];
  }
  EXPECT_NEAR(qwk(o), 0.0, 1e-12);
  EXPECT_NEAR(qwk(o, 1), 0.0, 1e-12);
}

TEST(Qwk, ClassCountVariantDiffersByScale) {
  const auto o = matrix({{5, 2, 0}, {1, 6, 2}, {0, 1, 3}});
  const double n = static_cast<double>(o.total());
  const double by_n = qwk(o);
  const double by_j = qwk(o, 2, ExpectedNormalization::class_count);
  // 1 - k_J = (1 - k_N) * J / N
  EXPECT_NEAR(1.0 - by_j, (1.0 - by_n) * 3.0 / n, 1e-12);
}

TEST(Qwk, RejectsDegenerateInput) {
  EXPECT_THROW(qwk(ConfusionMatrix(3)), std::invalid_argument);
  EXPECT_THROW(qwk(matrix({{4, 0}, {0, 0}})), DegenerateAgreement);
}

TEST(Amae, Example) {
  const std::vector<Label> y_true{0, 0, 1, 1, 2, 2};
  const std::vector<Label> y_pred{1, 2, 1, 1, 2, 2};
  const auto per = per_class_mae(y_true, y_pred, 3);
  EXPECT_DOUBLE_EQ(*per[0], 1.5);
  EXPECT_DOUBLE_EQ(*per[1], 0.0);
  EXPECT_DOUBLE_EQ(*per[2], 0.0);
  EXPECT_DOUBLE_EQ(amae(y_true, y_pred, 3), 0.5);
}

TEST(Amae, SkipsAbsentClasses) {
  const std::vector<Label> y_true{0, 0, 2};
  const std::vector<Label> y_pred{1, 0, 2};
  EXPECT_FALSE(per_class_mae(y_true, y_pred, 4)[1].has_value());
  EXPECT_DOUBLE_EQ(amae(y_true, y_pred, 4), 0.25);
  EXPECT_EQ(absent_classes(y_true, 4), (std::vector<Label>{1, 3}));
}

TEST(Amae, BoundsAndPerfectPrediction) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const int J = 2 + static_cast<int>(rng() % 6);
    std::vector<Label> y(50), p(50);
    for (auto& v : y) v = static_cast<Label>(rng() % J);
    for (auto& v : p) v = static_cast<Label>(rng() % J);
    const double a = amae(y, p, J);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, J - 1.0);
    EXPECT_DOUBLE_EQ(amae(y, y, J), 0.0);
  }
}

TEST(Amae, RejectsBadInput) {
  const std::vector<Label> a{0, 1}, b{0};
  EXPECT_THROW(amae(a, b, 2), std::invalid_argument);
  const std::vector<Label> c{0, 3};
  EXPECT_THROW(amae(a, c, 3), std::out_of_range);
}

TEST(ImbalanceRatio, Examples) {
  const std::vector<std::size_t> two{10, 30};
  EXPECT_NEAR(imbalance_ratio(two), (3.0 + 1.0 / 3.0) / 2.0, 1e-12);
  const std::vector<std::size_t> balanced{7, 7, 7, 7};
  EXPECT_DOUBLE_EQ(imbalance_ratio(balanced), 1.0);
  const std::vector<std::size_t> reference{40, 102, 106, 47};
  EXPECT_NEAR(imbalance_ratio(reference), 1.277, 1e-3);
}

TEST(ImbalanceRatio, PermutationInvariantAndAtLeastOne) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::size_t> c(2 + rng() % 6);
    for (auto& v : c) v = 1 + rng() % 100;
    const double ir = imbalance_ratio(c);
    EXPECT_GE(ir, 1.0 - 1e-12);
    std::shuffle(c.begin(), c.end(), rng);
    EXPECT_NEAR(imbalance_ratio(c), ir, 1e-12);
  }
  const std::vector<std::size_t> empty_class{0, 4};
  EXPECT_THROW(imbalance_ratio(empty_class), std::invalid_argument);
}

TEST(Evaluate, ReportsEveryMetric) {
  const std::vector<Label> y_true{0, 0, 1, 1, 2, 2};
  const std::vector<Label> y_pred{0, 1, 1, 1, 2, 0};
  const auto r = evaluate(y_true, y_pred, 3);
  const auto o = confusion_matrix(y_true, y_pred, 3);
  EXPECT_DOUBLE_EQ(r.qwk, qwk(o));
  EXPECT_DOUBLE_EQ(r.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.amae, (0.5 + 0.0 + 1.0) / 3.0);
  ASSERT_EQ(r.sensitivity.size(), 3u);
  EXPECT_DOUBLE_EQ(*r.sensitivity[2], 0.5);
  EXPECT_DOUBLE_EQ(*r.mae[2], 1.0);
  const auto lin = evaluate(y_true, y_pred, 3, {1, ExpectedNormalization::sample_total});
  EXPECT_DOUBLE_EQ(lin.qwk, qwk(o, 1));
}

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "ordinal/core.hpp"

using namespace ordinal;

namespace {

MultiViewDataset dataset_with_counts(const std::vector<std::size_t>& counts, std::size_t features = 2) {
  MultiViewDataset d;
  d.num_classes = static_cast<int>(counts.size());
  d.view_names = {"a", "b"};
  std::int64_t id = 100;
  for (std::size_t q = 0; q < counts.size(); ++q) {
    for (std::size_t n = 0; n < counts[q]; ++n) {
      d.labels.push_back(static_cast<Label>(q));
      d.sample_ids.push_back(id++);
    }
  }
  for (int v = 0; v < 2; ++v) {
    FeatureMatrix x(d.labels.size(), features);
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t c = 0; c < features; ++c) x(i, c) = static_cast<double>(i * 10 + c + v);
    }
    d.views.push_back(x);
  }
  return d;
}

}  // namespace

TEST(ConfusionMatrix, Examples) {
  const std::vector<Label> a{0, 1};
  const auto o = confusion_matrix(a, a, 2);
  EXPECT_EQ(o.at(0, 0), 1);
  EXPECT_EQ(o.at(1, 1), 1);
  EXPECT_EQ(o.at(0, 1), 0);

  const std::vector<Label> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  const auto o2 = confusion_matrix(t, p, 2);
  EXPECT_EQ(o2.at(0, 0), 1);
  EXPECT_EQ(o2.at(0, 1), 1);
  EXPECT_EQ(o2.at(1, 0), 0);
  EXPECT_EQ(o2.at(1, 1), 2);

  const std::vector<Label> t3{0}, p3{2};
  EXPECT_THROW(confusion_matrix(t3, p3, 2), std::out_of_range);
}

TEST(ConfusionMatrix, TotalEqualsLengthForRandomInputs) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const int J = 2 + static_cast<int>(rng() % 7);
    const std::size_t n = 1 + rng() % 300;
    std::vector<Label> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<Label>(rng() % J);
      p[i] = static_cast<Label>(rng() % J);
    }
    const auto o = confusion_matrix(t, p, J);
    EXPECT_EQ(o.total(), static_cast<long long>(n));
    long long rows = 0;
    for (int q = 0; q < J; ++q) rows += o.row_sum(q);
    EXPECT_EQ(rows, static_cast<long long>(n));
  }
}

TEST(ArgmaxLabel, Examples) {
  EXPECT_EQ(argmax_label(std::vector<double>{0.1, 0.7, 0.2}), 1);
  EXPECT_EQ(argmax_label(std::vector<double>{0.5, 0.5}), 0);
  EXPECT_EQ(argmax_label(std::vector<double>{0.2689, 0.2311, 0.2311, 0.2689}), 0);
  EXPECT_THROW(argmax_label(std::vector<double>{}), std::invalid_argument);
}

TEST(ArgmaxLabel, InvariantUnderPositiveScaling) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> p(5);
    for (double& x : p) x = std::round(u(rng) * 8) / 8;  // frequent ties
    std::vector<double> scaled = p;
    for (double& x : scaled) x *= 4.0;
    EXPECT_EQ(argmax_label(p), argmax_label(scaled));
  }
}

TEST(ProbabilityVector, Validation) {
  EXPECT_NO_THROW(check_probability_vector(std::vector<double>{0.25, 0.75}));
  EXPECT_THROW(check_probability_vector(std::vector<double>{0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(check_probability_vector(std::vector<double>{-0.1, 1.1}), std::invalid_argument);
  EXPECT_THROW(check_probability_vector(std::vector<double>{}), std::invalid_argument);
}

TEST(StratifiedSplit, ReferenceClassCounts) {
  const std::vector<std::size_t> counts{40, 102, 106, 47};
  EXPECT_EQ(stratified_test_counts(counts, 0.2), (std::vector<std::size_t>{8, 20, 21, 10}));
  const auto d = dataset_with_counts(counts);
  const auto [train, test] = stratified_split(d, 0.2, 42);
  EXPECT_EQ(train.class_counts(), (std::vector<std::size_t>{32, 82, 85, 37}));
  EXPECT_EQ(test.class_counts(), (std::vector<std::size_t>{8, 20, 21, 10}));
}

TEST(StratifiedSplit, HalfOfTwoTwo) {
  EXPECT_EQ(stratified_test_counts(std::vector<std::size_t>{2, 2}, 0.5), (std::vector<std::size_t>{1, 1}));
}

TEST(StratifiedSplit, DeterministicAndSeedSensitive) {
  const auto d = dataset_with_counts({30, 40, 30});
  const auto a = stratified_split_indices(d.labels, 3, 0.2, 5);
  const auto b = stratified_split_indices(d.labels, 3, 0.2, 5);
  const auto c = stratified_split_indices(d.labels, 3, 0.2, 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.second, c.second);
}

TEST(StratifiedSplit, PartitionPropertiesOnRandomCounts) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t J = 2 + rng() % 6;
    std::vector<std::size_t> counts(J);
    for (auto& c : counts) c = 2 + rng() % 120;
    const double fraction = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
    const auto d = dataset_with_counts(counts);
    const auto [train, test] = stratified_split_indices(d.labels, static_cast<int>(J), fraction, rep);
    std::vector<std::size_t> all = train;
    all.insert(all.end(), test.begin(), test.end());
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), d.size());
    for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i], i);  // union, disjoint
    const auto test_counts = stratified_test_counts(counts, fraction);
    // Measured against the realised test share, which rounding of the total
    // can move slightly away from the requested fraction.
    const double n_test = static_cast<double>(test.size());
    const double realised = n_test / static_cast<double>(d.size());
    EXPECT_EQ(std::accumulate(test_counts.begin(), test_counts.end(), std::size_t{0}), test.size());
    for (std::size_t q = 0; q < J; ++q) {
      EXPECT_LT(std::abs(static_cast<double>(test_counts[q]) - realised * counts[q]), 1.0)
          << "class " << q << " of " << counts[q];
      EXPECT_GE(test_counts[q], 1u);
      EXPECT_LT(test_counts[q], counts[q]);
    }
  }
}

TEST(StratifiedSplit, RejectsTinyClassesAndBadFractions) {
  EXPECT_THROW(stratified_test_counts(std::vector<std::size_t>{1, 10}, 0.2), std::invalid_argument);
  EXPECT_THROW(stratified_test_counts(std::vector<std::size_t>{5, 10}, 0.0), std::invalid_argument);
  EXPECT_THROW(stratified_test_counts(std::vector<std::size_t>{5, 10}, 1.0), std::invalid_argument);
}

TEST(StratifiedSplit, KeepsViewsAligned) {
  const auto d = dataset_with_counts({10, 10});
  const auto [train, test] = stratified_split(d, 0.3, 9);
  for (const auto* part : {&train, &test}) {
    part->validate();
    for (std::size_t i = 0; i < part->size(); ++i) {
      const auto src = static_cast<std::size_t>(part->sample_ids[i] - 100);
      EXPECT_EQ(part->views[0](i, 0), d.views[0](src, 0));
      EXPECT_EQ(part->views[1](i, 1), d.views[1](src, 1));
      EXPECT_EQ(part->labels[i], d.labels[src]);
    }
  }
}

TEST(StratifiedResample, PreservesHistogramForAllSeeds) {
  const auto d = dataset_with_counts({1, 7, 20, 3});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = stratified_resample(d, seed);
    EXPECT_EQ(r.class_counts(), d.class_counts());
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_EQ(d.labels[static_cast<std::size_t>(r.sample_ids[i] - 100)], r.labels[i]);
    }
  }
}

TEST(StratifiedResample, SingleSampleClassIsRepeated) {
  const auto d = dataset_with_counts({1, 5});
  const auto r = stratified_resample(d, 4);
  const auto it = std::find(r.labels.begin(), r.labels.end(), 0);
  ASSERT_NE(it, r.labels.end());
  EXPECT_EQ(r.sample_ids[static_cast<std::size_t>(it - r.labels.begin())], 100);
}

TEST(StratifiedResample, DifferentSeedsGiveDifferentMultisets) {
  const auto d = dataset_with_counts({50, 50});
  const auto a = stratified_resample_indices(d.labels, 2, 1);
  const auto b = stratified_resample_indices(d.labels, 2, 2);
  EXPECT_NE(a, b);
  EXPECT_EQ(a, stratified_resample_indices(d.labels, 2, 1));
}

TEST(StratifiedResample, ErrorsOnEmptyInputOrMissingClass) {
  EXPECT_THROW(stratified_resample_indices(std::vector<Label>{}, 2, 1), std::invalid_argument);
  EXPECT_THROW(stratified_resample_indices(std::vector<Label>{0, 0}, 2, 1), std::invalid_argument);
}

TEST(GroupFolds, DuplicatesStayTogetherAndClassesAreSpread) {
  const auto d = dataset_with_counts({12, 30, 9});
  const auto r = stratified_resample(d, 11);
  const auto folds = stratified_group_folds(r.labels, r.sample_ids, 3, 3, 5);
  std::map<std::int64_t, int> seen;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto [it, fresh] = seen.emplace(r.sample_ids[i], folds[i]);
    if (!fresh) {
      EXPECT_EQ(it->second, folds[i]);
    }
  }
  // Distinct ids of each class split as evenly as possible over the folds.
  std::map<std::pair<Label, int>, int> per;
  std::map<Label, std::set<std::int64_t>> ids;
  for (std::size_t i = 0; i < r.size(); ++i) ids[r.labels[i]].insert(r.sample_ids[i]);
  for (const auto& [y, s] : ids) {
    for (auto id : s) ++per[{y, seen[id]}];
    for (int f = 0; f < 3; ++f) {
      EXPECT_LE(std::abs(per[{y, f}] - static_cast<int>(s.size()) / 3), 1);
    }
  }
}

TEST(GroupFolds, RejectsTooFewDistinctSamples) {
  const std::vector<Label> y{0, 0, 0, 1, 1, 1};
  const std::vector<std::int64_t> ids{1, 1, 2, 3, 4, 5};
  EXPECT_THROW(stratified_group_folds(y, ids, 2, 3, 0), std::invalid_argument);
}

TEST(Seeds, DerivedSeedsDiffer) {
  std::set<std::uint64_t> s;
  for (std::uint64_t t = 0; t < 1000; ++t) s.insert(derive_seed(42, t));
  EXPECT_EQ(s.size(), 1000u);
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
}

#pragma once

// Ordinal-domain value types, confusion matrices and stratified splitting.
//
// Labels are 0-based ranks: class C_1 of a J-class problem is label 0 and the
// ordering of labels is the ordering of classes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ordinal {

using Label = int;
using ProbabilityVector = std::vector<double>;
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds from a run seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix_seed(mix_seed(base) ^ (tag * 0xd1b54a32d192ed03ULL));
}

inline void check_label(Label k, int num_classes) {
  if (num_classes < 1) {
    throw std::invalid_argument("number of classes must be positive");
  }
  if (k < 0 || k >= num_classes) {
    throw std::out_of_range("label " + std::to_string(k) + " outside [0, " +
                            std::to_string(num_classes) + ")");
  }
}

/// Throws unless `p` is nonnegative and sums to one within `tol`.
inline void check_probability_vector(std::span<const double> p, double tol = 1e-9) {
  if (p.empty()) {
    throw std::invalid_argument("probability vector is empty");
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("probability vector has a negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument("probability vector sums to " + std::to_string(sum));
  }
}

/// Lowest index attaining the maximum.
inline Label argmax_label(std::span<const double> p) {
  if (p.empty()) {
    throw std::invalid_argument("argmax_label: empty vector");
  }
  return static_cast<Label>(std::max_element(p.begin(), p.end()) - p.begin());
}

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes)
      : num_classes_(num_classes),
        counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
    if (num_classes < 1) {
      throw std::invalid_argument("ConfusionMatrix: number of classes must be positive");
    }
  }

  int num_classes() const { return num_classes_; }

  long long& at(int true_class, int predicted) {
    return counts_[static_cast<std::size_t>(true_class) * num_classes_ + predicted];
  }
  long long at(int true_class, int predicted) const {
    return counts_[static_cast<std::size_t>(true_class) * num_classes_ + predicted];
  }

  long long row_sum(int i) const {
    long long s = 0;
    for (int j = 0; j < num_classes_; ++j) s += at(i, j);
    return s;
  }
  long long col_sum(int j) const {
    long long s = 0;
    for (int i = 0; i < num_classes_; ++i) s += at(i, j);
    return s;
  }
  long long total() const { return std::accumulate(counts_.begin(), counts_.end(), 0LL); }
  long long trace() const {
    long long s = 0;
    for (int i = 0; i < num_classes_; ++i) s += at(i, i);
    return s;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int num_classes_;
  std::vector<long long> counts_;
};

inline ConfusionMatrix confusion_matrix(std::span<const Label> y_true,
                                        std::span<const Label> y_pred, int num_classes) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("confusion_matrix: length mismatch");
  }
  if (y_true.empty()) {
    throw std::invalid_argument("confusion_matrix: no samples");
  }
  ConfusionMatrix o(num_classes);
  for (std::size_t n = 0; n < y_true.size(); ++n) {
    check_label(y_true[n], num_classes);
    check_label(y_pred[n], num_classes);
    ++o.at(y_true[n], y_pred[n]);
  }
  return o;
}

inline std::vector<std::size_t> class_histogram(std::span<const Label> labels, int num_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (Label y : labels) {
    check_label(y, num_classes);
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

/// Dense row-major matrix of per-sample features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out(idx.size(), cols);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto src = row(idx[r]);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Features of a single view with their labels and sample ids.
struct ViewData {
  FeatureMatrix features;
  std::vector<Label> labels;
  std::vector<std::int64_t> sample_ids;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }

  ViewData subset(std::span<const std::size_t> idx) const {
    ViewData out;
    out.features = features.select_rows(idx);
    out.num_classes = num_classes;
    out.labels.reserve(idx.size());
    out.sample_ids.reserve(idx.size());
    for (std::size_t i : idx) {
      out.labels.push_back(labels[i]);
      out.sample_ids.push_back(sample_ids[i]);
    }
    return out;
  }
};

/// Aligned per-view feature tables sharing one label per sample.
struct MultiViewDataset {
  std::vector<std::string> view_names;
  std::vector<FeatureMatrix> views;
  std::vector<Label> labels;
  std::vector<std::int64_t> sample_ids;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }

  void validate() const {
    if (num_classes < 2) {
      throw std::invalid_argument("MultiViewDataset: need at least two classes");
    }
    if (view_names.size() != views.size() || views.empty()) {
      throw std::invalid_argument("MultiViewDataset: view names and tables disagree");
    }
    if (sample_ids.size() != labels.size()) {
      throw std::invalid_argument("MultiViewDataset: sample ids and labels disagree");
    }
    for (std::size_t v = 0; v < views.size(); ++v) {
      if (views[v].rows != labels.size() ||
          views[v].data.size() != views[v].rows * views[v].cols) {
        throw std::invalid_argument("MultiViewDataset: view '" + view_names[v] +
                                    "' is not aligned with the labels");
      }
    }
    for (Label y : labels) check_label(y, num_classes);
  }

  std::size_t view_index(const std::string& name) const {
    const auto it = std::find(view_names.begin(), view_names.end(), name);
    if (it == view_names.end()) {
      throw std::out_of_range("unknown view '" + name + "'");
    }
    return static_cast<std::size_t>(it - view_names.begin());
  }

  ViewData view(const std::string& name) const { return view(view_index(name)); }
  ViewData view(std::size_t v) const {
    return ViewData{views.at(v), labels, sample_ids, num_classes};
  }

  std::vector<std::size_t> class_counts() const { return class_histogram(labels, num_classes); }

  MultiViewDataset subset(std::span<const std::size_t> idx) const {
    MultiViewDataset out;
    out.view_names = view_names;
    out.num_classes = num_classes;
    for (const auto& v : views) out.views.push_back(v.select_rows(idx));
    for (std::size_t i : idx) {
      out.labels.push_back(labels.at(i));
      out.sample_ids.push_back(sample_ids.at(i));
    }
    return out;
  }
};

namespace detail {

inline std::vector<std::vector<std::size_t>> indices_by_class(std::span<const Label> labels,
                                                              int num_classes) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_label(labels[i], num_classes);
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return by_class;
}

}  // namespace detail

/// Per-class test-partition sizes for a stratified holdout.
///
/// The global test size is ceil(fraction * N). Training quotas are allocated
/// by largest remainder of count * n_train / N, ties going to the larger
/// class and then the lower index; each class keeps at least one sample on
/// each side.
inline std::vector<std::size_t> stratified_test_counts(std::span<const std::size_t> class_counts,
                                                       double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("stratified split: test fraction must lie in (0, 1)");
  }
  std::size_t total = 0;
  for (std::size_t q = 0; q < class_counts.size(); ++q) {
    if (class_counts[q] < 2) {
      throw std::invalid_argument("stratified split: class " + std::to_string(q) + " has " +
                                  std::to_string(class_counts[q]) +
                                  " samples, need at least 2 for both partitions");
    }
    total += class_counts[q];
  }
  const auto n_test = static_cast<std::size_t>(
      std::ceil(test_fraction * static_cast<double>(total) - 1e-9));
  const std::size_t n_train = total - n_test;

  const std::size_t J = class_counts.size();
  std::vector<std::size_t> train(J);
  std::vector<double> remainder(J);
  std::size_t assigned = 0;
  for (std::size_t q = 0; q < J; ++q) {
    const double quota = static_cast<double>(class_counts[q]) * static_cast<double>(n_train) /
                         static_cast<double>(total);
    train[q] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[q] = quota - static_cast<double>(train[q]);
    assigned += train[q];
  }
  std::vector<std::size_t> order(J);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(remainder[a] - remainder[b]) > 1e-12) return remainder[a] > remainder[b];
    if (class_counts[a] != class_counts[b]) return class_counts[a] > class_counts[b];
    return a < b;
  });
  for (std::size_t i = 0; assigned < n_train && i < J; ++i, ++assigned) {
    ++train[order[i]];
  }
  std::vector<std::size_t> test(J);
  for (std::size_t q = 0; q < J; ++q) {
    train[q] = std::clamp<std::size_t>(train[q], 1, class_counts[q] - 1);
    test[q] = class_counts[q] - train[q];
  }
  return test;
}

/// Row indices of the (train, test) partitions, each sorted ascending.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    std::span<const Label> labels, int num_classes, double test_fraction, std::uint64_t seed) {
  const auto by_class = detail::indices_by_class(labels, num_classes);
  std::vector<std::size_t> counts;
  for (const auto& c : by_class) counts.push_back(c.size());
  const auto n_test = stratified_test_counts(counts, test_fraction);

  Rng rng(seed);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (std::size_t q = 0; q < by_class.size(); ++q) {
    auto members = by_class[q];
    std::shuffle(members.begin(), members.end(), rng);
    test.insert(test.end(), members.begin(), members.begin() + static_cast<long>(n_test[q]));
    train.insert(train.end(), members.begin() + static_cast<long>(n_test[q]), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

inline std::pair<MultiViewDataset, MultiViewDataset> stratified_split(const MultiViewDataset& data,
                                                                      double test_fraction,
                                                                      std::uint64_t seed) {
  data.validate();
  const auto [train, test] =
      stratified_split_indices(data.labels, data.num_classes, test_fraction, seed);
  return {data.subset(train), data.subset(test)};
}

/// Per-class bootstrap: same class histogram, rows drawn with replacement
/// inside each class. Returned indices are sorted.
inline std::vector<std::size_t> stratified_resample_indices(std::span<const Label> labels,
                                                            int num_classes, std::uint64_t seed) {
  if (labels.empty()) {
    throw std::invalid_argument("stratified_resample: empty dataset");
  }
  const auto by_class = detail::indices_by_class(labels, num_classes);
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (std::size_t q = 0; q < by_class.size(); ++q) {
    const auto& members = by_class[q];
    if (members.empty()) {
      throw std::invalid_argument("stratified_resample: class " + std::to_string(q) + " is empty");
    }
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t n = 0; n < members.size(); ++n) out.push_back(members[pick(rng)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline MultiViewDataset stratified_resample(const MultiViewDataset& data, std::uint64_t seed) {
  data.validate();
  return data.subset(stratified_resample_indices(data.labels, data.num_classes, seed));
}

/// Stratified k-fold assignment that keeps all rows sharing a sample id in the
/// same fold (bootstrap duplicates never straddle train and validation).
/// Returns the fold number of every row.
inline std::vector<int> stratified_group_folds(std::span<const Label> labels,
                                               std::span<const std::int64_t> sample_ids,
                                               int num_classes, int folds, std::uint64_t seed) {
  if (folds < 2) {
    throw std::invalid_argument("stratified folds: need at least 2 folds");
  }
  if (labels.size() != sample_ids.size()) {
    throw std::invalid_argument("stratified folds: labels and ids disagree");
  }
  std::map<std::int64_t, Label> id_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_label(labels[i], num_classes);
    const auto [it, inserted] = id_label.emplace(sample_ids[i], labels[i]);
    if (!inserted && it->second != labels[i]) {
      throw std::invalid_argument("stratified folds: sample id " + std::to_string(sample_ids[i]) +
                                  " carries two labels");
    }
  }
  std::vector<std::vector<std::int64_t>> ids_by_class(static_cast<std::size_t>(num_classes));
  for (const auto& [id, y] : id_label) ids_by_class[static_cast<std::size_t>(y)].push_back(id);

  Rng rng(seed);
  std::map<std::int64_t, int> fold_of;
  int next = 0;
  for (std::size_t q = 0; q < ids_by_class.size(); ++q) {
    auto& ids = ids_by_class[q];
    if (ids.empty()) continue;
    if (ids.size() < static_cast<std::size_t>(folds)) {
      throw std::invalid_argument("stratified folds: class " + std::to_string(q) + " has " +
                                  std::to_string(ids.size()) + " distinct samples, fewer than " +
                                  std::to_string(folds) + " folds");
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    // Continue the round-robin across classes so small classes do not all
    // start in fold 0.
    for (std::int64_t id : ids) {
      fold_of[id] = next;
      next = (next + 1) % folds;
    }
  }
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = fold_of.at(sample_ids[i]);
  return out;
}

}  // namespace ordinal

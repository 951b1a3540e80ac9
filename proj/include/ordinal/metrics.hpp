#pragma once

// Ordinal and nominal evaluation metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinal/core.hpp"

namespace ordinal {

/// omega_ij = |i - j|^n / (J - 1)^n
class PenaltyMatrix {
 public:
  PenaltyMatrix(int num_classes, int exponent) : num_classes_(num_classes), exponent_(exponent) {
    if (num_classes < 2) throw std::invalid_argument("penalty matrix: need at least two classes");
    if (exponent < 1) throw std::invalid_argument("penalty matrix: exponent must be >= 1");
    const double scale = std::pow(num_classes - 1.0, exponent);
    omega_.resize(static_cast<std::size_t>(num_classes) * num_classes);
    for (int i = 0; i < num_classes; ++i) {
      for (int j = 0; j < num_classes; ++j) {
        omega_[static_cast<std::size_t>(i) * num_classes + j] =
            std::pow(std::abs(i - j), exponent) / scale;
      }
    }
  }

  int num_classes() const { return num_classes_; }
  int exponent() const { return exponent_; }
  double operator()(int i, int j) const {
    return omega_[static_cast<std::size_t>(i) * num_classes_ + j];
  }

 private:
  int num_classes_;
  int exponent_;
  std::vector<double> omega_;
};

/// How the chance-agreement matrix is scaled: E_ij = O_i. O_.j / N (Cohen) or
/// the literal / J variant.
enum class ExpectedNormalization { sample_total, class_count };

/// Thrown when the chance-agreement denominator vanishes.
class DegenerateAgreement : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double qwk(const ConfusionMatrix& o, int exponent = 2,
                  ExpectedNormalization norm = ExpectedNormalization::sample_total) {
  const long long n = o.total();
  if (n < 1) throw std::invalid_argument("qwk: empty confusion matrix");
  const int J = o.num_classes();
  const PenaltyMatrix omega(J, exponent);
  const double divisor = norm == ExpectedNormalization::sample_total ? static_cast<double>(n)
                                                                     : static_cast<double>(J);
  std::vector<double> rows(static_cast<std::size_t>(J));
  std::vector<double> cols(static_cast<std::size_t>(J));
  for (int i = 0; i < J; ++i) {
    rows[static_cast<std::size_t>(i)] = static_cast<double>(o.row_sum(i));
    cols[static_cast<std::size_t>(i)] = static_cast<double>(o.col_sum(i));
  }
  double observed = 0.0;
  double expected = 0.0;
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) {
      observed += omega(i, j) * static_cast<double>(o.at(i, j));
      expected += omega(i, j) * rows[static_cast<std::size_t>(i)] *
                  cols[static_cast<std::size_t>(j)] / divisor;
    }
  }
  if (expected == 0.0) {
    throw DegenerateAgreement("qwk: chance agreement is perfect (single-class margins)");
  }
  return 1.0 - observed / expected;
}

inline double accuracy(const ConfusionMatrix& o) {
  const long long n = o.total();
  if (n < 1) throw std::invalid_argument("accuracy: empty confusion matrix");
  return static_cast<double>(o.trace()) / static_cast<double>(n);
}

namespace detail {

inline void check_pairs(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("metric: length mismatch");
  if (y_true.empty()) throw std::invalid_argument("metric: no samples");
}

inline int infer_classes(std::span<const Label> y_true, std::span<const Label> y_pred) {
  Label top = 0;
  for (Label y : y_true) top = std::max(top, y);
  for (Label y : y_pred) top = std::max(top, y);
  return top + 1;
}

}  // namespace detail

/// Mean absolute rank error of each class; nullopt for classes with no samples.
inline std::vector<std::optional<double>> per_class_mae(std::span<const Label> y_true,
                                                       std::span<const Label> y_pred,
                                                       int num_classes = 0) {
  detail::check_pairs(y_true, y_pred);
  if (num_classes == 0) num_classes = detail::infer_classes(y_true, y_pred);
  std::vector<double> sum(static_cast<std::size_t>(num_classes), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    check_label(y_true[i], num_classes);
    check_label(y_pred[i], num_classes);
    sum[static_cast<std::size_t>(y_true[i])] += std::abs(y_true[i] - y_pred[i]);
    ++count[static_cast<std::size_t>(y_true[i])];
  }
  std::vector<std::optional<double>> out(static_cast<std::size_t>(num_classes));
  for (std::size_t q = 0; q < out.size(); ++q) {
    if (count[q] > 0) out[q] = sum[q] / static_cast<double>(count[q]);
  }
  return out;
}

/// Average of the per-class MAEs over the classes present in y_true.
inline double amae(std::span<const Label> y_true, std::span<const Label> y_pred, int num_classes = 0) {
  const auto per_class = per_class_mae(y_true, y_pred, num_classes);
  double sum = 0.0;
  int present = 0;
  for (const auto& m : per_class) {
    if (m) {
      sum += *m;
      ++present;
    }
  }
  return sum / present;
}

/// Classes in [0, J) with no sample in y_true; these are left out of amae().
inline std::vector<Label> absent_classes(std::span<const Label> y_true, int num_classes) {
  const auto counts = class_histogram(y_true, num_classes);
  std::vector<Label> out;
  for (std::size_t q = 0; q < counts.size(); ++q) {
    if (counts[q] == 0) out.push_back(static_cast<Label>(q));
  }
  return out;
}

/// Recall of each class; nullopt for classes with no samples.
inline std::vector<std::optional<double>> per_class_sensitivity(const ConfusionMatrix& o) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(o.num_classes()));
  for (int q = 0; q < o.num_classes(); ++q) {
    const long long support = o.row_sum(q);
    if (support > 0) out[static_cast<std::size_t>(q)] = static_cast<double>(o.at(q, q)) / support;
  }
  return out;
}

/// IR = (1/Q) sum_q sum_{i != q} N_i / ((Q - 1) N_q); 1 for balanced classes.
inline double imbalance_ratio(std::span<const std::size_t> counts) {
  const std::size_t q_count = counts.size();
  if (q_count < 2) throw std::invalid_argument("imbalance_ratio: need at least two classes");
  double total = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) throw std::invalid_argument("imbalance_ratio: every class needs at least one sample");
    total += static_cast<double>(c);
  }
  double ir = 0.0;
  for (std::size_t c : counts) {
    ir += (total - static_cast<double>(c)) / ((q_count - 1.0) * static_cast<double>(c));
  }
  return ir / static_cast<double>(q_count);
}

struct MetricOptions {
  int qwk_exponent = 2;
  ExpectedNormalization normalization = ExpectedNormalization::sample_total;
};

struct MetricReport {
  double qwk = 0.0;
  double amae = 0.0;
  double accuracy = 0.0;
  std::vector<std::optional<double>> sensitivity;
  std::vector<std::optional<double>> mae;
};

inline MetricReport evaluate(std::span<const Label> y_true, std::span<const Label> y_pred,
                             int num_classes, const MetricOptions& opts = {}) {
  const auto o = confusion_matrix(y_true, y_pred, num_classes);
  MetricReport r;
  r.qwk = qwk(o, opts.qwk_exponent, opts.normalization);
  r.amae = amae(y_true, y_pred, num_classes);
  r.accuracy = accuracy(o);
  r.sensitivity = per_class_sensitivity(o);
  r.mae = per_class_mae(y_true, y_pred, num_classes);
  return r;
}

}  // namespace ordinal

#pragma once

// Decision-level multi-view ensemble. One classifier per view produces a
// probability row; the rows are combined by a convex weight vector and the
// class with the highest aggregated probability is predicted.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinal/core.hpp"
#include "ordinal/metrics.hpp"
#include "ordinal/model.hpp"

namespace ordinal {

/// Row i is the class distribution predicted by the classifier of view i.
class ViewProbMatrix {
 public:
  ViewProbMatrix() = default;
  explicit ViewProbMatrix(std::vector<ProbabilityVector> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("ViewProbMatrix: no views");
    for (const auto& r : rows_) {
      if (r.size() != rows_.front().size()) {
        throw std::invalid_argument("ViewProbMatrix: rows have different class counts");
      }
      check_probability_vector(r);
    }
  }

  std::size_t num_views() const { return rows_.size(); }
  int num_classes() const { return rows_.empty() ? 0 : static_cast<int>(rows_.front().size()); }
  const ProbabilityVector& row(std::size_t view) const { return rows_.at(view); }

 private:
  std::vector<ProbabilityVector> rows_;
};

class WeightVector {
 public:
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw std::invalid_argument("WeightVector: empty");
    double sum = 0.0;
    for (double v : w_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("WeightVector: weights must be nonnegative");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("WeightVector: weights sum to " + std::to_string(sum));
    }
  }

  static WeightVector uniform(std::size_t views) {
    return WeightVector(std::vector<double>(views, 1.0 / static_cast<double>(views)));
  }
  static WeightVector select(std::size_t views, std::size_t which) {
    std::vector<double> w(views, 0.0);
    w.at(which) = 1.0;
    return WeightVector(std::move(w));
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& values() const { return w_; }

 private:
  std::vector<double> w_;
};

inline ProbabilityVector aggregate(const ViewProbMatrix& p, const WeightVector& w) {
  if (p.num_views() != w.size()) {
    throw std::invalid_argument("aggregate: " + std::to_string(p.num_views()) + " views but " +
                                std::to_string(w.size()) + " weights");
  }
  ProbabilityVector out(static_cast<std::size_t>(p.num_classes()), 0.0);
  for (std::size_t i = 0; i < p.num_views(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[i] * p.row(i)[j];
  }
  return out;
}

inline std::vector<Label> ensemble_labels(std::span<const ViewProbMatrix> samples,
                                          const WeightVector& w) {
  std::vector<Label> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(argmax_label(aggregate(s, w)));
  return out;
}

struct WeightSearchResult {
  WeightVector weights = WeightVector::uniform(1);
  double amae = 0.0;
  std::size_t evaluated = 0;
};

/// Random search over the weight simplex minimising validation AMAE.
///
/// The V one-hot vectors and the uniform vector are evaluated first, then
/// `n_candidates` vectors of i.i.d. U(0,1) components normalised to sum to
/// one. The first candidate reaching the lowest AMAE wins, so the result is
/// never worse than the best single view.
inline WeightSearchResult optimize_weights(std::span<const ViewProbMatrix> validation,
                                           std::span<const Label> y_val, std::size_t n_candidates,
                                           std::uint64_t seed) {
  if (validation.empty()) throw std::invalid_argument("optimize_weights: empty validation set");
  if (validation.size() != y_val.size()) {
    throw std::invalid_argument("optimize_weights: probabilities and labels disagree");
  }
  if (n_candidates < 1) throw std::invalid_argument("optimize_weights: need at least one candidate");
  const std::size_t views = validation.front().num_views();
  const int num_classes = validation.front().num_classes();
  for (const auto& s : validation) {
    if (s.num_views() != views || s.num_classes() != num_classes) {
      throw std::invalid_argument("optimize_weights: validation samples are not aligned");
    }
  }

  WeightSearchResult best;
  bool have = false;
  auto consider = [&](WeightVector w) {
    const double score = amae(y_val, ensemble_labels(validation, w), num_classes);
    ++best.evaluated;
    if (!have || score < best.amae) {
      best.weights = std::move(w);
      best.amae = score;
      have = true;
    }
  };
  for (std::size_t v = 0; v < views; ++v) consider(WeightVector::select(views, v));
  consider(WeightVector::uniform(views));

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(views);
  for (std::size_t c = 0; c < n_candidates; ++c) {
    double sum = 0.0;
    for (double& x : w) {
      x = unit(rng);
      sum += x;
    }
    if (!(sum > 0.0)) continue;
    for (double& x : w) x /= sum;
    // Renormalising can leave the sum a few ulps from one.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < views; ++i) total += w[i];
    w[views - 1] = std::max(0.0, 1.0 - total);
    consider(WeightVector(w));
  }
  return best;
}

/// Aggregated label of one sample given one trained model per view.
inline Label ensemble_predict(std::span<const TrainedModel> models,
                              std::span<const std::vector<double>> sample, const WeightVector& w) {
  if (models.size() != sample.size()) {
    throw std::invalid_argument("ensemble_predict: " + std::to_string(models.size()) +
                                " models but " + std::to_string(sample.size()) + " views");
  }
  std::vector<ProbabilityVector> rows;
  rows.reserve(models.size());
  for (std::size_t v = 0; v < models.size(); ++v) rows.push_back(predict_proba(models[v], sample[v]));
  return argmax_label(aggregate(ViewProbMatrix(std::move(rows)), w));
}

}  // namespace ordinal

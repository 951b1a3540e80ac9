#pragma once

// Ordinal losses over a predicted probability vector, with analytic gradients
// with respect to the probabilities. `softmax_backward` maps such a gradient
// to the logits of a softmax output layer.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinal/core.hpp"
#include "ordinal/softlabel.hpp"

namespace ordinal {

inline constexpr double kProbabilityClamp = 1e-12;

inline double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

struct LossValueGrad {
  double value = 0.0;
  std::vector<double> grad;
};

// ---------------------------------------------------------------------------
// Categorical cross-entropy against a hard or soft target.

inline LossValueGrad cce(std::span<const double> p, std::span<const double> target) {
  if (p.size() != target.size()) {
    throw std::invalid_argument("cce: prediction and target lengths differ");
  }
  LossValueGrad out{0.0, std::vector<double>(p.size(), 0.0)};
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (target[j] == 0.0) continue;
    const double pj = clamp_probability(p[j]);
    out.value -= target[j] * std::log(pj);
    out.grad[j] = -target[j] / pj;
  }
  return out;
}

inline ProbabilityVector one_hot(Label k, int num_classes) {
  check_label(k, num_classes);
  ProbabilityVector t(static_cast<std::size_t>(num_classes), 0.0);
  t[static_cast<std::size_t>(k)] = 1.0;
  return t;
}

// ---------------------------------------------------------------------------
// Class distance weighted cross-entropy:
//   L = -sum_{j != k} |j - k|^alpha log(1 - p_j)

inline LossValueGrad cdwce(std::span<const double> p, Label k, double alpha) {
  check_label(k, static_cast<int>(p.size()));
  if (!(alpha > 0.0)) throw std::invalid_argument("cdwce: alpha must be positive");
  LossValueGrad out{0.0, std::vector<double>(p.size(), 0.0)};
  for (std::size_t j = 0; j < p.size(); ++j) {
    const int distance = std::abs(static_cast<int>(j) - k);
    if (distance == 0) continue;
    const double weight = std::pow(static_cast<double>(distance), alpha);
    const double rest = clamp_probability(1.0 - p[j]);
    out.value -= weight * std::log(rest);
    out.grad[j] = weight / rest;
  }
  return out;
}

// ---------------------------------------------------------------------------
// SORD targets: softmax(-beta * phi'(j, k)) where phi' is a transform of the
// rank distance |j - k|.

enum class ProximityTransform { max, norm_max, log, norm_log, division, norm_division };

inline std::string to_string(ProximityTransform t) {
  switch (t) {
    case ProximityTransform::max: return "max";
    case ProximityTransform::norm_max: return "norm_max";
    case ProximityTransform::log: return "log";
    case ProximityTransform::norm_log: return "norm_log";
    case ProximityTransform::division: return "division";
    case ProximityTransform::norm_division: return "norm_division";
  }
  return "?";
}

inline ProximityTransform parse_proximity_transform(const std::string& name) {
  for (auto t : {ProximityTransform::max, ProximityTransform::norm_max, ProximityTransform::log,
                 ProximityTransform::norm_log, ProximityTransform::division,
                 ProximityTransform::norm_division}) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown proximity transform '" + name + "'");
}

struct SordConfig {
  double beta = 1.0;
  ProximityTransform transform = ProximityTransform::max;
};

/// Transformed distance row phi'(., k); larger means farther from k.
///
///   max            |j-k| / max_j |j-k|
///   norm_max       |j-k| / sum_j |j-k|
///   log            log(1 + |j-k|)
///   norm_log       log(1 + |j-k|) / log(1 + max_j |j-k|)
///   division       -1 / (1 + |j-k|)          (similarity, negated)
///   norm_division  -s_j / sum_m s_m with s_j = 1 / (1 + |j-k|)
inline std::vector<double> proximity_row(Label k, int num_classes, ProximityTransform transform) {
  check_label(k, num_classes);
  if (num_classes < 2) throw std::invalid_argument("sord: need at least two classes");
  std::vector<double> phi(static_cast<std::size_t>(num_classes));
  double max_d = 0.0;
  double sum_d = 0.0;
  double sum_s = 0.0;
  for (int j = 0; j < num_classes; ++j) {
    const double d = std::abs(j - k);
    phi[static_cast<std::size_t>(j)] = d;
    max_d = std::max(max_d, d);
    sum_d += d;
    sum_s += 1.0 / (1.0 + d);
  }
  for (double& d : phi) {
    switch (transform) {
      case ProximityTransform::max: d = d / max_d; break;
      case ProximityTransform::norm_max: d = d / sum_d; break;
      case ProximityTransform::log: d = std::log1p(d); break;
      case ProximityTransform::norm_log: d = std::log1p(d) / std::log1p(max_d); break;
      case ProximityTransform::division: d = -1.0 / (1.0 + d); break;
      case ProximityTransform::norm_division: d = -(1.0 / (1.0 + d)) / sum_s; break;
    }
  }
  return phi;
}

inline ProbabilityVector sord_targets(Label k, int num_classes, const SordConfig& cfg) {
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("sord: beta must be positive");
  const auto phi = proximity_row(k, num_classes, cfg.transform);
  const double lowest = *std::min_element(phi.begin(), phi.end());
  ProbabilityVector t(phi.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    t[j] = std::exp(-cfg.beta * (phi[j] - lowest));
    sum += t[j];
  }
  for (double& v : t) v /= sum;
  return t;
}

inline LossValueGrad sord(std::span<const double> p, Label k, const SordConfig& cfg) {
  const auto t = sord_targets(k, static_cast<int>(p.size()), cfg);
  return cce(p, t);
}

// ---------------------------------------------------------------------------
// SLACE: binary cross-entropy between the cumulative predicted distribution
// and the cumulative SORD(max) target, summed over the J-1 inner cut points.

inline LossValueGrad slace(std::span<const double> p, Label k, double beta) {
  const int num_classes = static_cast<int>(p.size());
  check_label(k, num_classes);
  if (!(beta > 0.0)) throw std::invalid_argument("slace: beta must be positive");
  const auto t = sord_targets(k, num_classes, {beta, ProximityTransform::max});

  // Upper tails are summed from the top so that 1 - Pc stays accurate when
  // Pc is close to one.
  std::vector<double> p_upper(p.size(), 0.0);
  std::vector<double> t_upper(p.size(), 0.0);
  for (int j = num_classes - 2; j >= 0; --j) {
    p_upper[static_cast<std::size_t>(j)] = p_upper[static_cast<std::size_t>(j) + 1] + p[static_cast<std::size_t>(j) + 1];
    t_upper[static_cast<std::size_t>(j)] = t_upper[static_cast<std::size_t>(j) + 1] + t[static_cast<std::size_t>(j) + 1];
  }

  LossValueGrad out{0.0, std::vector<double>(p.size(), 0.0)};
  std::vector<double> d_cum(p.size(), 0.0);
  std::vector<double> d_upper(p.size(), 0.0);
  double p_cum = 0.0;
  double t_cum = 0.0;
  for (int j = 0; j + 1 < num_classes; ++j) {
    const auto u = static_cast<std::size_t>(j);
    p_cum += p[u];
    t_cum += t[u];
    const double pc = clamp_probability(p_cum);
    const double qc = clamp_probability(p_upper[u]);
    out.value -= t_cum * std::log(pc) + t_upper[u] * std::log(qc);
    d_cum[u] = -t_cum / pc;
    d_upper[u] = -t_upper[u] / qc;
  }
  // p_m feeds the prefix sums from m onwards and the upper tails below m.
  double acc = 0.0;
  for (int m = num_classes - 1; m >= 0; --m) {
    if (m + 1 < num_classes) acc += d_cum[static_cast<std::size_t>(m)];
    out.grad[static_cast<std::size_t>(m)] = acc;
  }
  acc = 0.0;
  for (int m = 1; m < num_classes; ++m) {
    acc += d_upper[static_cast<std::size_t>(m) - 1];
    out.grad[static_cast<std::size_t>(m)] += acc;
  }
  return out;
}

// ---------------------------------------------------------------------------

inline std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    p[j] = std::exp(logits[j] - top);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

/// dL/dz from dL/dp for p = softmax(z).
inline std::vector<double> softmax_backward(std::span<const double> p,
                                            std::span<const double> grad_p) {
  double dot = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) dot += p[j] * grad_p[j];
  std::vector<double> g(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) g[j] = p[j] * (grad_p[j] - dot);
  return g;
}

// ---------------------------------------------------------------------------
// Loss selection used by the training loop.

enum class LossKind { cce, cdwce, sord, slace };

inline std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::cce: return "cce";
    case LossKind::cdwce: return "cdwce";
    case LossKind::sord: return "sord";
    case LossKind::slace: return "slace";
  }
  return "?";
}

struct LossConfig {
  LossKind kind = LossKind::cce;
  std::optional<SoftLabelConfig> soft_labels;  // cce only
  double cdwce_alpha = 1.0;
  SordConfig sord;
  double slace_beta = 1.0;
};

/// Loss bound to a class count; soft targets are tabulated once.
class OrdinalLoss {
 public:
  OrdinalLoss(LossConfig cfg, int num_classes) : cfg_(std::move(cfg)), num_classes_(num_classes) {
    if (num_classes < 2) throw std::invalid_argument("loss: need at least two classes");
    if (cfg_.kind == LossKind::cce) {
      targets_ = cfg_.soft_labels ? soft_target_table(num_classes, *cfg_.soft_labels)
                                  : identity_table(num_classes);
    } else if (cfg_.kind == LossKind::sord) {
      for (Label k = 0; k < num_classes; ++k) targets_.push_back(sord_targets(k, num_classes, cfg_.sord));
    }
  }

  const LossConfig& config() const { return cfg_; }
  int num_classes() const { return num_classes_; }

  LossValueGrad operator()(std::span<const double> p, Label k) const {
    check_label(k, num_classes_);
    if (p.size() != static_cast<std::size_t>(num_classes_)) {
      throw std::invalid_argument("loss: prediction has the wrong length");
    }
    switch (cfg_.kind) {
      case LossKind::cce:
      case LossKind::sord: return cce(p, targets_[static_cast<std::size_t>(k)]);
      case LossKind::cdwce: return cdwce(p, k, cfg_.cdwce_alpha);
      case LossKind::slace: return slace(p, k, cfg_.slace_beta);
    }
    throw std::logic_error("unreachable loss kind");
  }

 private:
  static std::vector<ProbabilityVector> identity_table(int num_classes) {
    std::vector<ProbabilityVector> rows;
    for (Label k = 0; k < num_classes; ++k) rows.push_back(one_hot(k, num_classes));
    return rows;
  }

  LossConfig cfg_;
  int num_classes_;
  std::vector<ProbabilityVector> targets_;
};

// ---------------------------------------------------------------------------
// Gradient checking.

/// Largest per-coordinate relative discrepancy between the analytic gradient
/// returned by `f` and central differences of its value. Coordinates where
/// both gradients are below `floor` in magnitude are compared against `floor`.
template <class F>
double max_relative_gradient_error(const F& f, std::vector<double> x, double step = 1e-5,
                                   double floor = 1e-6) {
  const std::vector<double> analytic = f(x).grad;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x).value;
    x[i] = saved - step;
    const double down = f(x).value;
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

/// Gradient check of a configured loss, either directly on a probability
/// vector or on logits pushed through a softmax.
inline double grad_check(const LossConfig& cfg, std::span<const double> point, Label k,
                         bool through_softmax) {
  const OrdinalLoss loss(cfg, static_cast<int>(point.size()));
  std::vector<double> x(point.begin(), point.end());
  if (!through_softmax) {
    return max_relative_gradient_error([&](const std::vector<double>& p) { return loss(p, k); }, x);
  }
  return max_relative_gradient_error(
      [&](const std::vector<double>& z) {
        const auto p = softmax(z);
        auto r = loss(p, k);
        r.grad = softmax_backward(p, r.grad);
        return r;
      },
      x);
}

}  // namespace ordinal

#pragma once

// Desk-scale differentiable classifier: standardised features, an optional
// tanh hidden layer, and either a softmax or a cumulative-link output layer,
// trained by plain mini-batch SGD. Also the per-method hyperparameter grids
// and the AMAE-guided cross-validated search over them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinal/clm.hpp"
#include "ordinal/core.hpp"
#include "ordinal/losses.hpp"
#include "ordinal/metrics.hpp"
#include "ordinal/softlabel.hpp"

namespace ordinal {

enum class Backbone { linear, one_hidden };
enum class Head { softmax, clm };

struct ModelConfig {
  Backbone backbone = Backbone::linear;
  int hidden_width = 16;
  Head head = Head::softmax;
  Link link = Link::logit;
  double d_min = 0.0;
  LossConfig loss;
  double learning_rate = 1e-3;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;

  /// Compact description of the tunable hyperparameters.
  std::string describe() const {
    std::ostringstream os;
    os << "lr=" << learning_rate << " head=" << (head == Head::clm ? "clm" : "softmax");
    if (head == Head::clm) os << " link=" << to_string(link) << " d_min=" << d_min;
    os << " loss=" << to_string(loss.kind);
    switch (loss.kind) {
      case LossKind::cce:
        if (loss.soft_labels) {
          const auto& s = *loss.soft_labels;
          os << " sl=" << to_string(s.kind) << " eta=" << s.lambda;
          if (s.kind == SoftLabelKind::triangular) os << " adjacent=" << s.alpha_adjacent;
          if (s.kind == SoftLabelKind::beta) os << " concentration=" << s.concentration;
          if (s.kind == SoftLabelKind::exponential) os << " p=" << s.p_exponent;
        }
        break;
      case LossKind::cdwce: os << " alpha=" << loss.cdwce_alpha; break;
      case LossKind::sord:
        os << " beta=" << loss.sord.beta << " transform=" << to_string(loss.sord.transform);
        break;
      case LossKind::slace: os << " beta=" << loss.slace_beta; break;
    }
    return os.str();
  }
};

/// Raised when the training loss or the parameters stop being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, double loss)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                           " (loss " + std::to_string(loss) + ")"),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Offsets of each parameter block inside the flat parameter vector.
struct ParameterLayout {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;  // 0 when the backbone is linear
  std::size_t outputs = 0;
  std::size_t hidden_w = 0, hidden_b = 0, out_w = 0, out_b = 0, clm_b1 = 0, clm_deltas = 0;
  std::size_t num_deltas = 0;
  std::size_t total = 0;
  bool out_bias = true;

  std::size_t features_into_output() const { return hidden > 0 ? hidden : input_dim; }

  static ParameterLayout make(const ModelConfig& cfg, std::size_t input_dim, int num_classes) {
    ParameterLayout l;
    l.input_dim = input_dim;
    l.hidden = cfg.backbone == Backbone::one_hidden ? static_cast<std::size_t>(cfg.hidden_width) : 0;
    const bool clm = cfg.head == Head::clm;
    l.outputs = clm ? 1 : static_cast<std::size_t>(num_classes);
    // The CLM thresholds already carry the intercept.
    l.out_bias = !clm;
    l.num_deltas = clm ? static_cast<std::size_t>(num_classes - 2) : 0;
    std::size_t at = 0;
    l.hidden_w = at;
    at += l.hidden * input_dim;
    l.hidden_b = at;
    at += l.hidden;
    l.out_w = at;
    at += l.outputs * l.features_into_output();
    l.out_b = at;
    at += l.out_bias ? l.outputs : 0;
    l.clm_b1 = at;
    at += clm ? 1 : 0;
    l.clm_deltas = at;
    at += l.num_deltas;
    l.total = at;
    return l;
  }
};

struct TrainedModel {
  ModelConfig config;
  int num_classes = 0;
  ParameterLayout layout;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<double> params;
  std::vector<double> training_log;  // mean loss of every epoch

  /// Running minimum of the epoch losses.
  std::vector<double> smoothed_log() const {
    std::vector<double> out(training_log.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < training_log.size(); ++i) {
      best = std::min(best, training_log[i]);
      out[i] = best;
    }
    return out;
  }

  ClmParams clm_params() const {
    ClmParams p;
    p.link = config.link;
    p.d_min = config.d_min;
    p.b1 = params[layout.clm_b1];
    p.deltas.assign(params.begin() + static_cast<long>(layout.clm_deltas),
                    params.begin() + static_cast<long>(layout.clm_deltas + layout.num_deltas));
    return p;
  }
};

namespace detail {

/// Scratch buffers and the forward/backward pass of one sample.
class Network {
 public:
  Network(const ModelConfig& cfg, const ParameterLayout& layout, int num_classes)
      : cfg_(cfg), l_(layout), num_classes_(num_classes), x_(layout.input_dim),
        h_(layout.features_into_output()), out_(layout.outputs), grad_h_(h_.size()) {}

  /// Forward pass on an already standardised input.
  ProbabilityVector forward(std::span<const double> params, std::span<const double> x) {
    std::copy(x.begin(), x.end(), x_.begin());
    if (l_.hidden > 0) {
      for (std::size_t u = 0; u < l_.hidden; ++u) {
        double a = params[l_.hidden_b + u];
        const double* w = &params[l_.hidden_w + u * l_.input_dim];
        for (std::size_t i = 0; i < l_.input_dim; ++i) a += w[i] * x_[i];
        h_[u] = std::tanh(a);
      }
    } else {
      h_ = x_;
    }
    const std::size_t fan_in = h_.size();
    for (std::size_t o = 0; o < l_.outputs; ++o) {
      double a = l_.out_bias ? params[l_.out_b + o] : 0.0;
      const double* w = &params[l_.out_w + o * fan_in];
      for (std::size_t i = 0; i < fan_in; ++i) a += w[i] * h_[i];
      out_[o] = a;
    }
    if (cfg_.head == Head::clm) {
      clm_.link = cfg_.link;
      clm_.d_min = cfg_.d_min;
      clm_.b1 = params[l_.clm_b1];
      clm_.deltas.assign(params.begin() + static_cast<long>(l_.clm_deltas),
                         params.begin() + static_cast<long>(l_.clm_deltas + l_.num_deltas));
      probs_ = clm_forward(out_[0], clm_).probs;
    } else {
      probs_ = softmax(out_);
    }
    return probs_;
  }

  /// Accumulates the gradient of a loss with dL/dp = grad_p, for the sample
  /// passed to the preceding forward(), into `grad`.
  void backward(std::span<const double> params, std::span<const double> grad_p,
                std::span<double> grad) {
    std::vector<double> grad_out;
    if (cfg_.head == Head::clm) {
      const auto g = clm_backward(out_[0], clm_, grad_p);
      grad_out.assign(1, g.df);
      grad[l_.clm_b1] += g.db1;
      for (std::size_t i = 0; i < l_.num_deltas; ++i) grad[l_.clm_deltas + i] += g.ddeltas[i];
    } else {
      grad_out = softmax_backward(probs_, grad_p);
    }
    const std::size_t fan_in = h_.size();
    std::fill(grad_h_.begin(), grad_h_.end(), 0.0);
    for (std::size_t o = 0; o < l_.outputs; ++o) {
      const double go = grad_out[o];
      if (l_.out_bias) grad[l_.out_b + o] += go;
      double* gw = &grad[l_.out_w + o * fan_in];
      const double* w = &params[l_.out_w + o * fan_in];
      for (std::size_t i = 0; i < fan_in; ++i) {
        gw[i] += go * h_[i];
        grad_h_[i] += go * w[i];
      }
    }
    if (l_.hidden > 0) {
      for (std::size_t u = 0; u < l_.hidden; ++u) {
        const double pre = grad_h_[u] * (1.0 - h_[u] * h_[u]);
        grad[l_.hidden_b + u] += pre;
        double* gw = &grad[l_.hidden_w + u * l_.input_dim];
        for (std::size_t i = 0; i < l_.input_dim; ++i) gw[i] += pre * x_[i];
      }
    }
  }

 private:
  const ModelConfig& cfg_;
  const ParameterLayout& l_;
  int num_classes_;
  std::vector<double> x_, h_, out_, grad_h_;
  ProbabilityVector probs_;
  ClmParams clm_;
};

inline void standardize(std::span<const double> x, std::span<const double> mean,
                        std::span<const double> scale, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / scale[i];
}

inline std::vector<double> initial_parameters(const ModelConfig& cfg, const ParameterLayout& l,
                                              int num_classes, Rng& rng) {
  std::vector<double> p(l.total, 0.0);
  auto xavier = [&](std::size_t offset, std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) p[offset + i] = dist(rng);
  };
  if (l.hidden > 0) xavier(l.hidden_w, l.input_dim, l.hidden);
  xavier(l.out_w, l.features_into_output(), l.outputs);
  if (cfg.head == Head::clm) {
    // Unit spacing between thresholds, centred on zero. A zero increment
    // would never move (its gradient is proportional to itself).
    const double delta = std::sqrt(std::max(1.0 - cfg.d_min, 0.25));
    const double step = cfg.d_min + delta * delta + (cfg.d_min == 0.0 ? kThresholdPadding : 0.0);
    p[l.clm_b1] = -0.5 * step * (num_classes - 2);
    for (std::size_t i = 0; i < l.num_deltas; ++i) p[l.clm_deltas + i] = delta;
  }
  return p;
}

}  // namespace detail

inline void validate(const ModelConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
  if (cfg.backbone == Backbone::one_hidden && cfg.hidden_width < 1) {
    throw std::invalid_argument("train: hidden width must be >= 1");
  }
  if (cfg.d_min < 0.0) throw std::invalid_argument("train: minimum threshold distance must be >= 0");
}

inline TrainedModel train(const ModelConfig& cfg, const ViewData& data) {
  validate(cfg);
  const std::size_t n = data.size();
  const std::size_t d = data.features.cols;
  if (n == 0) throw std::invalid_argument("train: no training samples");
  if (data.features.rows != n) throw std::invalid_argument("train: features and labels disagree");
  if (d == 0) throw std::invalid_argument("train: zero-dimensional features");
  if (data.num_classes < 2) throw std::invalid_argument("train: need at least two classes");
  for (Label y : data.labels) check_label(y, data.num_classes);

  TrainedModel m;
  m.config = cfg;
  m.num_classes = data.num_classes;
  m.layout = ParameterLayout::make(cfg, d, data.num_classes);

  m.feature_mean.assign(d, 0.0);
  m.feature_scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) m.feature_mean[c] += data.features(i, c);
  }
  for (double& v : m.feature_mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = data.features(i, c) - m.feature_mean[c];
      m.feature_scale[c] += dev * dev;
    }
  }
  for (double& v : m.feature_scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 1e-12)) v = 1.0;
  }
  FeatureMatrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    detail::standardize(data.features.row(i), m.feature_mean, m.feature_scale, x.row(i));
  }

  Rng rng(derive_seed(cfg.seed, 0x5eed));
  m.params = detail::initial_parameters(cfg, m.layout, data.num_classes, rng);

  const OrdinalLoss loss(cfg.loss, data.num_classes);
  detail::Network net(m.config, m.layout, data.num_classes);
  std::vector<double> grad(m.params.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto p = net.forward(m.params, x.row(i));
        const auto lv = loss(p, data.labels[i]);
        epoch_loss += lv.value;
        net.backward(m.params, lv.grad, grad);
      }
      const double scale = cfg.learning_rate / static_cast<double>(stop - start);
      for (std::size_t k = 0; k < m.params.size(); ++k) m.params[k] -= scale * grad[k];
    }
    epoch_loss /= static_cast<double>(n);
    const bool finite_params =
        std::all_of(m.params.begin(), m.params.end(), [](double v) { return std::isfinite(v); });
    if (!std::isfinite(epoch_loss) || !finite_params) throw TrainingDiverged(epoch, epoch_loss);
    m.training_log.push_back(epoch_loss);
  }
  return m;
}

inline ProbabilityVector predict_proba(const TrainedModel& m, std::span<const double> features) {
  if (features.size() != m.layout.input_dim) {
    throw std::invalid_argument("predict_proba: expected " + std::to_string(m.layout.input_dim) +
                                " features, got " + std::to_string(features.size()));
  }
  std::vector<double> x(features.size());
  detail::standardize(features, m.feature_mean, m.feature_scale, x);
  detail::Network net(m.config, m.layout, m.num_classes);
  return net.forward(m.params, x);
}

inline std::vector<ProbabilityVector> predict_proba(const TrainedModel& m, const FeatureMatrix& x) {
  std::vector<ProbabilityVector> out;
  out.reserve(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out.push_back(predict_proba(m, x.row(i)));
  return out;
}

inline std::vector<Label> predict(const TrainedModel& m, const FeatureMatrix& x) {
  std::vector<Label> out;
  out.reserve(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out.push_back(argmax_label(predict_proba(m, x.row(i))));
  return out;
}

// ---------------------------------------------------------------------------
// The fourteen compared methodologies.

enum class Method {
  nominal,
  triangular,
  beta,
  exponential,
  cdwce,
  sord,
  slace,
  clm,
  clm_triangular,
  clm_beta,
  clm_exponential,
  clm_cdwce,
  clm_sord,
  clm_slace,
};

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {
      Method::nominal,     Method::triangular,     Method::beta,     Method::exponential,
      Method::cdwce,       Method::sord,           Method::slace,    Method::clm,
      Method::clm_triangular, Method::clm_beta,    Method::clm_exponential,
      Method::clm_cdwce,   Method::clm_sord,       Method::clm_slace};
  return methods;
}

inline std::string to_string(Method m) {
  switch (m) {
    case Method::nominal: return "nominal";
    case Method::triangular: return "triangular";
    case Method::beta: return "beta";
    case Method::exponential: return "exponential";
    case Method::cdwce: return "cdwce";
    case Method::sord: return "sord";
    case Method::slace: return "slace";
    case Method::clm: return "clm";
    case Method::clm_triangular: return "clm_triangular";
    case Method::clm_beta: return "clm_beta";
    case Method::clm_exponential: return "clm_exponential";
    case Method::clm_cdwce: return "clm_cdwce";
    case Method::clm_sord: return "clm_sord";
    case Method::clm_slace: return "clm_slace";
  }
  return "?";
}

inline Method parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

inline bool uses_clm(Method m) { return m >= Method::clm; }

/// Default configuration of a method; `base` supplies backbone, epochs, batch
/// size, learning rate and seed.
inline ModelConfig method_config(Method m, ModelConfig base = {}) {
  base.head = uses_clm(m) ? Head::clm : Head::softmax;
  base.loss = LossConfig{};
  auto soft = [&](SoftLabelKind kind) {
    SoftLabelConfig s;
    s.kind = kind;
    s.lambda = 1.0;
    base.loss.soft_labels = s;
  };
  switch (m) {
    case Method::nominal:
    case Method::clm: break;
    case Method::triangular:
    case Method::clm_triangular: soft(SoftLabelKind::triangular); break;
    case Method::beta:
    case Method::clm_beta: soft(SoftLabelKind::beta); break;
    case Method::exponential:
    case Method::clm_exponential: soft(SoftLabelKind::exponential); break;
    case Method::cdwce:
    case Method::clm_cdwce: base.loss.kind = LossKind::cdwce; break;
    case Method::sord:
    case Method::clm_sord: base.loss.kind = LossKind::sord; break;
    case Method::slace:
    case Method::clm_slace: base.loss.kind = LossKind::slace; break;
  }
  return base;
}

/// Candidate values of every tunable hyperparameter of one method. Empty
/// lists are not tuned.
struct SearchSpace {
  ModelConfig base;
  std::vector<double> learning_rates;
  std::vector<double> adjacent_probabilities;  // triangular
  std::vector<double> smoothing_eta;           // soft labels
  std::vector<double> exponents;               // exponential soft labels
  std::vector<double> cdwce_alphas;
  std::vector<double> smoothing_betas;         // sord, slace
  std::vector<ProximityTransform> transforms;  // sord
  std::vector<double> min_distances;           // clm

  static SearchSpace for_method(Method m, const ModelConfig& base = {}) {
    SearchSpace s;
    s.base = method_config(m, base);
    s.learning_rates = {1e-4, 1e-3, 1e-2};
    const std::vector<double> eta = {0.8, 1.0};
    switch (m) {
      case Method::triangular:
      case Method::clm_triangular:
        s.adjacent_probabilities = {0.01, 0.05, 0.10};
        s.smoothing_eta = eta;
        break;
      case Method::beta:
      case Method::clm_beta: s.smoothing_eta = eta; break;
      case Method::exponential:
      case Method::clm_exponential:
        s.smoothing_eta = eta;
        s.exponents = {1.0, 1.5, 2.0};
        break;
      case Method::cdwce:
      case Method::clm_cdwce: s.cdwce_alphas = {0.25, 0.50, 0.75, 1.00}; break;
      case Method::slace:
      case Method::clm_slace: s.smoothing_betas = {1, 0.3, 0.5, 0.8, 2, 3, 4, 7, 10, 15, 20, 25}; break;
      case Method::sord:
      case Method::clm_sord:
        s.smoothing_betas = {0.3, 0.5, 0.8, 1, 2, 3, 4, 7, 10, 15, 20, 25};
        s.transforms = {ProximityTransform::max,      ProximityTransform::norm_max,
                        ProximityTransform::norm_log, ProximityTransform::log,
                        ProximityTransform::norm_division, ProximityTransform::division};
        break;
      case Method::nominal:
      case Method::clm: break;
    }
    if (uses_clm(m)) s.min_distances = {0.0, 0.5, 1.0};
    return s;
  }

  /// Single-configuration space (no tuning).
  static SearchSpace fixed(const ModelConfig& cfg) {
    SearchSpace s;
    s.base = cfg;
    return s;
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t r : radices()) n *= r;
    return n;
  }

  /// Configuration number `index` in mixed-radix order (learning rate slowest).
  ModelConfig at(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("search space index out of range");
    const auto r = radices();
    std::vector<std::size_t> digit(r.size());
    for (std::size_t i = r.size(); i-- > 0;) {
      digit[i] = index % r[i];
      index /= r[i];
    }
    ModelConfig cfg = base;
    auto pick = [&](const auto& values, std::size_t i) { return values[digit[i]]; };
    if (!learning_rates.empty()) cfg.learning_rate = pick(learning_rates, 0);
    if (!adjacent_probabilities.empty()) soft(cfg).alpha_adjacent = pick(adjacent_probabilities, 1);
    if (!smoothing_eta.empty()) soft(cfg).lambda = pick(smoothing_eta, 2);
    if (!exponents.empty()) soft(cfg).p_exponent = pick(exponents, 3);
    if (!cdwce_alphas.empty()) cfg.loss.cdwce_alpha = pick(cdwce_alphas, 4);
    if (!smoothing_betas.empty()) {
      cfg.loss.sord.beta = pick(smoothing_betas, 5);
      cfg.loss.slace_beta = pick(smoothing_betas, 5);
    }
    if (!transforms.empty()) cfg.loss.sord.transform = pick(transforms, 6);
    if (!min_distances.empty()) cfg.d_min = pick(min_distances, 7);
    return cfg;
  }

 private:
  std::vector<std::size_t> radices() const {
    auto r = [](std::size_t n) { return std::max<std::size_t>(n, 1); };
    return {r(learning_rates.size()), r(adjacent_probabilities.size()), r(smoothing_eta.size()),
            r(exponents.size()),      r(cdwce_alphas.size()),           r(smoothing_betas.size()),
            r(transforms.size()),     r(min_distances.size())};
  }

  static SoftLabelConfig& soft(ModelConfig& cfg) {
    if (!cfg.loss.soft_labels) {
      throw std::logic_error("search space sets a soft-label parameter on a hard-label method");
    }
    return *cfg.loss.soft_labels;
  }
};

/// Probabilities for every row of `data`, each predicted by a model that did
/// not see that row's sample id.
inline std::vector<ProbabilityVector> out_of_fold_proba(const ModelConfig& cfg, const ViewData& data,
                                                        int folds, std::uint64_t seed) {
  const auto fold_of =
      stratified_group_folds(data.labels, data.sample_ids, data.num_classes, folds, seed);
  std::vector<ProbabilityVector> out(data.size());
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? held : fit).push_back(i);
    const auto model = train(cfg, data.subset(fit));
    for (std::size_t i : held) out[i] = predict_proba(model, data.features.row(i));
  }
  return out;
}

struct TuneTrial {
  ModelConfig config;
  double mean_amae = 0.0;
  int diverged_folds = 0;
};

struct TuneResult {
  ModelConfig best;
  double best_amae = 0.0;
  bool exhaustive = false;
  std::vector<TuneTrial> trials;  // in evaluation order
};

inline constexpr std::size_t kSearchIterations = 15;

/// Cross-validated AMAE of one configuration. A fold whose training diverges
/// scores the worst possible AMAE, J - 1.
inline TuneTrial cross_validate(const ModelConfig& cfg, const ViewData& data,
                                std::span<const int> fold_of, int folds) {
  TuneTrial trial{cfg, 0.0, 0};
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? held : fit).push_back(i);
    const ViewData held_data = data.subset(held);
    double score = data.num_classes - 1.0;
    try {
      const auto model = train(cfg, data.subset(fit));
      score = amae(held_data.labels, predict(model, held_data.features), data.num_classes);
    } catch (const TrainingDiverged&) {
      ++trial.diverged_folds;
    }
    trial.mean_amae += score / folds;
  }
  return trial;
}

/// Picks the configuration with the lowest mean stratified k-fold AMAE.
/// Spaces of at most `iterations` configurations are searched exhaustively;
/// larger ones are sampled without replacement. Ties go to the configuration
/// evaluated first.
inline TuneResult tune(const SearchSpace& space, const ViewData& data, std::uint64_t seed,
                       int folds = 3, std::size_t iterations = kSearchIterations) {
  const auto fold_of =
      stratified_group_folds(data.labels, data.sample_ids, data.num_classes, folds, seed);
  const std::size_t total = space.size();
  std::vector<std::size_t> candidates(total);
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  TuneResult result;
  result.exhaustive = total <= iterations;
  if (!result.exhaustive) {
    Rng rng(derive_seed(seed, 0x7a5e));
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(iterations);
  }
  for (std::size_t index : candidates) {
    ModelConfig cfg = space.at(index);
    cfg.seed = seed;
    result.trials.push_back(cross_validate(cfg, data, fold_of, folds));
    if (result.trials.size() == 1 || result.trials.back().mean_amae < result.best_amae) {
      result.best = result.trials.back().config;
      result.best_amae = result.trials.back().mean_amae;
    }
  }
  return result;
}

}  // namespace ordinal

#pragma once

// Soft ordinal targets.
//
// Two smoothing schemes mix a one-hot label with a second distribution:
// uniform smoothing, h'(j,k) = (1-l) 1{j=k} + l/J, and ordinal smoothing,
// h''(j,k) = (1-l) 1{j=k} + l P(j|k), where P(.|k) is a unimodal distribution
// centred on class k. Three such distributions are provided. The triangular
// and beta ones are continuous densities on [0,1]; class j receives the
// density's mass on [j/J, (j+1)/J]. The exponential one is a discrete pmf.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinal/core.hpp"
#include "ordinal/numeric.hpp"

namespace ordinal {

enum class SoftLabelKind { uniform, triangular, beta, exponential };

inline std::string to_string(SoftLabelKind kind) {
  switch (kind) {
    case SoftLabelKind::uniform: return "uniform";
    case SoftLabelKind::triangular: return "triangular";
    case SoftLabelKind::beta: return "beta";
    case SoftLabelKind::exponential: return "exponential";
  }
  return "?";
}

struct SoftLabelConfig {
  SoftLabelKind kind = SoftLabelKind::uniform;
  double lambda = 1.0;           // smoothing factor
  double alpha_adjacent = 0.05;  // triangular: mass given to each adjacent class
  double concentration = 10.0;   // beta: a + b
  double tau = 1.0;              // exponential: decay rate
  double p_exponent = 1.0;       // exponential: distance exponent

  void validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw std::invalid_argument("soft label: lambda must lie in [0, 1]");
    }
    switch (kind) {
      case SoftLabelKind::triangular:
        if (!(alpha_adjacent > 0.0 && alpha_adjacent < 0.5)) {
          throw std::invalid_argument("triangular soft label: adjacent probability must lie in (0, 0.5)");
        }
        break;
      case SoftLabelKind::beta:
        if (!(concentration > 2.0)) {
          throw std::invalid_argument("beta soft label: concentration must exceed 2");
        }
        break;
      case SoftLabelKind::exponential:
        if (!(tau > 0.0)) throw std::invalid_argument("exponential soft label: tau must be positive");
        if (!(p_exponent >= 1.0)) {
          throw std::invalid_argument("exponential soft label: exponent must be >= 1");
        }
        break;
      case SoftLabelKind::uniform: break;
    }
  }
};

struct SoftTarget {
  ProbabilityVector dist;
  Label true_class = 0;
};

namespace detail {

inline void check_classes(Label k, int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("soft label: need at least two classes");
  check_label(k, num_classes);
}

inline void normalize_in_place(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
}

}  // namespace detail

inline SoftTarget uniform_smooth(Label k, int num_classes, double lambda) {
  detail::check_classes(k, num_classes);
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("uniform_smooth: lambda must lie in [0, 1]");
  }
  SoftTarget t{ProbabilityVector(static_cast<std::size_t>(num_classes), lambda / num_classes), k};
  t.dist.at(static_cast<std::size_t>(k)) += 1.0 - lambda;
  return t;
}

/// Triangular density on [0,1] with support [lower, upper] and peak at `mode`.
struct TriangularDensity {
  double lower = 0.0;
  double mode = 0.0;
  double upper = 1.0;

  double pdf(double x) const {
    if (x < lower || x > upper) return 0.0;
    const double width = upper - lower;
    if (x < mode) return 2.0 * (x - lower) / (width * (mode - lower));
    if (x > mode) return 2.0 * (upper - x) / (width * (upper - mode));
    return 2.0 / width;
  }

  double cdf(double x) const {
    if (x <= lower) return 0.0;
    if (x >= upper) return 1.0;
    const double width = upper - lower;
    if (x <= mode) return (x - lower) * (x - lower) / (width * (mode - lower));
    return 1.0 - (upper - x) * (upper - x) / (width * (upper - mode));
  }
};

/// Density used for class k. Interior classes get a symmetric triangle centred
/// on their interval whose tails put `alpha_adjacent` of mass beyond each edge
/// of the interval. The end classes get a one-sided triangle peaking at 0 (or
/// 1) that puts `alpha_adjacent` beyond the single inner edge.
inline TriangularDensity triangular_density(Label k, int num_classes, double alpha_adjacent) {
  detail::check_classes(k, num_classes);
  if (!(alpha_adjacent > 0.0 && alpha_adjacent < 0.5)) {
    throw std::invalid_argument("triangular_target: adjacent probability must lie in (0, 0.5)");
  }
  const double width = 1.0 / num_classes;
  if (k == 0 || k == num_classes - 1) {
    // Tail mass beyond the edge is ((s - width) / s)^2 for support length s.
    const double s = width / (1.0 - std::sqrt(alpha_adjacent));
    return k == 0 ? TriangularDensity{0.0, 0.0, s} : TriangularDensity{1.0 - s, 1.0, 1.0};
  }
  // Each tail holds (h - width/2)^2 / (2 h^2) for half-support h.
  const double half = 0.5 * width / (1.0 - std::sqrt(2.0 * alpha_adjacent));
  const double centre = (k + 0.5) * width;
  return {centre - half, centre, centre + half};
}

inline ProbabilityVector triangular_target(Label k, int num_classes, double alpha_adjacent) {
  const auto tri = triangular_density(k, num_classes, alpha_adjacent);
  ProbabilityVector p(static_cast<std::size_t>(num_classes));
  for (int j = 0; j < num_classes; ++j) {
    p[static_cast<std::size_t>(j)] =
        tri.cdf(static_cast<double>(j + 1) / num_classes) - tri.cdf(static_cast<double>(j) / num_classes);
  }
  // Wide interior triangles can spill outside [0,1]; keep the mass inside.
  detail::normalize_in_place(p);
  return p;
}

struct BetaShape {
  double a = 1.0;
  double b = 1.0;

  double pdf(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                    numeric::log_beta_function(a, b));
  }
};

/// Beta shape with its mode at the centre of class k's interval and a + b = concentration.
inline BetaShape beta_shape(Label k, int num_classes, double concentration) {
  detail::check_classes(k, num_classes);
  if (!(concentration > 2.0)) {
    throw std::invalid_argument("beta_target: concentration must exceed 2");
  }
  const double mode = (2.0 * k + 1.0) / (2.0 * num_classes);
  return {mode * (concentration - 2.0) + 1.0, (1.0 - mode) * (concentration - 2.0) + 1.0};
}

inline ProbabilityVector beta_target(Label k, int num_classes, double concentration) {
  const auto shape = beta_shape(k, num_classes, concentration);
  ProbabilityVector p(static_cast<std::size_t>(num_classes));
  for (int j = 0; j < num_classes; ++j) {
    p[static_cast<std::size_t>(j)] =
        numeric::integrate([&](double u) { return shape.pdf(u); },
                           static_cast<double>(j) / num_classes,
                           static_cast<double>(j + 1) / num_classes, 1e-9);
  }
  detail::normalize_in_place(p);
  return p;
}

inline ProbabilityVector exponential_target(Label k, int num_classes, double tau, double p_exponent) {
  detail::check_classes(k, num_classes);
  if (!(tau > 0.0)) throw std::invalid_argument("exponential_target: tau must be positive");
  if (!(p_exponent >= 1.0)) throw std::invalid_argument("exponential_target: exponent must be >= 1");
  ProbabilityVector p(static_cast<std::size_t>(num_classes));
  for (int j = 0; j < num_classes; ++j) {
    p[static_cast<std::size_t>(j)] = std::exp(-tau * std::pow(std::abs(j - k), p_exponent));
  }
  detail::normalize_in_place(p);
  return p;
}

inline SoftTarget ordinal_smooth(Label k, int num_classes, double lambda,
                                 const ProbabilityVector& base) {
  detail::check_classes(k, num_classes);
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("ordinal_smooth: lambda must lie in [0, 1]");
  }
  if (base.size() != static_cast<std::size_t>(num_classes)) {
    throw std::invalid_argument("ordinal_smooth: base distribution has the wrong length");
  }
  check_probability_vector(base, 1e-6);
  if (argmax_label(base) != k) {
    throw std::invalid_argument("ordinal_smooth: base distribution does not peak at class " +
                                std::to_string(k));
  }
  SoftTarget t{ProbabilityVector(base.size()), k};
  for (std::size_t j = 0; j < base.size(); ++j) {
    t.dist[j] = lambda * base[j] + (static_cast<Label>(j) == k ? 1.0 - lambda : 0.0);
  }
  return t;
}

/// Unsmoothed unimodal distribution P(.|k) for the configured kind.
inline ProbabilityVector unimodal_distribution(Label k, int num_classes, const SoftLabelConfig& cfg) {
  switch (cfg.kind) {
    case SoftLabelKind::triangular: return triangular_target(k, num_classes, cfg.alpha_adjacent);
    case SoftLabelKind::beta: return beta_target(k, num_classes, cfg.concentration);
    case SoftLabelKind::exponential:
      return exponential_target(k, num_classes, cfg.tau, cfg.p_exponent);
    case SoftLabelKind::uniform: break;
  }
  throw std::invalid_argument("unimodal_distribution: uniform smoothing has no unimodal base");
}

inline SoftTarget soft_target(Label k, int num_classes, const SoftLabelConfig& cfg) {
  cfg.validate();
  if (cfg.kind == SoftLabelKind::uniform) return uniform_smooth(k, num_classes, cfg.lambda);
  return ordinal_smooth(k, num_classes, cfg.lambda, unimodal_distribution(k, num_classes, cfg));
}

/// Row k holds the soft target of class k.
inline std::vector<ProbabilityVector> soft_target_table(int num_classes, const SoftLabelConfig& cfg) {
  std::vector<ProbabilityVector> rows;
  rows.reserve(static_cast<std::size_t>(num_classes));
  for (Label k = 0; k < num_classes; ++k) rows.push_back(soft_target(k, num_classes, cfg).dist);
  return rows;
}

}  // namespace ordinal

#pragma once

// Cumulative link model output layer.
//
// A scalar projection f is compared against J-1 ordered thresholds b_0 < ... <
// b_{J-2}: P(y <= j) = F(b_j - f) for an inverse link F, and class
// probabilities are successive differences of the cumulative values.
// Thresholds are parametrised without constraints as
//   b_0 = b1,  b_j = b_{j-1} + d_min + delta_{j-1}^2 (+ 1e-6 when d_min == 0).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinal/core.hpp"
#include "ordinal/numeric.hpp"

namespace ordinal {

enum class Link { logit, probit, cloglog };

inline std::string to_string(Link link) {
  switch (link) {
    case Link::logit: return "logit";
    case Link::probit: return "probit";
    case Link::cloglog: return "cloglog";
  }
  return "?";
}

inline Link parse_link(const std::string& name) {
  if (name == "logit") return Link::logit;
  if (name == "probit") return Link::probit;
  if (name == "cloglog") return Link::cloglog;
  throw std::invalid_argument("unknown link '" + name + "'");
}

inline constexpr double kThresholdPadding = 1e-6;
inline constexpr double kCloglogClamp = 30.0;

/// Inverse link F(x) and its derivative.
struct LinkValue {
  double cdf;
  double pdf;
  double sf;  // 1 - cdf, computed without cancellation
};

inline LinkValue inverse_link(Link link, double x) {
  switch (link) {
    case Link::logit: {
      const double s = numeric::sigmoid(x);
      const double t = numeric::sigmoid(-x);
      return {s, s * t, t};
    }
    case Link::probit: return {numeric::normal_cdf(x), numeric::normal_pdf(x), numeric::normal_cdf(-x)};
    case Link::cloglog: {
      if (x < -kCloglogClamp || x > kCloglogClamp) {
        const double c = std::clamp(x, -kCloglogClamp, kCloglogClamp);
        return {-std::expm1(-std::exp(c)), 0.0, std::exp(-std::exp(c))};
      }
      const double e = std::exp(x);
      return {-std::expm1(-e), std::exp(x - e), std::exp(-e)};
    }
  }
  throw std::logic_error("unreachable link");
}

struct ClmParams {
  double b1 = 0.0;
  std::vector<double> deltas;  // J - 2 unconstrained increments
  Link link = Link::logit;
  double d_min = 0.0;

  int num_classes() const { return static_cast<int>(deltas.size()) + 2; }
  double step_offset() const { return d_min + (d_min == 0.0 ? kThresholdPadding : 0.0); }
};

inline std::vector<double> materialize_thresholds(const ClmParams& params) {
  if (params.d_min < 0.0) throw std::invalid_argument("clm: minimum distance must be >= 0");
  std::vector<double> b(params.deltas.size() + 1);
  b[0] = params.b1;
  for (std::size_t j = 1; j < b.size(); ++j) {
    b[j] = b[j - 1] + params.step_offset() + params.deltas[j - 1] * params.deltas[j - 1];
  }
  return b;
}

struct ClmOutput {
  std::vector<double> cumulative;  // J - 1 values
  ProbabilityVector probs;
};

inline ClmOutput clm_forward(double f, const ClmParams& params) {
  if (!std::isfinite(f)) throw std::invalid_argument("clm_forward: projection is not finite");
  const auto b = materialize_thresholds(params);
  ClmOutput out;
  out.cumulative.resize(b.size());
  std::vector<double> upper(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    const auto v = inverse_link(params.link, b[j] - f);
    out.cumulative[j] = v.cdf;
    upper[j] = v.sf;
  }
  // Monotone in exact arithmetic; round-off near saturation is clipped.
  for (std::size_t j = 1; j < b.size(); ++j) {
    out.cumulative[j] = std::max(out.cumulative[j], out.cumulative[j - 1]);
    upper[j] = std::min(upper[j], upper[j - 1]);
  }
  // Class masses above the median come from differences of upper tails,
  // which keeps small upper-class probabilities accurate.
  const std::size_t J = b.size() + 1;
  out.probs.resize(J);
  double sum = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double lo_cdf = j == 0 ? 0.0 : out.cumulative[j - 1];
    const double hi_cdf = j + 1 < J ? out.cumulative[j] : 1.0;
    const double lo_sf = j == 0 ? 1.0 : upper[j - 1];
    const double hi_sf = j + 1 < J ? upper[j] : 0.0;
    out.probs[j] = std::max(lo_cdf > 0.5 ? lo_sf - hi_sf : hi_cdf - lo_cdf, 0.0);
    sum += out.probs[j];
  }
  for (double& p : out.probs) p /= sum;
  return out;
}

struct ClmGradient {
  double df = 0.0;
  double db1 = 0.0;
  std::vector<double> ddeltas;
};

/// Gradient of sum_j upstream[j] * probs[j] with respect to f, b1 and the
/// increments.
inline ClmGradient clm_backward(double f, const ClmParams& params, std::span<const double> upstream) {
  const auto b = materialize_thresholds(params);
  if (upstream.size() != b.size() + 1) {
    throw std::invalid_argument("clm_backward: upstream gradient has the wrong length");
  }
  ClmGradient g;
  g.ddeltas.assign(params.deltas.size(), 0.0);
  // probs[j] = cum[j] - cum[j-1]  =>  dL/dcum[j] = g[j] - g[j+1]
  std::vector<double> d_threshold(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double d_cum = upstream[j] - upstream[j + 1];
    const double slope = inverse_link(params.link, b[j] - f).pdf;
    d_threshold[j] = d_cum * slope;
    g.df -= d_threshold[j];
  }
  // b_j depends on b1 and on every increment before it.
  double tail = 0.0;
  for (std::size_t j = b.size(); j-- > 1;) {
    tail += d_threshold[j];
    g.ddeltas[j - 1] = 2.0 * params.deltas[j - 1] * tail;
  }
  for (double d : d_threshold) g.db1 += d;
  return g;
}

}  // namespace ordinal

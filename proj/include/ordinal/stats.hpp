#pragma once

// Two-way balanced ANOVA with interaction, the studentized range
// distribution, and Tukey HSD comparisons summarised as a compact letter
// display (homogeneous subsets S1..Sk).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinal/numeric.hpp"

namespace ordinal {

// ---------------------------------------------------------------------------
// Studentized range distribution.

namespace detail {

/// P(Q < w) for k means of independent N(0,1) draws (infinite df).
inline double studentized_range_cdf_inf(double w, int k) {
  if (w <= 0.0) return 0.0;
  const auto integrand = [&](double z) {
    const double band = numeric::normal_cdf(z) - numeric::normal_cdf(z - w);
    return numeric::normal_pdf(z) * std::pow(band, k - 1);
  };
  const double hi = 8.5 + w;
  const double value = k * numeric::gauss_legendre(integrand, -8.5, hi, static_cast<int>(std::ceil((hi + 8.5) / 1.5)));
  return std::clamp(value, 0.0, 1.0);
}

/// log density of S/sigma where S^2 is a variance estimate on `df` degrees of freedom.
inline double log_chi_scale_density(double s, double df) {
  if (s <= 0.0) return -std::numeric_limits<double>::infinity();
  return 0.5 * df * std::log(df) + (df - 1.0) * std::log(s) - 0.5 * df * s * s -
         std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::numbers::ln2;
}

}  // namespace detail

/// P(Q < q) of the studentized range with k groups and df error degrees of freedom.
inline double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw std::invalid_argument("studentized range: need k >= 2");
  if (!(df >= 1.0)) throw std::invalid_argument("studentized range: need df >= 1");
  if (q <= 0.0) return 0.0;
  if (std::isinf(df)) return detail::studentized_range_cdf_inf(q, k);

  // Integrate the infinite-df CDF against the density of S/sigma over the
  // region where that density is within e^-40 of its peak.
  const double mode = std::sqrt(std::max(df - 1.0, 0.0) / df);
  const double peak = detail::log_chi_scale_density(std::max(mode, 1e-3), df);
  const double step = std::max(1.0 / std::sqrt(2.0 * df), 1e-3);
  double hi = mode + step;
  while (detail::log_chi_scale_density(hi, df) > peak - 40.0) hi += step;
  double lo = mode;
  while (lo > 0.0 && detail::log_chi_scale_density(lo, df) > peak - 40.0) lo = std::max(0.0, lo - step);

  const auto integrand = [&](double s) {
    const double log_g = detail::log_chi_scale_density(s, df);
    if (log_g < -745.0) return 0.0;
    return std::exp(log_g) * detail::studentized_range_cdf_inf(q * s, k);
  };
  return std::clamp(numeric::gauss_legendre(integrand, lo, hi, 24), 0.0, 1.0);
}

/// Quantile of the studentized range by bisection on the CDF (absolute
/// tolerance 1e-6 in q).
inline double studentized_range_quantile(int k, double df, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::invalid_argument("studentized range quantile: probability must lie in (0, 1)");
  }
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (studentized_range_cdf(hi, k, df) < prob) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) {
      throw std::runtime_error("studentized range quantile: could not bracket the root");
    }
  }
  constexpr int kMaxIter = 200;
  for (int it = 0; it < kMaxIter; ++it) {
    if (hi - lo < 1e-7) return 0.5 * (lo + hi);
    const double mid = 0.5 * (lo + hi);
    (studentized_range_cdf(mid, k, df) < prob ? lo : hi) = mid;
  }
  throw std::runtime_error("studentized range quantile: bisection did not converge");
}

// ---------------------------------------------------------------------------
// Two-way ANOVA.

struct ResultRow {
  std::string method;
  std::string view_config;
  long long seed = 0;
  double value = 0.0;
};

using ResultsTable = std::vector<ResultRow>;

struct AnovaEffect {
  std::string name;
  double ss = 0.0;
  double df = 0.0;
  double f = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  /// Zero residual variance or zero degrees of freedom: F and p are limits or undefined.
  bool degenerate = false;
};

struct AnovaTable {
  AnovaEffect method{"Method"};
  AnovaEffect view{"View"};
  AnovaEffect interaction{"Method * View"};
  AnovaEffect residual{"Residual"};
  double ss_total = 0.0;
  double df_total = 0.0;
  std::size_t replicates = 0;
  std::vector<std::string> method_levels;
  std::vector<std::string> view_levels;
};

namespace detail {

inline std::vector<std::string> levels_in_order(const ResultsTable& t, bool method) {
  std::vector<std::string> out;
  for (const auto& r : t) {
    const auto& name = method ? r.method : r.view_config;
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

inline std::size_t index_of(const std::vector<std::string>& v, const std::string& s) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), s) - v.begin());
}

}  // namespace detail

/// Balanced two-factor ANOVA with interaction. In a balanced design the
/// sequential, Type II and Type III sums of squares coincide.
inline AnovaTable anova2(const ResultsTable& table) {
  AnovaTable out;
  out.method_levels = detail::levels_in_order(table, true);
  out.view_levels = detail::levels_in_order(table, false);
  const std::size_t a = out.method_levels.size();
  const std::size_t b = out.view_levels.size();
  if (a == 0) throw std::invalid_argument("anova2: empty table");

  std::vector<std::vector<double>> cells(a * b);
  for (const auto& r : table) {
    cells[detail::index_of(out.method_levels, r.method) * b +
          detail::index_of(out.view_levels, r.view_config)]
        .push_back(r.value);
  }
  const std::size_t reps = cells.front().size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].size() != reps) {
      throw std::invalid_argument("anova2: unbalanced design (cell " + out.method_levels[c / b] +
                                  " x " + out.view_levels[c % b] + " has " +
                                  std::to_string(cells[c].size()) + " replicates, expected " +
                                  std::to_string(reps) + ")");
    }
  }
  if (reps < 2) throw std::invalid_argument("anova2: need at least two replicates per cell");
  out.replicates = reps;

  const double r = static_cast<double>(reps);
  std::vector<double> cell_mean(a * b, 0.0);
  std::vector<double> mean_a(a, 0.0);
  std::vector<double> mean_b(b, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      double s = 0.0;
      for (double x : cells[i * b + j]) s += x;
      cell_mean[i * b + j] = s / r;
      mean_a[i] += cell_mean[i * b + j] / static_cast<double>(b);
      mean_b[j] += cell_mean[i * b + j] / static_cast<double>(a);
      grand += cell_mean[i * b + j] / static_cast<double>(a * b);
    }
  }
  double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < a; ++i) ss_a += b * r * (mean_a[i] - grand) * (mean_a[i] - grand);
  for (std::size_t j = 0; j < b; ++j) ss_b += a * r * (mean_b[j] - grand) * (mean_b[j] - grand);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double m = cell_mean[i * b + j];
      const double inter = m - mean_a[i] - mean_b[j] + grand;
      ss_ab += r * inter * inter;
      for (double x : cells[i * b + j]) {
        ss_res += (x - m) * (x - m);
        ss_tot += (x - grand) * (x - grand);
      }
    }
  }
  // Constant data: what is left is rounding noise in the means.
  double raw = 0.0;
  for (const auto& r : table) raw += r.value * r.value;
  if (ss_tot <= 1e-24 * raw) ss_a = ss_b = ss_ab = ss_res = ss_tot = 0.0;

  out.method.ss = ss_a;
  out.method.df = static_cast<double>(a - 1);
  out.view.ss = ss_b;
  out.view.df = static_cast<double>(b - 1);
  out.interaction.ss = ss_ab;
  out.interaction.df = static_cast<double>((a - 1) * (b - 1));
  out.residual.ss = ss_res;
  out.residual.df = static_cast<double>(a * b * (reps - 1));
  out.ss_total = ss_tot;
  out.df_total = static_cast<double>(a * b * reps - 1);

  const double zero = 1e-12 * ss_tot;
  const double ms_res = ss_res / out.residual.df;
  for (AnovaEffect* e : {&out.method, &out.view, &out.interaction}) {
    if (e->df == 0.0) {
      e->degenerate = true;
      continue;
    }
    if (ss_res <= zero) {
      e->degenerate = true;
      if (e->ss > zero) {
        e->f = std::numeric_limits<double>::infinity();
        e->p_value = 0.0;
      }
      continue;
    }
    e->f = (e->ss / e->df) / ms_res;
    e->p_value = numeric::f_distribution_sf(e->f, e->df, out.residual.df);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tukey HSD and compact letter display.

struct NamedGroup {
  std::string name;
  std::vector<double> values;
};

struct TukeyGrouping {
  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> p_values;  // symmetric, 1 on the diagonal
  /// Homogeneous subsets ordered from lowest to highest means; each lists
  /// group indices in ascending order of mean.
  std::vector<std::vector<std::size_t>> subsets;
  double alpha = 0.05;
  double mse = 0.0;
  double df = 0.0;

  /// Group indices sorted by ascending mean.
  std::vector<std::size_t> order_by_mean() const {
    std::vector<std::size_t> idx(means.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return means[x] < means[y]; });
    return idx;
  }

  bool significant(std::size_t a, std::size_t b) const { return p_values[a][b] < alpha; }

  bool share_subset(std::size_t a, std::size_t b) const {
    for (const auto& s : subsets) {
      const bool has_a = std::find(s.begin(), s.end(), a) != s.end();
      const bool has_b = std::find(s.begin(), s.end(), b) != s.end();
      if (has_a && has_b) return true;
    }
    return false;
  }

  /// Subset labels ("S1", "S2", ...) containing group `g`.
  std::vector<std::string> labels_of(std::size_t g) const {
    std::vector<std::string> out;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      if (std::find(subsets[s].begin(), subsets[s].end(), g) != subsets[s].end()) {
        out.push_back("S" + std::to_string(s + 1));
      }
    }
    return out;
  }
};

/// Insert-and-absorb compact letter display: starting from one subset holding
/// every group, each significant pair splits every subset containing both
/// members into a copy without each of them, and subsets contained in another
/// subset are dropped.
inline std::vector<std::vector<std::size_t>> compact_letter_display(
    std::size_t groups, const std::vector<std::vector<bool>>& significant) {
  std::vector<std::vector<bool>> columns{std::vector<bool>(groups, true)};
  for (std::size_t i = 0; i < groups; ++i) {
    for (std::size_t j = i + 1; j < groups; ++j) {
      if (!significant[i][j]) continue;
      std::vector<std::vector<bool>> next;
      for (const auto& col : columns) {
        if (col[i] && col[j]) {
          auto without_i = col;
          without_i[i] = false;
          auto without_j = col;
          without_j[j] = false;
          next.push_back(std::move(without_i));
          next.push_back(std::move(without_j));
        } else {
          next.push_back(col);
        }
      }
      // Absorb: drop duplicates and columns contained in another column.
      std::vector<std::vector<bool>> kept;
      for (std::size_t c = 0; c < next.size(); ++c) {
        bool redundant = false;
        for (std::size_t d = 0; d < next.size() && !redundant; ++d) {
          if (c == d) continue;
          bool subset = true;
          for (std::size_t g = 0; g < groups && subset; ++g) subset = !next[c][g] || next[d][g];
          if (subset && (next[c] != next[d] || d < c)) redundant = true;
        }
        if (!redundant) kept.push_back(next[c]);
      }
      columns = std::move(kept);
    }
  }
  std::vector<std::vector<std::size_t>> out;
  for (const auto& col : columns) {
    std::vector<std::size_t> members;
    for (std::size_t g = 0; g < groups; ++g) {
      if (col[g]) members.push_back(g);
    }
    out.push_back(std::move(members));
  }
  return out;
}

inline TukeyGrouping tukey_hsd(const std::vector<NamedGroup>& groups, double alpha = 0.05) {
  if (groups.size() < 2) throw std::invalid_argument("tukey_hsd: need at least two groups");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tukey_hsd: alpha must lie in (0, 1)");
  TukeyGrouping t;
  t.alpha = alpha;
  const std::size_t k = groups.size();
  double ss_within = 0.0;
  std::size_t n_total = 0;
  for (const auto& g : groups) {
    if (g.values.size() < 2) {
      throw std::invalid_argument("tukey_hsd: group '" + g.name + "' has fewer than two values");
    }
    double mean = 0.0;
    for (double x : g.values) mean += x;
    mean /= static_cast<double>(g.values.size());
    for (double x : g.values) ss_within += (x - mean) * (x - mean);
    t.names.push_back(g.name);
    t.means.push_back(mean);
    t.sizes.push_back(g.values.size());
    n_total += g.values.size();
  }
  t.df = static_cast<double>(n_total - k);
  t.mse = ss_within / t.df;
  if (!(t.mse > 0.0)) throw std::invalid_argument("tukey_hsd: pooled within-group variance is zero");

  t.p_values.assign(k, std::vector<double>(k, 1.0));
  std::vector<std::vector<bool>> significant(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double se = std::sqrt(0.5 * t.mse * (1.0 / t.sizes[i] + 1.0 / t.sizes[j]));
      const double q = std::abs(t.means[i] - t.means[j]) / se;
      const double p = 1.0 - studentized_range_cdf(q, static_cast<int>(k), t.df);
      t.p_values[i][j] = t.p_values[j][i] = std::clamp(p, 0.0, 1.0);
      significant[i][j] = significant[j][i] = p < alpha;
    }
  }

  auto subsets = compact_letter_display(k, significant);
  const auto rank = [&] {
    std::vector<std::size_t> r(k);
    const auto order = t.order_by_mean();
    for (std::size_t i = 0; i < k; ++i) r[order[i]] = i;
    return r;
  }();
  for (auto& s : subsets) {
    std::sort(s.begin(), s.end(), [&](std::size_t x, std::size_t y) { return rank[x] < rank[y]; });
  }
  std::sort(subsets.begin(), subsets.end(), [&](const auto& x, const auto& y) {
    if (rank[x.front()] != rank[y.front()]) return rank[x.front()] < rank[y.front()];
    return rank[x.back()] < rank[y.back()];
  });
  t.subsets = std::move(subsets);
  return t;
}

enum class Factor { method, view };

/// One-way Tukey HSD over the levels of one factor, pooling every row of a level.
inline TukeyGrouping tukey_by_factor(const ResultsTable& table, Factor factor, double alpha = 0.05) {
  const bool by_method = factor == Factor::method;
  const auto levels = detail::levels_in_order(table, by_method);
  std::vector<NamedGroup> groups;
  for (const auto& l : levels) groups.push_back({l, {}});
  for (const auto& r : table) {
    groups[detail::index_of(levels, by_method ? r.method : r.view_config)].values.push_back(r.value);
  }
  return tukey_hsd(groups, alpha);
}

}  // namespace ordinal

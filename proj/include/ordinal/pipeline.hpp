#pragma once

// Data ingestion, synthetic multi-view data, and the experiment grid
// (methods x view configurations x seeds) with its CSV and markdown outputs.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "ordinal/core.hpp"
#include "ordinal/ensemble.hpp"
#include "ordinal/metrics.hpp"
#include "ordinal/model.hpp"
#include "ordinal/stats.hpp"

namespace ordinal {

// ---------------------------------------------------------------------------
// Synthetic data

/// Class shares of the reference defoliation dataset (40, 102, 106, 47 of 295).
inline std::vector<double> reference_class_proportions() {
  return {40.0 / 295.0, 102.0 / 295.0, 106.0 / 295.0, 47.0 / 295.0};
}

struct SynthConfig {
  std::size_t n_samples = 295;
  std::size_t n_features_per_view = 10;
  int num_classes = 4;
  std::vector<double> class_proportions = reference_class_proportions();
  std::vector<std::string> view_names = {"crown", "north", "south"};
  std::vector<double> view_noise = {1.0, 1.0, 1.0};
  double latent_correlation = 0.2;
};

/// Class sizes for `n` samples: largest-remainder rounding of n * proportion.
inline std::vector<std::size_t> class_sizes(std::span<const double> proportions, std::size_t n) {
  double sum = 0.0;
  for (double p : proportions) {
    if (!(p > 0.0)) throw std::invalid_argument("class proportions must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-3) {
    throw std::invalid_argument("class proportions sum to " + std::to_string(sum) + ", not 1");
  }
  std::vector<std::size_t> sizes(proportions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t q = 0; q < proportions.size(); ++q) {
    const double quota = proportions[q] / sum * static_cast<double>(n);
    sizes[q] = static_cast<std::size_t>(std::floor(quota));
    remainders.emplace_back(quota - static_cast<double>(sizes[q]), q);
    assigned += sizes[q];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[remainders[i].second];
  for (std::size_t q = 0; q < sizes.size(); ++q) {
    if (sizes[q] == 0) {
      throw std::invalid_argument("class " + std::to_string(q) + " receives no samples out of " +
                                  std::to_string(n));
    }
  }
  return sizes;
}

/// Draws a latent severity per sample, labels samples by latent rank so the
/// class sizes match the configured proportions exactly, and renders each
/// view as random linear loadings of a noisy view-specific copy of the latent.
/// View noise is split into a part shared by all views (weight
/// latent_correlation) and an independent part.
inline MultiViewDataset generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.num_classes < 2) throw std::invalid_argument("synthetic: need at least two classes");
  if (cfg.class_proportions.size() != static_cast<std::size_t>(cfg.num_classes)) {
    throw std::invalid_argument("synthetic: one proportion per class required");
  }
  if (cfg.view_names.empty() || cfg.view_noise.size() != cfg.view_names.size()) {
    throw std::invalid_argument("synthetic: one noise level per view required");
  }
  if (cfg.n_features_per_view == 0) throw std::invalid_argument("synthetic: need features");
  if (!(cfg.latent_correlation >= 0.0 && cfg.latent_correlation <= 1.0)) {
    throw std::invalid_argument("synthetic: latent correlation must lie in [0, 1]");
  }
  for (double s : cfg.view_noise) {
    if (!(s >= 0.0)) throw std::invalid_argument("synthetic: view noise must be >= 0");
  }
  const auto sizes = class_sizes(cfg.class_proportions, cfg.n_samples);
  const std::size_t n = cfg.n_samples;

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> latent(n);
  for (double& t : latent) t = gauss(rng);

  MultiViewDataset data;
  data.num_classes = cfg.num_classes;
  data.labels.assign(n, 0);
  data.sample_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.sample_ids[i] = static_cast<std::int64_t>(i);
  std::vector<std::size_t> by_rank(n);
  std::iota(by_rank.begin(), by_rank.end(), std::size_t{0});
  std::sort(by_rank.begin(), by_rank.end(), [&](std::size_t a, std::size_t b) { return latent[a] < latent[b]; });
  std::size_t pos = 0;
  for (std::size_t q = 0; q < sizes.size(); ++q) {
    for (std::size_t c = 0; c < sizes[q]; ++c) data.labels[by_rank[pos++]] = static_cast<Label>(q);
  }

  std::vector<double> shared(n);
  for (double& e : shared) e = gauss(rng);
  const double w_shared = std::sqrt(cfg.latent_correlation);
  const double w_own = std::sqrt(1.0 - cfg.latent_correlation);
  const std::size_t d = cfg.n_features_per_view;
  for (std::size_t v = 0; v < cfg.view_names.size(); ++v) {
    const double noise = cfg.view_noise[v];
    std::vector<double> loading(d);
    double norm = 0.0;
    for (double& a : loading) {
      a = gauss(rng);
      norm += a * a;
    }
    norm = std::sqrt(norm);
    for (double& a : loading) a /= norm;
    FeatureMatrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      const double signal = latent[i] + noise * (w_shared * shared[i] + w_own * gauss(rng));
      for (std::size_t c = 0; c < d; ++c) x(i, c) = loading[c] * signal + noise * 0.1 * gauss(rng);
    }
    data.view_names.push_back(cfg.view_names[v]);
    data.views.push_back(std::move(x));
  }
  return data;
}

// ---------------------------------------------------------------------------
// CSV

class CsvError : public std::runtime_error {
 public:
  enum class Kind {
    io,
    missing_column,
    missing_id,
    duplicate_id,
    misaligned_ids,
    non_integer_label,
    label_out_of_range,
    label_mismatch,
    ragged_row,
    bad_number,
  };
  CsvError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(CsvError::Kind::io, "cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw CsvError(CsvError::Kind::ragged_row, path + ":" + std::to_string(line_no) + ": expected " +
                                                     std::to_string(t.header.size()) + " fields, found " +
                                                     std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw CsvError(CsvError::Kind::io, "'" + path + "' is empty");
  return t;
}

inline std::size_t column_index(const CsvTable& t, const std::string& name, const std::string& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) {
    throw CsvError(CsvError::Kind::missing_column, path + ": no column named '" + name + "'");
  }
  return static_cast<std::size_t>(it - t.header.begin());
}

inline bool parse_integer(const std::string& s, long long& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stoll(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

inline std::string format_double(double v, int precision = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

inline std::string format_fixed(double v, int decimals = 6) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

/// Writes one CSV per view (`<dir>/<view>.csv`) with columns id,label,f0,...
inline void write_views_csv(const MultiViewDataset& data, const std::filesystem::path& dir) {
  data.validate();
  std::filesystem::create_directories(dir);
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    std::ofstream out(dir / (data.view_names[v] + ".csv"));
    if (!out) throw CsvError(CsvError::Kind::io, "cannot write view '" + data.view_names[v] + "'");
    out << "id,label";
    for (std::size_t c = 0; c < data.views[v].cols; ++c) out << ",f" << c;
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << data.sample_ids[i] << ',' << data.labels[i];
      for (double x : data.views[v].row(i)) out << ',' << detail::format_double(x);
      out << '\n';
    }
  }
}

/// Loads aligned per-view CSVs. Every file needs an integer id column and the
/// label column; every other column is a feature. Rows are ordered by
/// ascending id. `num_classes` of 0 infers J from the largest label.
inline MultiViewDataset load_views_csv(const std::vector<std::pair<std::string, std::string>>& view_paths,
                                       const std::string& label_column = "label",
                                       const std::string& id_column = "id", int num_classes = 0) {
  using Kind = CsvError::Kind;
  if (view_paths.empty()) throw std::invalid_argument("load_views_csv: no views given");
  MultiViewDataset data;
  std::vector<std::int64_t> reference_ids;
  std::map<std::int64_t, Label> labels;

  for (const auto& [view, path] : view_paths) {
    const auto t = detail::read_csv(path);
    const std::size_t id_col = detail::column_index(t, id_column, path);
    const std::size_t label_col = detail::column_index(t, label_column, path);
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (c != id_col && c != label_col) feature_cols.push_back(c);
    }

    std::vector<std::pair<std::int64_t, std::size_t>> id_rows;
    std::map<std::int64_t, Label> view_labels;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string where = path + ":" + std::to_string(t.line_numbers[r]);
      long long id = 0;
      if (t.rows[r][id_col].empty()) throw CsvError(Kind::missing_id, where + ": missing sample id");
      if (!detail::parse_integer(t.rows[r][id_col], id)) {
        throw CsvError(Kind::missing_id, where + ": sample id '" + t.rows[r][id_col] + "' is not an integer");
      }
      long long label = 0;
      if (!detail::parse_integer(t.rows[r][label_col], label)) {
        throw CsvError(Kind::non_integer_label, where + ": label '" + t.rows[r][label_col] + "' is not an integer");
      }
      if (label < 0 || (num_classes > 0 && label >= num_classes)) {
        throw CsvError(Kind::label_out_of_range, where + ": label " + std::to_string(label) +
                                                     " outside [0, " + std::to_string(num_classes) + ")");
      }
      if (!view_labels.emplace(id, static_cast<Label>(label)).second) {
        throw CsvError(Kind::duplicate_id, where + ": duplicate sample id " + std::to_string(id));
      }
      id_rows.emplace_back(id, r);
    }
    std::sort(id_rows.begin(), id_rows.end());

    std::vector<std::int64_t> ids;
    for (const auto& [id, r] : id_rows) ids.push_back(id);
    if (data.views.empty()) {
      reference_ids = ids;
      labels = view_labels;
    } else {
      if (ids != reference_ids) {
        std::vector<std::int64_t> diff;
        std::set_symmetric_difference(ids.begin(), ids.end(), reference_ids.begin(), reference_ids.end(),
                                      std::back_inserter(diff));
        throw CsvError(Kind::misaligned_ids, path + ": sample ids do not match view '" +
                                                 data.view_names.front() + "' (first offending id " +
                                                 std::to_string(diff.front()) + ")");
      }
      for (const auto& [id, y] : view_labels) {
        if (labels.at(id) != y) {
          throw CsvError(Kind::label_mismatch, path + ": sample id " + std::to_string(id) +
                                                   " has label " + std::to_string(y) + " but " +
                                                   std::to_string(labels.at(id)) + " in view '" +
                                                   data.view_names.front() + "'");
        }
      }
    }

    FeatureMatrix x(id_rows.size(), feature_cols.size());
    for (std::size_t i = 0; i < id_rows.size(); ++i) {
      const std::size_t r = id_rows[i].second;
      for (std::size_t c = 0; c < feature_cols.size(); ++c) {
        if (!detail::parse_double(t.rows[r][feature_cols[c]], x(i, c)) || !std::isfinite(x(i, c))) {
          throw CsvError(Kind::bad_number, path + ":" + std::to_string(t.line_numbers[r]) + ": column '" +
                                               t.header[feature_cols[c]] + "' value '" +
                                               t.rows[r][feature_cols[c]] + "' is not a finite number");
        }
      }
    }
    data.view_names.push_back(view);
    data.views.push_back(std::move(x));
  }

  data.sample_ids = reference_ids;
  Label top = 0;
  for (std::int64_t id : reference_ids) {
    data.labels.push_back(labels.at(id));
    top = std::max(top, data.labels.back());
  }
  data.num_classes = num_classes > 0 ? num_classes : std::max(2, top + 1);
  data.validate();
  return data;
}

// ---------------------------------------------------------------------------
// Experiment grid

struct ExperimentConfig {
  std::vector<Method> methods = all_methods();
  std::vector<std::string> views = {"crown", "north", "south"};
  /// Explicit view configurations; empty means every nonempty subset of `views`.
  std::vector<std::vector<std::string>> view_configs;
  int n_seeds = 20;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  bool tuning = true;
  int folds = 3;
  std::size_t search_iterations = kSearchIterations;
  std::size_t weight_candidates = 1000;
  ModelConfig model_defaults;
  MetricOptions metric_options;
  std::string output_dir;
  unsigned jobs = 1;

  std::optional<SynthConfig> synthetic = SynthConfig{};
  std::vector<std::pair<std::string, std::string>> csv_paths;
  int num_classes = 0;  // csv only; 0 infers
};

/// Singles first, then pairs, then larger subsets, each in the order of `views`.
inline std::vector<std::vector<std::string>> all_view_configs(const std::vector<std::string>& views) {
  std::vector<std::vector<std::string>> out;
  const std::size_t v = views.size();
  for (std::size_t size = 1; size <= v; ++size) {
    for (std::size_t mask = 1; mask < (std::size_t{1} << v); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
      std::vector<std::string> cfg;
      for (std::size_t i = 0; i < v; ++i) {
        if (mask & (std::size_t{1} << i)) cfg.push_back(views[i]);
      }
      out.push_back(std::move(cfg));
    }
  }
  // Within one size, order subsets lexicographically by view position.
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto ia = std::find(views.begin(), views.end(), a[i]) - views.begin();
      const auto ib = std::find(views.begin(), views.end(), b[i]) - views.begin();
      if (ia != ib) return ia < ib;
    }
    return false;
  });
  return out;
}

inline std::string view_config_name(const std::vector<std::string>& views) {
  std::string s;
  for (const auto& v : views) s += (s.empty() ? "" : "+") + v;
  return s;
}

struct GridRow {
  std::string method;
  std::string view_config;
  int seed = 0;
  MetricReport report;
};

struct SelectionRecord {
  std::string method;
  std::string view;
  int seed = 0;
  std::string config;
  double cv_amae = std::numeric_limits<double>::quiet_NaN();
};

struct WeightRecord {
  std::string method;
  std::string view_config;
  int seed = 0;
  std::vector<double> weights;
  double validation_amae = 0.0;
  std::size_t evaluated = 0;
};

/// Sample ids that fed the weight search and those held out for testing.
struct PartitionAudit {
  int seed = 0;
  std::vector<std::int64_t> weight_search_ids;
  std::vector<std::int64_t> test_ids;
};

struct ExperimentResult {
  int num_classes = 0;
  std::vector<GridRow> rows;
  std::vector<SelectionRecord> selections;
  std::vector<WeightRecord> weights;
  std::vector<PartitionAudit> audits;
};

class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(const std::string& method, const std::string& view, int seed, const std::string& what)
      : std::runtime_error("method " + method + ", view " + view + ", seed " + std::to_string(seed) +
                           ": " + what),
        method_(method), view_(view), seed_(seed) {}
  const std::string& method() const { return method_; }
  const std::string& view() const { return view_; }
  int seed() const { return seed_; }

 private:
  std::string method_, view_;
  int seed_;
};

inline std::string grid_header(int num_classes) {
  std::string h = "method,view_config,seed,qwk,amae,accuracy";
  for (int q = 0; q < num_classes; ++q) h += ",sens_" + std::to_string(q);
  for (int q = 0; q < num_classes; ++q) h += ",mae_" + std::to_string(q);
  return h;
}

inline void write_grid_csv(const std::vector<GridRow>& rows, int num_classes, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CsvError(CsvError::Kind::io, "cannot write '" + path.string() + "'");
  out << grid_header(num_classes) << '\n';
  auto opt = [](const std::optional<double>& v) {
    return v ? detail::format_fixed(*v) : std::string("NA");
  };
  for (const auto& r : rows) {
    out << r.method << ',' << r.view_config << ',' << r.seed << ',' << detail::format_fixed(r.report.qwk) << ','
        << detail::format_fixed(r.report.amae) << ',' << detail::format_fixed(r.report.accuracy);
    for (const auto& s : r.report.sensitivity) out << ',' << opt(s);
    for (const auto& m : r.report.mae) out << ',' << opt(m);
    out << '\n';
  }
}

/// Reads one metric column of a grid CSV into a results table.
inline ResultsTable read_grid_metric(const std::string& path, const std::string& metric) {
  const auto t = detail::read_csv(path);
  const std::size_t m = detail::column_index(t, "method", path);
  const std::size_t v = detail::column_index(t, "view_config", path);
  const std::size_t s = detail::column_index(t, "seed", path);
  const std::size_t x = detail::column_index(t, metric, path);
  ResultsTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ResultRow row;
    row.method = t.rows[r][m];
    row.view_config = t.rows[r][v];
    if (!detail::parse_integer(t.rows[r][s], row.seed) || !detail::parse_double(t.rows[r][x], row.value)) {
      throw CsvError(CsvError::Kind::bad_number, path + ":" + std::to_string(t.line_numbers[r]) +
                                                     ": unreadable seed or " + metric + " value");
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace detail {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Mean and sample standard deviation (n - 1 denominator).
inline MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  r.n = v.size();
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

inline std::string cell(const MeanStd& m) { return format_fixed(m.mean, 4) + " ± " + format_fixed(m.std, 4); }

inline double metric_of(const GridRow& r, const std::string& metric) {
  if (metric == "qwk") return r.report.qwk;
  if (metric == "amae") return r.report.amae;
  return r.report.accuracy;
}

inline std::vector<std::string> unique_in_order(const std::vector<GridRow>& rows, bool method) {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    const auto& key = method ? r.method : r.view_config;
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
  }
  return out;
}

}  // namespace detail

/// Markdown summary: a method x view-configuration table of mean ± std per
/// metric, and the per-view-configuration means over all methods.
inline std::string summary_markdown(const std::vector<GridRow>& rows) {
  const auto methods = detail::unique_in_order(rows, true);
  const auto views = detail::unique_in_order(rows, false);
  const std::vector<std::pair<std::string, std::string>> metrics = {
      {"qwk", "QWK (higher is better)"}, {"amae", "AMAE (lower is better)"}, {"accuracy", "Accuracy (higher is better)"}};
  std::ostringstream os;
  os << "# Experiment summary\n\nMean ± sample standard deviation over seeds.\n";
  for (const auto& [key, title] : metrics) {
    os << "\n## " << title << " by method and view configuration\n\n| Method |";
    for (const auto& v : views) os << ' ' << v << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < views.size(); ++i) os << "---|";
    os << '\n';
    for (const auto& m : methods) {
      os << "| " << m << " |";
      for (const auto& v : views) {
        std::vector<double> vals;
        for (const auto& r : rows) {
          if (r.method == m && r.view_config == v) vals.push_back(detail::metric_of(r, key));
        }
        os << ' ' << detail::cell(detail::mean_std(vals)) << " |";
      }
      os << '\n';
    }
  }
  os << "\n## By view configuration, all methods pooled\n\n| View configuration | QWK | AMAE | Accuracy |\n|---|---|---|---|\n";
  for (const auto& v : views) {
    os << "| " << v << " |";
    for (const auto& [key, title] : metrics) {
      std::vector<double> vals;
      for (const auto& r : rows) {
        if (r.view_config == v) vals.push_back(detail::metric_of(r, key));
      }
      os << ' ' << detail::cell(detail::mean_std(vals)) << " |";
    }
    os << '\n';
  }
  return os.str();
}

inline std::string format_p_value(const AnovaEffect& e) {
  if (std::isnan(e.p_value)) return "undefined";
  if (e.p_value < 0.001) return "<0.001";
  return detail::format_fixed(e.p_value, 3);
}

inline std::string anova_markdown(const AnovaTable& a) {
  std::ostringstream os;
  os << "| | SS | DF | F | p-value |\n|---|---|---|---|---|\n";
  for (const AnovaEffect* e : {&a.method, &a.view, &a.interaction}) {
    os << "| " << e->name << " | " << detail::format_fixed(e->ss, 3) << " | " << detail::format_fixed(e->df, 0)
       << " | " << (std::isinf(e->f) ? std::string("inf") : detail::format_fixed(e->f, 3)) << " | "
       << format_p_value(*e) << (e->degenerate ? " (degenerate)" : "") << " |\n";
  }
  os << "| Residual | " << detail::format_fixed(a.residual.ss, 3) << " | " << detail::format_fixed(a.residual.df, 0)
     << " | | |\n";
  return os.str();
}

inline std::string tukey_markdown(const TukeyGrouping& t) {
  std::ostringstream os;
  os << "| Group |";
  for (std::size_t s = 0; s < t.subsets.size(); ++s) os << " S" << s + 1 << " |";
  os << "\n|---|";
  for (std::size_t s = 0; s < t.subsets.size(); ++s) os << "---|";
  os << '\n';
  for (std::size_t g : t.order_by_mean()) {
    os << "| " << t.names[g] << " |";
    for (const auto& subset : t.subsets) {
      const bool in = std::find(subset.begin(), subset.end(), g) != subset.end();
      os << ' ' << (in ? detail::format_fixed(t.means[g], 3) : std::string()) << " |";
    }
    os << '\n';
  }
  return os.str();
}

/// ANOVA and Tukey reports for one metric; explains instead when the design
/// cannot support them.
inline std::string stats_markdown(const ResultsTable& table, const std::string& metric, double alpha = 0.05) {
  std::ostringstream os;
  os << "## " << metric << "\n\n";
  try {
    const auto a = anova2(table);
    os << "### Two-way ANOVA\n\n" << anova_markdown(a) << '\n';
    for (const auto& [factor, name, levels] :
         {std::tuple{Factor::method, "Method", a.method_levels.size()},
          std::tuple{Factor::view, "View configuration", a.view_levels.size()}}) {
      if (levels < 2) continue;
      try {
        os << "### Tukey HSD: " << name << " (alpha = " << alpha << ")\n\n"
           << tukey_markdown(tukey_by_factor(table, factor, alpha)) << '\n';
      } catch (const std::exception& e) {
        os << "Not available: " << e.what() << "\n\n";
      }
    }
  } catch (const std::exception& e) {
    os << "Not available: " << e.what() << "\n\n";
  }
  return os.str();
}

namespace detail {

inline std::string resolved_config_text(const ExperimentConfig& cfg, const MultiViewDataset& data) {
  std::ostringstream os;
  os << "methods=";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) os << (i ? "," : "") << to_string(cfg.methods[i]);
  os << "\nview_configs=";
  const auto configs = cfg.view_configs.empty() ? all_view_configs(cfg.views) : cfg.view_configs;
  for (std::size_t i = 0; i < configs.size(); ++i) os << (i ? "," : "") << view_config_name(configs[i]);
  os << "\nn_seeds=" << cfg.n_seeds << "\nseed=" << cfg.seed << "\ntest_fraction=" << cfg.test_fraction
     << "\ntuning=" << (cfg.tuning ? "true" : "false") << "\nfolds=" << cfg.folds
     << "\nsearch_iterations=" << cfg.search_iterations << "\nweight_candidates=" << cfg.weight_candidates
     << "\nbackbone=" << (cfg.model_defaults.backbone == Backbone::linear ? "linear" : "one_hidden")
     << "\nhidden_width=" << cfg.model_defaults.hidden_width << "\nlink=" << to_string(cfg.model_defaults.link)
     << "\nepochs=" << cfg.model_defaults.epochs << "\nbatch_size=" << cfg.model_defaults.batch_size
     << "\nlearning_rate=" << cfg.model_defaults.learning_rate << "\nqwk_exponent=" << cfg.metric_options.qwk_exponent
     << "\ne_normalization="
     << (cfg.metric_options.normalization == ExpectedNormalization::sample_total ? "n" : "j")
     << "\nweight_selection_metric=amae";
  if (cfg.synthetic) {
    const auto& s = *cfg.synthetic;
    os << "\ndata=synthetic\nn_samples=" << s.n_samples << "\nn_features_per_view=" << s.n_features_per_view
       << "\nclasses=" << s.num_classes << "\nlatent_correlation=" << s.latent_correlation << "\nview_noise=";
    for (std::size_t i = 0; i < s.view_noise.size(); ++i) os << (i ? "," : "") << s.view_noise[i];
  } else {
    os << "\ndata=csv";
    for (const auto& [v, p] : cfg.csv_paths) os << "\ncsv." << v << "=" << p;
  }
  os << "\nsamples=" << data.size() << "\nnum_classes=" << data.num_classes << '\n';
  return os.str();
}

}  // namespace detail

inline MultiViewDataset load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic, cfg.seed);
  return load_views_csv(cfg.csv_paths, "label", "id", cfg.num_classes);
}

/// Runs the full grid. The 80/20 test partition is drawn once from the run
/// seed; each replicate seed bootstraps the training partition, tunes and
/// trains one model per view, fits ensemble weights on out-of-fold training
/// predictions, and scores every view configuration on the shared test set.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const MultiViewDataset& data) {
  data.validate();
  if (cfg.n_seeds < 1) throw std::invalid_argument("experiment: n_seeds must be >= 1");
  if (cfg.methods.empty()) throw std::invalid_argument("experiment: no methods");
  const auto configs = cfg.view_configs.empty() ? all_view_configs(cfg.views) : cfg.view_configs;
  if (configs.empty()) throw std::invalid_argument("experiment: no view configurations");

  std::vector<std::string> used_views;
  std::set<std::string> needs_oof;
  for (const auto& c : configs) {
    if (c.empty()) throw std::invalid_argument("experiment: empty view configuration");
    for (const auto& v : c) {
      data.view_index(v);
      if (std::find(used_views.begin(), used_views.end(), v) == used_views.end()) used_views.push_back(v);
      if (c.size() > 1) needs_oof.insert(v);
    }
  }

  const auto [train_idx, test_idx] =
      stratified_split_indices(data.labels, data.num_classes, cfg.test_fraction, derive_seed(cfg.seed, 1));
  const MultiViewDataset train_base = data.subset(train_idx);
  const MultiViewDataset test = data.subset(test_idx);

  ExperimentResult result;
  result.num_classes = data.num_classes;
  std::vector<MultiViewDataset> resampled;
  for (int s = 0; s < cfg.n_seeds; ++s) {
    resampled.push_back(stratified_resample(train_base, derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(s))));
    result.audits.push_back({s, resampled.back().sample_ids, test.sample_ids});
  }

  struct JobOutput {
    std::vector<GridRow> rows;
    std::vector<SelectionRecord> selections;
    std::vector<WeightRecord> weights;
    std::optional<ExperimentError> error;
  };
  const std::size_t n_jobs = cfg.methods.size() * static_cast<std::size_t>(cfg.n_seeds);
  std::vector<JobOutput> outputs(n_jobs);

  auto run_job = [&](std::size_t job) {
    const Method method = cfg.methods[job / static_cast<std::size_t>(cfg.n_seeds)];
    const int s = static_cast<int>(job % static_cast<std::size_t>(cfg.n_seeds));
    const std::string mname = to_string(method);
    const MultiViewDataset& train_set = resampled[static_cast<std::size_t>(s)];
    const std::uint64_t job_seed = derive_seed(derive_seed(cfg.seed, 2000 + static_cast<std::uint64_t>(s)),
                                               static_cast<std::uint64_t>(method));
    JobOutput& out = outputs[job];
    std::string stage_view = "-";
    try {
      std::map<std::string, std::vector<ProbabilityVector>> test_probs;
      std::map<std::string, std::vector<ProbabilityVector>> oof_probs;
      for (std::size_t vi = 0; vi < used_views.size(); ++vi) {
        const auto& view = used_views[vi];
        stage_view = view;
        const ViewData train_v = train_set.view(view);
        const std::uint64_t view_seed = derive_seed(job_seed, vi);
        ModelConfig chosen = method_config(method, cfg.model_defaults);
        chosen.seed = view_seed;
        SelectionRecord sel{mname, view, s, "", std::numeric_limits<double>::quiet_NaN()};
        if (cfg.tuning) {
          const auto tuned = tune(SearchSpace::for_method(method, cfg.model_defaults), train_v, view_seed,
                                  cfg.folds, cfg.search_iterations);
          chosen = tuned.best;
          sel.cv_amae = tuned.best_amae;
        }
        sel.config = chosen.describe();
        out.selections.push_back(sel);
        const auto model = train(chosen, train_v);
        test_probs[view] = predict_proba(model, test.views[test.view_index(view)]);
        if (needs_oof.contains(view)) {
          oof_probs[view] = out_of_fold_proba(chosen, train_v, cfg.folds, derive_seed(view_seed, 77));
        }
      }
      for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        const auto& c = configs[ci];
        stage_view = view_config_name(c);
        std::vector<Label> pred;
        if (c.size() == 1) {
          for (const auto& p : test_probs.at(c[0])) pred.push_back(argmax_label(p));
        } else {
          std::vector<ViewProbMatrix> val;
          for (std::size_t i = 0; i < train_set.size(); ++i) {
            std::vector<ProbabilityVector> rows;
            for (const auto& v : c) rows.push_back(oof_probs.at(v)[i]);
            val.emplace_back(std::move(rows));
          }
          const auto search = optimize_weights(val, train_set.labels, cfg.weight_candidates, derive_seed(job_seed, 500 + ci));
          std::vector<ViewProbMatrix> test_rows;
          for (std::size_t i = 0; i < test.size(); ++i) {
            std::vector<ProbabilityVector> rows;
            for (const auto& v : c) rows.push_back(test_probs.at(v)[i]);
            test_rows.emplace_back(std::move(rows));
          }
          pred = ensemble_labels(test_rows, search.weights);
          out.weights.push_back({mname, stage_view, s, search.weights.values(), search.amae, search.evaluated});
        }
        out.rows.push_back({mname, stage_view, s, evaluate(test.labels, pred, data.num_classes, cfg.metric_options)});
      }
    } catch (const std::exception& e) {
      // Rows of view configurations finished before the failure are kept.
      out.error = ExperimentError(mname, stage_view, s, e.what());
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(n_jobs)));
  if (workers == 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < n_jobs; j = next++) run_job(j);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Rows ordered by method, view configuration, seed.
  std::optional<ExperimentError> first_error;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
      for (int s = 0; s < cfg.n_seeds; ++s) {
        const auto& o = outputs[mi * static_cast<std::size_t>(cfg.n_seeds) + static_cast<std::size_t>(s)];
        if (ci < o.rows.size()) result.rows.push_back(o.rows[ci]);
      }
    }
    for (int s = 0; s < cfg.n_seeds; ++s) {
      const auto& o = outputs[mi * static_cast<std::size_t>(cfg.n_seeds) + static_cast<std::size_t>(s)];
      result.selections.insert(result.selections.end(), o.selections.begin(), o.selections.end());
      result.weights.insert(result.weights.end(), o.weights.begin(), o.weights.end());
      if (o.error && !first_error) first_error = o.error;
    }
  }

  if (!cfg.output_dir.empty()) {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    write_grid_csv(result.rows, data.num_classes, dir / "grid.csv");
    if (first_error) throw *first_error;
    {
      std::ofstream out(dir / "config.txt");
      out << detail::resolved_config_text(cfg, data);
    }
    {
      std::ofstream out(dir / "selections.csv");
      out << "method,view,seed,cv_amae,config\n";
      for (const auto& s : result.selections) {
        out << s.method << ',' << s.view << ',' << s.seed << ',' << detail::format_fixed(s.cv_amae) << ','
            << s.config << '\n';
      }
    }
    {
      std::ofstream out(dir / "weights.csv");
      out << "method,view_config,seed,validation_amae,candidates,weights\n";
      for (const auto& w : result.weights) {
        out << w.method << ',' << w.view_config << ',' << w.seed << ',' << detail::format_fixed(w.validation_amae)
            << ',' << w.evaluated << ',';
        for (std::size_t i = 0; i < w.weights.size(); ++i) out << (i ? " " : "") << detail::format_fixed(w.weights[i]);
        out << '\n';
      }
    }
    {
      std::ofstream out(dir / "summary.md");
      out << summary_markdown(result.rows);
    }
    {
      std::ofstream out(dir / "stats.md");
      out << "# Statistical comparison\n\n";
      for (const std::string metric : {"qwk", "amae", "accuracy"}) {
        ResultsTable table;
        for (const auto& r : result.rows) table.push_back({r.method, r.view_config, r.seed, detail::metric_of(r, metric)});
        out << stats_markdown(table, metric);
      }
    }
  }
  if (first_error) throw *first_error;
  return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, load_experiment_data(cfg));
}

// ---------------------------------------------------------------------------
// Single method on a single view

struct SingleRunResult {
  ModelConfig config;
  TrainedModel model;
  std::vector<std::int64_t> test_ids;
  std::vector<Label> y_true;
  std::vector<Label> y_pred;
  std::vector<ProbabilityVector> probabilities;
  MetricReport report;
};

inline SingleRunResult train_single(const MultiViewDataset& data, Method method, const std::string& view,
                                    const ExperimentConfig& cfg) {
  const auto [train_idx, test_idx] =
      stratified_split_indices(data.labels, data.num_classes, cfg.test_fraction, derive_seed(cfg.seed, 1));
  const ViewData all = data.view(view);
  const ViewData train_v = all.subset(train_idx);
  const ViewData test_v = all.subset(test_idx);
  SingleRunResult r;
  r.config = method_config(method, cfg.model_defaults);
  r.config.seed = derive_seed(cfg.seed, 3);
  if (cfg.tuning) {
    r.config = tune(SearchSpace::for_method(method, cfg.model_defaults), train_v, r.config.seed, cfg.folds,
                    cfg.search_iterations)
                   .best;
  }
  r.model = train(r.config, train_v);
  r.test_ids = test_v.sample_ids;
  r.y_true = test_v.labels;
  r.probabilities = predict_proba(r.model, test_v.features);
  for (const auto& p : r.probabilities) r.y_pred.push_back(argmax_label(p));
  r.report = evaluate(r.y_true, r.y_pred, data.num_classes, cfg.metric_options);
  return r;
}

inline void write_predictions_csv(const SingleRunResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CsvError(CsvError::Kind::io, "cannot write '" + path.string() + "'");
  out << "id,y_true,y_pred";
  const std::size_t J = r.probabilities.empty() ? 0 : r.probabilities.front().size();
  for (std::size_t q = 0; q < J; ++q) out << ",p_" << q;
  out << '\n';
  for (std::size_t i = 0; i < r.y_true.size(); ++i) {
    out << r.test_ids[i] << ',' << r.y_true[i] << ',' << r.y_pred[i];
    for (double p : r.probabilities[i]) out << ',' << detail::format_fixed(p, 8);
    out << '\n';
  }
}

/// Reads the y_true / y_pred columns of a predictions CSV.
inline std::pair<std::vector<Label>, std::vector<Label>> read_predictions_csv(const std::string& path) {
  const auto t = detail::read_csv(path);
  const std::size_t ct = detail::column_index(t, "y_true", path);
  const std::size_t cp = detail::column_index(t, "y_pred", path);
  std::vector<Label> y_true, y_pred;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    long long a = 0, b = 0;
    if (!detail::parse_integer(t.rows[r][ct], a) || !detail::parse_integer(t.rows[r][cp], b)) {
      throw CsvError(CsvError::Kind::non_integer_label,
                     path + ":" + std::to_string(t.line_numbers[r]) + ": labels must be integers");
    }
    y_true.push_back(static_cast<Label>(a));
    y_pred.push_back(static_cast<Label>(b));
  }
  return {y_true, y_pred};
}

}  // namespace ordinal

// Command-line front end: synthetic data generation, single-model training,
// the full experiment grid, statistics over a grid CSV, and metric scoring.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ordinal/ordinal.hpp"

namespace {

using namespace ordinal;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct DataOptions {
  std::string data_dir;  // empty: synthetic
  std::vector<std::string> views = {"crown", "north", "south"};
  int classes = 0;
  SynthConfig synth;
};

void add_synth_options(CLI::App* cmd, SynthConfig& s) {
  cmd->add_option("--n-samples", s.n_samples, "Synthetic sample count")->capture_default_str();
  cmd->add_option("--features", s.n_features_per_view, "Synthetic features per view")->capture_default_str();
  cmd->add_option("--view-noise", s.view_noise, "Synthetic noise level per view")->delimiter(',')->capture_default_str();
  cmd->add_option("--latent-correlation", s.latent_correlation, "Share of view noise common to all views")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

void add_metric_options(CLI::App* cmd, MetricOptions& m, std::string& norm) {
  cmd->add_option("--qwk-exponent", m.qwk_exponent, "Distance exponent of the kappa penalty")
      ->capture_default_str()
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--e-normalization", norm, "Chance-agreement scaling: n (sample total) or j (class count)")
      ->capture_default_str()
      ->check(CLI::IsMember({"n", "j"}));
}

void apply_normalization(MetricOptions& m, const std::string& norm) {
  m.normalization = norm == "j" ? ExpectedNormalization::class_count : ExpectedNormalization::sample_total;
}

std::vector<std::pair<std::string, std::string>> csv_paths(const DataOptions& d, const std::vector<std::string>& views) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& v : views) out.emplace_back(v, (std::filesystem::path(d.data_dir) / (v + ".csv")).string());
  return out;
}

MultiViewDataset load_data(const DataOptions& d, std::uint64_t seed, const std::vector<std::string>& views) {
  if (d.data_dir.empty()) return generate_synthetic(d.synth, seed);
  return load_views_csv(csv_paths(d, views), "label", "id", d.classes);
}

void print_report(const MetricReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? detail::format_fixed(*v, 4) : std::string("NA"); };
  std::cout << "qwk      " << detail::format_fixed(r.qwk, 4) << "\namae     " << detail::format_fixed(r.amae, 4)
            << "\naccuracy " << detail::format_fixed(r.accuracy, 4) << '\n';
  for (std::size_t q = 0; q < r.sensitivity.size(); ++q) {
    std::cout << "class " << q << "  sensitivity " << opt(r.sensitivity[q]) << "  mae " << opt(r.mae[q]) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinal classification toolkit"};
  app.set_config("--config", "", "Key-value configuration file");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_dir;
  DataOptions data;
  std::string methods_arg = "all";
  std::string views_arg;
  int n_seeds = 20;
  bool no_tuning = false;
  int epochs = 200;
  int jobs = 1;
  std::size_t weight_candidates = 1000;
  std::string backbone = "linear";
  MetricOptions metric_opts;
  std::string norm = "n";

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--seed", seed, "Run seed")->capture_default_str();
    if (with_out) cmd->add_option("--out", out_dir, "Output directory")->required();
  };
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", data.data_dir, "Directory with one <view>.csv per view (default: synthetic data)");
    cmd->add_option("--classes", data.classes, "Number of classes for CSV data (0 infers)")->capture_default_str();
    add_synth_options(cmd, data.synth);
  };
  auto add_training = [&](CLI::App* cmd) {
    cmd->add_flag("--no-tuning", no_tuning, "Skip the hyperparameter search");
    cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--backbone", backbone, "Feature extractor")
        ->capture_default_str()
        ->check(CLI::IsMember({"linear", "one_hidden"}));
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic multi-view dataset as CSVs");
  add_common(gen, true);
  add_synth_options(gen, data.synth);

  std::string method_name = "nominal";
  std::string view_name = "crown";
  auto* trn = app.add_subcommand("train", "Train and evaluate one method on one view");
  add_common(trn, true);
  add_data(trn);
  add_training(trn);
  add_metric_options(trn, metric_opts, norm);
  trn->add_option("--method", method_name, "Method identifier")->capture_default_str();
  trn->add_option("--view", view_name, "View name")->capture_default_str();

  auto* exp = app.add_subcommand("experiment", "Run the methods x view configurations x seeds grid");
  add_common(exp, true);
  add_data(exp);
  add_training(exp);
  add_metric_options(exp, metric_opts, norm);
  exp->add_option("--methods", methods_arg, "Comma-separated methods, or 'all'")->capture_default_str();
  exp->add_option("--views", views_arg,
                  "Comma-separated views (all their combinations are run) or explicit configurations joined by '+'");
  exp->add_option("--n-seeds", n_seeds, "Number of replicate seeds")->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_option("--weight-candidates", weight_candidates, "Random ensemble weight candidates")->capture_default_str();

  std::string grid_path;
  std::string metric = "all";
  double alpha = 0.05;
  auto* sts = app.add_subcommand("stats", "Two-way ANOVA and Tukey HSD over a grid CSV");
  sts->add_option("--grid", grid_path, "Grid CSV written by 'experiment'")->required()->check(CLI::ExistingFile);
  sts->add_option("--metric", metric, "qwk, amae, accuracy or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"qwk", "amae", "accuracy", "all"}));
  sts->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  sts->add_option("--out", out_dir, "Write the report to this file instead of stdout");

  std::string predictions_path;
  auto* met = app.add_subcommand("metrics", "Score a predictions CSV with y_true and y_pred columns");
  met->add_option("--predictions", predictions_path, "Predictions CSV")->required()->check(CLI::ExistingFile);
  met->add_option("--classes", data.classes, "Number of classes (0 infers)")->capture_default_str();
  add_metric_options(met, metric_opts, norm);

  CLI11_PARSE(app, argc, argv);
  apply_normalization(metric_opts, norm);

  try {
    if (gen->parsed()) {
      const auto ds = generate_synthetic(data.synth, seed);
      write_views_csv(ds, out_dir);
      std::cout << "wrote " << ds.views.size() << " views of " << ds.size() << " samples to " << out_dir << '\n';
      return 0;
    }

    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.tuning = !no_tuning;
    cfg.model_defaults.epochs = epochs;
    cfg.model_defaults.backbone = backbone == "one_hidden" ? Backbone::one_hidden : Backbone::linear;
    cfg.metric_options = metric_opts;

    if (trn->parsed()) {
      const auto ds = load_data(data, seed, {view_name});
      const auto r = train_single(ds, parse_method(method_name), view_name, cfg);
      std::filesystem::create_directories(out_dir);
      write_predictions_csv(r, std::filesystem::path(out_dir) / "predictions.csv");
      std::cout << "config   " << r.config.describe() << '\n';
      print_report(r.report);
      return 0;
    }

    if (exp->parsed()) {
      if (methods_arg != "all") {
        cfg.methods.clear();
        for (const auto& m : split(methods_arg, ',')) cfg.methods.push_back(parse_method(m));
      }
      if (!views_arg.empty()) {
        const auto items = split(views_arg, ',');
        const bool explicit_configs = std::any_of(items.begin(), items.end(),
                                                  [](const std::string& s) { return s.find('+') != std::string::npos; });
        cfg.views.clear();
        for (const auto& item : items) {
          const auto parts = split(item, '+');
          if (explicit_configs) cfg.view_configs.push_back(parts);
          for (const auto& p : parts) {
            if (std::find(cfg.views.begin(), cfg.views.end(), p) == cfg.views.end()) cfg.views.push_back(p);
          }
        }
      }
      cfg.n_seeds = n_seeds;
      cfg.jobs = static_cast<unsigned>(jobs);
      cfg.weight_candidates = weight_candidates;
      cfg.output_dir = out_dir;
      if (!data.data_dir.empty()) {
        cfg.synthetic.reset();
        cfg.csv_paths = csv_paths(data, cfg.views);
        cfg.num_classes = data.classes;
      } else {
        cfg.synthetic = data.synth;
      }
      const auto result = run_experiment(cfg);
      std::cout << "wrote " << result.rows.size() << " grid rows to " << out_dir << '\n';
      return 0;
    }

    if (sts->parsed()) {
      std::ostringstream report;
      report << "# Statistical comparison\n\n";
      const std::vector<std::string> metrics =
          metric == "all" ? std::vector<std::string>{"qwk", "amae", "accuracy"} : std::vector<std::string>{metric};
      for (const auto& m : metrics) report << stats_markdown(read_grid_metric(grid_path, m), m, alpha);
      if (out_dir.empty()) {
        std::cout << report.str();
      } else {
        std::ofstream(out_dir) << report.str();
      }
      return 0;
    }

    if (met->parsed()) {
      const auto [y_true, y_pred] = read_predictions_csv(predictions_path);
      int classes = data.classes;
      if (classes == 0) {
        for (Label y : y_true) classes = std::max(classes, y + 1);
        for (Label y : y_pred) classes = std::max(classes, y + 1);
      }
      print_report(evaluate(y_true, y_pred, classes, metric_opts));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include "besra/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "besra/harness.hpp"

namespace besra {

namespace {

struct GenDataArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> train_mean_ir;
  std::optional<double> test_mean_ir;
};

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

struct AggregateArgs {
  std::string curves;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t resamples = 10000;
  std::string metric;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int gen_data(const GenDataArgs& a) {
  SyntheticSpec spec = a.config.empty() ? SyntheticSpec{} : parse_synthetic_spec(slurp(a.config));
  if (a.seed) spec.seed = *a.seed;
  if (a.train_mean_ir) spec.train_mean_ir = *a.train_mean_ir;
  if (a.test_mean_ir) spec.test_mean_ir = *a.test_mean_ir;
  const auto data = generate_synthetic(spec);
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  save_dataset(data.train, dir / "train.txt");
  save_dataset(data.test, dir / "test.txt");
  for (const auto* part : {&data.train, &data.test}) {
    const auto report = mean_ir(part->labels);
    std::cout << to_string(part->split) << ": " << part->size() << " instances, " << part->num_labels()
              << " labels, MeanIR " << format_double(report.mean_ir) << ", cardinality "
              << format_double(report.cardinality) << '\n';
  }
  return 0;
}

int run(const RunArgs& a) {
  auto configs = load_config(a.config);
  for (auto& cfg : configs) {
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.seed) cfg.seeds = {*a.seed};
    if (a.threads) cfg.threads = *a.threads;
    cfg.validate();
  }
  const auto curves = run_study(configs);
  for (const auto& c : curves) {
    std::cout << c.strategy << " seed " << c.seed;
    if (!c.records.empty()) {
      const auto& last = c.records.back();
      std::cout << ": labeled " << last.labeled << ", micro_f1 " << format_double(last.metrics.micro_f1);
    }
    if (c.stopped_early) std::cout << " (stopped early, " << c.unlabeled_at_stop << " unlabeled left)";
    std::cout << '\n';
  }
  return 0;
}

int aggregate_cmd(const AggregateArgs& a) {
  const auto curves = load_curves(a.curves);
  if (curves.empty()) throw std::runtime_error("no curve files in " + a.curves);
  const std::filesystem::path out = a.out.empty() ? std::filesystem::path(a.curves) / "aggregate.csv" : std::filesystem::path(a.out);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + out.string() + " for writing");
  write_aggregate_csv(file, curves, {a.resamples, a.seed});
  return 0;
}

int export_plot(const AggregateArgs& a) {
  const auto curves = load_curves(a.curves);
  if (curves.empty()) throw std::runtime_error("no curve files in " + a.curves);
  std::ostringstream csv;
  write_plot_csv(csv, curves, a.metric, {a.resamples, a.seed});
  if (a.out.empty() || a.out == "-") {
    std::cout << csv.str();
    return 0;
  }
  std::ofstream file(a.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + a.out + " for writing");
  file << csv.str();
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Beta-scoring batch active learning for multi-label classification", "besra"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic imbalanced multi-label train/test pair");
  gen_cmd->add_option("--config", gen.config, "JSON generator spec")->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output directory (train.txt, test.txt)")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--train-mean-ir", gen.train_mean_ir, "Target MeanIR of the training split");
  gen_cmd->add_option("--test-mean-ir", gen.test_mean_ir, "Target MeanIR of the test split");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run the active learning experiment described by a config file");
  run_cmd->add_option("--config", run_args.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run_args.out, "Output directory (overrides output_dir)");
  run_cmd->add_option("--seed", run_args.seed, "Run this single seed instead of the configured list");
  run_cmd->add_option("--threads", run_args.threads, "Worker threads for candidate scoring");

  AggregateArgs agg;
  auto* agg_cmd = app.add_subcommand("aggregate", "Mean and 95% bootstrap band for every strategy and metric");
  agg_cmd->add_option("curves", agg.curves, "Directory of curve_*.jsonl files")->required()->check(CLI::ExistingDirectory);
  agg_cmd->add_option("--out", agg.out, "Output CSV (default: <curves>/aggregate.csv)");
  agg_cmd->add_option("--seed", agg.seed, "Bootstrap seed");
  agg_cmd->add_option("--resamples", agg.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);

  AggregateArgs plot;
  plot.metric = "micro_f1";
  auto* plot_cmd = app.add_subcommand("export-plot", "Write one metric's mean and band per strategy as CSV");
  plot_cmd->add_option("curves", plot.curves, "Directory of curve_*.jsonl files")->required()->check(CLI::ExistingDirectory);
  plot_cmd->add_option("--out", plot.out, "Output CSV (default: stdout)");
  plot_cmd->add_option("--metric", plot.metric, "Metric name")
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kMetricNames), std::end(kMetricNames))));
  plot_cmd->add_option("--seed", plot.seed, "Bootstrap seed");
  plot_cmd->add_option("--resamples", plot.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen_cmd) return gen_data(gen);
    if (*run_cmd) return run(run_args);
    if (*agg_cmd) return aggregate_cmd(agg);
    if (*plot_cmd) return export_plot(plot);
  } catch (const std::exception& e) {
    std::cerr << "besra: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace besra

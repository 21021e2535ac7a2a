#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "besra/data.hpp"
#include "besra/metrics.hpp"
#include "besra/models.hpp"
#include "besra/scoring.hpp"

namespace besra {

enum class StrategyKind { Besra, Random, Uncertainty };

StrategyKind parse_strategy_kind(std::string_view name);
std::string to_string(StrategyKind kind);

struct Strategy {
  StrategyKind kind = StrategyKind::Besra;
  ScoreParams params{0.1, 3.0};
  std::string label;  // empty: derived from kind and params

  // Output name, e.g. "besra_a0.1_b3" or "random".
  std::string name() const;
};

struct DatasetSource {
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path train_path;
  std::filesystem::path test_path;
};

struct ExperimentConfig {
  DatasetSource dataset;
  Strategy strategy;
  std::size_t ensemble_size = 5;
  std::size_t initial_labeled = 100;
  // Carved out of the training pool before the initial draw and never used.
  std::size_t validation_size = 0;
  std::size_t batch_size = 100;
  std::size_t iterations = 5;
  std::size_t estimation_pool_size = 300;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path output_dir;  // empty: nothing written
  TrainConfig train;
  double threshold = 0.5;
  unsigned threads = 1;
  // Adds wall-clock seconds to records; output is then no longer reproducible.
  bool record_timing = false;

  // Throws std::invalid_argument on the first violated constraint.
  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::size_t labeled = 0;    // |L| after this iteration's acquisition
  MetricsReport metrics;
  std::vector<std::size_t> acquired;  // training-pool rows, in acquisition order
  double wall_seconds = 0.0;
};

struct LearningCurve {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<std::size_t> initial;  // initial labeled rows
  std::vector<IterationRecord> records;
  bool stopped_early = false;
  std::size_t unlabeled_at_stop = 0;
};

SyntheticData resolve_dataset(const DatasetSource& source);

// One replicate of the acquisition loop. When `sink` is non-null the curve
// file lines (docs/formats.md) are written to it as they are produced.
LearningCurve run_seed(const ExperimentConfig& cfg, const MultiLabelDataset& train, const MultiLabelDataset& test,
                       std::uint64_t seed, std::ostream* sink = nullptr);

// All seeds of one configuration; writes curve_<strategy>_seed<seed>.jsonl
// files under cfg.output_dir when set.
std::vector<LearningCurve> run_experiment(const ExperimentConfig& cfg);

// Several configurations sharing one output directory; also writes
// aggregate.csv there when every strategy has at least two seeds.
std::vector<LearningCurve> run_study(std::span<const ExperimentConfig> configs);

std::string curve_file_name(const std::string& strategy, std::uint64_t seed);

void write_record(std::ostream& out, const LearningCurve& curve, const IterationRecord& record,
                  bool include_timing);
void write_curve(std::ostream& out, const LearningCurve& curve, bool include_timing = false);
LearningCurve read_curve(std::istream& in);
// Every curve_*.jsonl file in dir, sorted by file name.
std::vector<LearningCurve> load_curves(const std::filesystem::path& dir);

struct BandPoint {
  std::size_t labeled = 0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapBand {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap of the sample mean; percentiles interpolate linearly
// between order statistics.
BootstrapBand bootstrap_mean_band(std::span<const double> values, std::size_t resamples, std::uint64_t seed,
                                  double level = 0.95);

struct AggregateOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
};

// Mean and 95% bootstrap band per checkpoint across replicate curves.
// Throws std::invalid_argument for fewer than two curves or misaligned
// checkpoints.
std::vector<BandPoint> aggregate(std::span<const LearningCurve> curves, std::string_view metric,
                                 const AggregateOptions& options = {});

// Curves grouped by strategy name.
std::map<std::string, std::vector<LearningCurve>> group_by_strategy(std::span<const LearningCurve> curves);

// strategy,metric,labeled,mean,lower,upper,seeds for every metric.
void write_aggregate_csv(std::ostream& out, std::span<const LearningCurve> curves,
                         const AggregateOptions& options = {});

inline constexpr std::string_view kPlotCsvHeader = "strategy,labeled,mean,lower,upper";

// One metric, ready for plotting: strategy,labeled,mean,lower,upper.
void write_plot_csv(std::ostream& out, std::span<const LearningCurve> curves, std::string_view metric,
                    const AggregateOptions& options = {});

// Checks header, field count, numeric fields, lower <= mean <= upper and
// increasing label counts per strategy. Returns the data row count; throws
// ParseError on the first violation.
std::size_t validate_plot_csv(std::istream& in);

// Configuration files are JSON (docs/formats.md). Relative dataset paths
// resolve against base_dir. One ExperimentConfig per listed strategy.
std::vector<ExperimentConfig> parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
std::vector<ExperimentConfig> load_config(const std::filesystem::path& path);
SyntheticSpec parse_synthetic_spec(std::string_view json_text);

}  // namespace besra

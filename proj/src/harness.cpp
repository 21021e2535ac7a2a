#include "besra/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "besra/acquisition.hpp"
#include "besra/errors.hpp"
#include "besra/rng.hpp"
#include "json.hpp"

namespace besra {

StrategyKind parse_strategy_kind(std::string_view name) {
  if (name == "besra") return StrategyKind::Besra;
  if (name == "random") return StrategyKind::Random;
  if (name == "uncertainty") return StrategyKind::Uncertainty;
  throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Besra: return "besra";
    case StrategyKind::Random: return "random";
    case StrategyKind::Uncertainty: return "uncertainty";
  }
  return "besra";
}

namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string Strategy::name() const {
  if (!label.empty()) return label;
  if (kind == StrategyKind::Besra) return "besra_a" + short_number(params.alpha) + "_b" + short_number(params.beta);
  return to_string(kind);
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (iterations < 1) fail("iterations must be >= 1");
  if (ensemble_size < 2) fail("ensemble_size must be >= 2");
  if (initial_labeled < 1) fail("initial_labeled must be >= 1");
  if (estimation_pool_size < 1) fail("estimation_pool_size must be >= 1");
  if (seeds.empty()) fail("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) fail("seeds must be distinct");
  if (!(threshold > 0.0 && threshold < 1.0)) fail("threshold must be in (0,1)");
  if (!dataset.synthetic && (dataset.train_path.empty() || dataset.test_path.empty())) {
    fail("dataset needs a synthetic spec or both train and test paths");
  }
  if (dataset.synthetic && initial_labeled + validation_size > dataset.synthetic->n_train) {
    fail("initial_labeled + validation_size exceeds the training pool");
  }
  const std::string name = strategy.name();
  if (name.empty() || name.find_first_of("/\\ \t\n") != std::string::npos) fail("strategy label must be a plain token");
  train.validate();
  if (strategy.kind == StrategyKind::Besra) BetaScoringRule{strategy.params};  // rejects unsupported params
}

SyntheticData resolve_dataset(const DatasetSource& source) {
  if (source.synthetic) return generate_synthetic(*source.synthetic);
  SyntheticData data{load_dataset(source.train_path), load_dataset(source.test_path)};
  data.train.validate();
  data.test.validate();
  if (data.train.dim != data.test.dim || data.train.num_labels() != data.test.num_labels()) {
    throw std::invalid_argument("train and test datasets disagree on dimension or label count");
  }
  return data;
}

namespace {

std::vector<double> ensemble_mean(std::span<const BRLinearModel> members, const MultiLabelDataset& data) {
  std::vector<double> mean;
  for (const auto& m : members) {
    const auto p = predict_probs(m, data);
    if (mean.empty()) mean.assign(p.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) mean[j] += p[j];
  }
  for (double& v : mean) v /= static_cast<double>(members.size());
  return mean;
}

std::vector<BRLinearModel> fit_members(const ExperimentConfig& cfg, const MultiLabelDataset& train,
                                       std::span<const std::size_t> labeled, std::uint64_t seed,
                                       std::size_t round) {
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(seed, Stream::Ensemble, round);
  return train_ensemble(train, labeled, tc, cfg.ensemble_size);
}

void write_number_array(std::ostream& out, std::span<const std::size_t> values) {
  out << '[';
  for (std::size_t j = 0; j < values.size(); ++j) out << (j ? "," : "") << values[j];
  out << ']';
}

}  // namespace

LearningCurve run_seed(const ExperimentConfig& cfg, const MultiLabelDataset& train, const MultiLabelDataset& test,
                       std::uint64_t seed, std::ostream* sink) {
  cfg.validate();
  if (cfg.initial_labeled + cfg.validation_size > train.size()) {
    throw std::invalid_argument("config: initial_labeled + validation_size exceeds the training pool");
  }
  using Clock = std::chrono::steady_clock;

  LearningCurve curve;
  curve.strategy = cfg.strategy.name();
  curve.seed = seed;

  Rng init_rng(derive_seed(seed, Stream::InitialPool));
  const auto draw = init_rng.sample(train.size(), cfg.validation_size + cfg.initial_labeled);
  std::vector<std::size_t> labeled(draw.begin() + static_cast<std::ptrdiff_t>(cfg.validation_size), draw.end());
  std::vector<char> in_pool(train.size(), 1);
  for (std::size_t r : draw) in_pool[r] = 0;
  std::vector<std::size_t> unlabeled;
  for (std::size_t r = 0; r < train.size(); ++r) {
    if (in_pool[r]) unlabeled.push_back(r);
  }
  curve.initial = labeled;
  if (sink) {
    *sink << "{\"event\":\"start\",\"strategy\":\"" << curve.strategy << "\",\"seed\":" << seed
          << ",\"initial\":";
    write_number_array(*sink, curve.initial);
    *sink << "}\n";
  }

  std::vector<std::size_t> all_rows(train.size());
  for (std::size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = r;

  auto members = fit_members(cfg, train, labeled, seed, 0);
  for (std::size_t i = 0; i < cfg.iterations; ++i) {
    if (unlabeled.size() < cfg.batch_size) {
      curve.stopped_early = true;
      curve.unlabeled_at_stop = unlabeled.size();
      break;
    }
    const auto start = Clock::now();
    const EnsembleProbs probs = ensemble_probs(members, train, all_rows);
    const auto weights = EnsembleWeights::uniform(members.size());

    BatchSelection batch;
    switch (cfg.strategy.kind) {
      case StrategyKind::Besra: {
        const auto pool = sample_estimation_pool(unlabeled, cfg.estimation_pool_size,
                                                 derive_seed(seed, Stream::EstimationPool, i));
        const auto scored = score_pool(unlabeled, pool, probs, weights, cfg.strategy.params, cfg.threads);
        batch = select_batch(scored, cfg.batch_size, derive_seed(seed, Stream::KMeans, i));
        break;
      }
      case StrategyKind::Random:
        batch = random_acquire(unlabeled, cfg.batch_size, derive_seed(seed, Stream::RandomAcquire, i));
        break;
      case StrategyKind::Uncertainty:
        batch = uncertainty_acquire(unlabeled, probs, weights, cfg.batch_size);
        break;
    }

    // Simulated annotator: acquired rows join L with their ground-truth labels.
    const std::set<std::size_t> acquired(batch.indices.begin(), batch.indices.end());
    labeled.insert(labeled.end(), batch.indices.begin(), batch.indices.end());
    std::erase_if(unlabeled, [&](std::size_t r) { return acquired.count(r) > 0; });

    members = fit_members(cfg, train, labeled, seed, i + 1);
    IterationRecord record;
    record.iteration = i + 1;
    record.labeled = labeled.size();
    record.metrics = evaluate(ensemble_mean(members, test), test.labels, cfg.threshold);
    record.acquired = batch.indices;
    record.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    curve.records.push_back(record);
    if (sink) {
      write_record(*sink, curve, record, cfg.record_timing);
      sink->flush();
    }
  }
  if (sink && curve.stopped_early) {
    *sink << "{\"event\":\"early_stop\",\"strategy\":\"" << curve.strategy << "\",\"seed\":" << seed
          << ",\"unlabeled\":" << curve.unlabeled_at_stop << "}\n";
    sink->flush();
  }
  return curve;
}

std::string curve_file_name(const std::string& strategy, std::uint64_t seed) {
  return "curve_" + strategy + "_seed" + std::to_string(seed) + ".jsonl";
}

std::vector<LearningCurve> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto data = resolve_dataset(cfg.dataset);
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);
  std::vector<LearningCurve> curves;
  for (std::uint64_t seed : cfg.seeds) {
    if (cfg.output_dir.empty()) {
      curves.push_back(run_seed(cfg, data.train, data.test, seed));
      continue;
    }
    const auto path = cfg.output_dir / curve_file_name(cfg.strategy.name(), seed);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    curves.push_back(run_seed(cfg, data.train, data.test, seed, &out));
  }
  return curves;
}

std::vector<LearningCurve> run_study(std::span<const ExperimentConfig> configs) {
  std::vector<LearningCurve> curves;
  std::set<std::filesystem::path> dirs;
  for (const auto& cfg : configs) {
    auto part = run_experiment(cfg);
    curves.insert(curves.end(), part.begin(), part.end());
    if (!cfg.output_dir.empty()) dirs.insert(cfg.output_dir);
  }
  for (const auto& dir : dirs) {
    const auto on_disk = load_curves(dir);
    bool enough = !on_disk.empty();
    for (const auto& [name, group] : group_by_strategy(on_disk)) enough = enough && group.size() >= 2;
    if (!enough) continue;
    std::ofstream out(dir / "aggregate.csv", std::ios::binary);
    write_aggregate_csv(out, on_disk);
  }
  return curves;
}

void write_record(std::ostream& out, const LearningCurve& curve, const IterationRecord& record,
                  bool include_timing) {
  out << "{\"event\":\"iteration\",\"strategy\":\"" << curve.strategy << "\",\"seed\":" << curve.seed
      << ",\"iteration\":" << record.iteration << ",\"labeled\":" << record.labeled;
  for (std::string_view name : kMetricNames) {
    out << ",\"" << name << "\":" << format_double(metric_value(record.metrics, name));
  }
  if (include_timing) out << ",\"wall_seconds\":" << format_double(record.wall_seconds);
  out << ",\"acquired\":";
  write_number_array(out, record.acquired);
  out << "}\n";
}

void write_curve(std::ostream& out, const LearningCurve& curve, bool include_timing) {
  out << "{\"event\":\"start\",\"strategy\":\"" << curve.strategy << "\",\"seed\":" << curve.seed
      << ",\"initial\":";
  write_number_array(out, curve.initial);
  out << "}\n";
  for (const auto& rec : curve.records) write_record(out, curve, rec, include_timing);
  if (curve.stopped_early) {
    out << "{\"event\":\"early_stop\",\"strategy\":\"" << curve.strategy << "\",\"seed\":" << curve.seed
        << ",\"unlabeled\":" << curve.unlabeled_at_stop << "}\n";
  }
}

LearningCurve read_curve(std::istream& in) {
  using nlohmann::json;
  LearningCurve curve;
  std::string line;
  std::size_t lineno = 0;
  bool started = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const auto event = j.at("event").get<std::string>();
      if (event == "start") {
        curve.strategy = j.at("strategy").get<std::string>();
        curve.seed = j.at("seed").get<std::uint64_t>();
        curve.initial = j.at("initial").get<std::vector<std::size_t>>();
        started = true;
      } else if (!started) {
        throw ParseError("record before start line", lineno);
      } else if (event == "iteration") {
        IterationRecord rec;
        rec.iteration = j.at("iteration").get<std::size_t>();
        rec.labeled = j.at("labeled").get<std::size_t>();
        auto& m = rec.metrics;
        m.micro_f1 = j.at("micro_f1").get<double>();
        m.macro_f1 = j.at("macro_f1").get<double>();
        m.precision = j.at("precision").get<double>();
        m.recall = j.at("recall").get<double>();
        m.precision_at_5 = j.at("precision_at_5").get<double>();
        m.recall_at_5 = j.at("recall_at_5").get<double>();
        if (j.contains("wall_seconds")) rec.wall_seconds = j.at("wall_seconds").get<double>();
        rec.acquired = j.at("acquired").get<std::vector<std::size_t>>();
        curve.records.push_back(std::move(rec));
      } else if (event == "early_stop") {
        curve.stopped_early = true;
        curve.unlabeled_at_stop = j.at("unlabeled").get<std::size_t>();
      } else {
        throw ParseError("unknown event '" + event + "'", lineno);
      }
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!started) throw ParseError("curve file has no start line", lineno + 1);
  return curve;
}

std::vector<LearningCurve> load_curves(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("curve_") && name.ends_with(".jsonl")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<LearningCurve> curves;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    try {
      curves.push_back(read_curve(in));
    } catch (const ParseError& e) {
      throw std::runtime_error(f.string() + ": " + e.what());
    }
  }
  return curves;
}

namespace {

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapBand bootstrap_mean_band(std::span<const double> values, std::size_t resamples, std::uint64_t seed,
                                  double level) {
  if (values.empty()) throw std::invalid_argument("bootstrap: no values");
  if (resamples == 0) throw std::invalid_argument("bootstrap: resamples must be positive");
  const double n = static_cast<double>(values.size());
  BootstrapBand band;
  for (double v : values) band.mean += v;
  band.mean /= n;
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double total = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) total += values[rng.below(values.size())];
    m = total / n;
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  band.lower = percentile(means, tail);
  band.upper = percentile(means, 1.0 - tail);
  return band;
}

std::vector<BandPoint> aggregate(std::span<const LearningCurve> curves, std::string_view metric,
                                 const AggregateOptions& options) {
  if (curves.size() < 2) throw std::invalid_argument("aggregate: at least two curves required");
  const std::size_t checkpoints = curves.front().records.size();
  for (const auto& c : curves) {
    if (c.records.size() != checkpoints) throw std::invalid_argument("aggregate: curves have different lengths");
    for (std::size_t t = 0; t < checkpoints; ++t) {
      if (c.records[t].labeled != curves.front().records[t].labeled) {
        throw std::invalid_argument("aggregate: checkpoints are not aligned");
      }
    }
  }
  std::vector<BandPoint> out;
  std::vector<double> values(curves.size());
  for (std::size_t t = 0; t < checkpoints; ++t) {
    for (std::size_t c = 0; c < curves.size(); ++c) values[c] = metric_value(curves[c].records[t].metrics, metric);
    const auto band =
        bootstrap_mean_band(values, options.resamples, derive_seed(options.seed, Stream::Bootstrap, t));
    out.push_back({curves.front().records[t].labeled, band.mean, band.lower, band.upper});
  }
  return out;
}

std::map<std::string, std::vector<LearningCurve>> group_by_strategy(std::span<const LearningCurve> curves) {
  std::map<std::string, std::vector<LearningCurve>> groups;
  for (const auto& c : curves) groups[c.strategy].push_back(c);
  for (auto& [name, group] : groups) {
    std::sort(group.begin(), group.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  }
  return groups;
}

void write_aggregate_csv(std::ostream& out, std::span<const LearningCurve> curves, const AggregateOptions& options) {
  out << "strategy,metric,labeled,mean,lower,upper,seeds\n";
  for (const auto& [name, group] : group_by_strategy(curves)) {
    for (std::string_view metric : kMetricNames) {
      for (const auto& p : aggregate(group, metric, options)) {
        out << name << ',' << metric << ',' << p.labeled << ',' << format_double(p.mean) << ','
            << format_double(p.lower) << ',' << format_double(p.upper) << ',' << group.size() << '\n';
      }
    }
  }
}

void write_plot_csv(std::ostream& out, std::span<const LearningCurve> curves, std::string_view metric,
                    const AggregateOptions& options) {
  metric_value(MetricsReport{}, metric);  // rejects unknown names before any output
  out << kPlotCsvHeader << '\n';
  for (const auto& [name, group] : group_by_strategy(curves)) {
    for (const auto& p : aggregate(group, metric, options)) {
      out << name << ',' << p.labeled << ',' << format_double(p.mean) << ',' << format_double(p.lower) << ','
          << format_double(p.upper) << '\n';
    }
  }
}

std::size_t validate_plot_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kPlotCsvHeader) {
    throw ParseError("expected header '" + std::string(kPlotCsvHeader) + "'", 1);
  }
  std::map<std::string, std::size_t> last_labeled;
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 5) throw ParseError("expected 5 fields", lineno);
    if (fields[0].empty()) throw ParseError("empty strategy name", lineno);
    std::size_t labeled = 0;
    double mean = 0, lower = 0, upper = 0;
    try {
      std::size_t used = 0;
      labeled = std::stoul(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument(fields[1]);
      mean = std::stod(fields[2]);
      lower = std::stod(fields[3]);
      upper = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw ParseError("non-numeric field", lineno);
    }
    if (!(lower <= mean + 1e-12 && mean <= upper + 1e-12)) throw ParseError("band does not contain the mean", lineno);
    if (!(lower >= 0.0 && upper <= 1.0)) throw ParseError("metric outside [0,1]", lineno);
    auto it = last_labeled.find(fields[0]);
    if (it != last_labeled.end() && labeled <= it->second) throw ParseError("labeled counts must increase", lineno);
    last_labeled[fields[0]] = labeled;
    ++rows;
  }
  return rows;
}

}  // namespace besra

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "besra/cli.hpp"
#include "besra/errors.hpp"
#include "besra/harness.hpp"
#include "besra/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace besra;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.labels = 4;
  s.n_train = 200;
  s.n_test = 100;
  s.dim = 40;
  s.train_mean_ir = 4;
  s.test_mean_ir = 4;
  s.prototype_support = 4;
  s.background = 8;
  return s;
}

ExperimentConfig small_config(StrategyKind kind) {
  ExperimentConfig cfg;
  cfg.dataset.synthetic = small_spec();
  cfg.strategy.kind = kind;
  cfg.ensemble_size = 2;
  cfg.initial_labeled = 20;
  cfg.batch_size = 10;
  cfg.iterations = 2;
  cfg.estimation_pool_size = 30;
  cfg.seeds = {1, 2};
  cfg.train.epochs = 40;
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("besra_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "besra");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

LearningCurve flat_curve(const std::string& strategy, std::uint64_t seed, std::vector<double> micro) {
  LearningCurve c;
  c.strategy = strategy;
  c.seed = seed;
  for (std::size_t t = 0; t < micro.size(); ++t) {
    IterationRecord r;
    r.iteration = t + 1;
    r.labeled = 100 * (t + 2);
    r.metrics.micro_f1 = micro[t];
    c.records.push_back(r);
  }
  return c;
}

}  // namespace

TEST_CASE("strategy names") {
  Strategy s;
  CHECK(s.name() == "besra_a0.1_b3");
  s.params = {1, 1};
  CHECK(s.name() == "besra_a1_b1");
  s.kind = StrategyKind::Random;
  CHECK(s.name() == "random");
  CHECK(parse_strategy_kind("uncertainty") == StrategyKind::Uncertainty);
  CHECK_THROWS_AS(parse_strategy_kind("bald"), std::invalid_argument);
}

TEST_CASE("config validation") {
  auto cfg = small_config(StrategyKind::Random);
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.ensemble_size = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.initial_labeled = 201;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.seeds = {3, 3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.strategy = Strategy{StrategyKind::Besra, {-0.5, 1}, ""};
  CHECK_THROWS_AS(bad.validate(), NotImplementedError);
}

TEST_CASE("one random iteration") {
  auto cfg = small_config(StrategyKind::Random);
  cfg.iterations = 1;
  const auto data = resolve_dataset(cfg.dataset);
  const auto curve = run_seed(cfg, data.train, data.test, 7);
  REQUIRE(curve.records.size() == 1);
  CHECK(curve.records[0].labeled == cfg.initial_labeled + cfg.batch_size);
  CHECK(curve.records[0].acquired.size() == cfg.batch_size);
  CHECK_FALSE(curve.stopped_early);
}

TEST_CASE("labeled and unlabeled sets partition the pool") {
  for (auto kind : {StrategyKind::Besra, StrategyKind::Random, StrategyKind::Uncertainty}) {
    auto cfg = small_config(kind);
    cfg.iterations = 3;
    const auto data = resolve_dataset(cfg.dataset);
    const auto curve = run_seed(cfg, data.train, data.test, 3);
    std::set<std::size_t> labeled(curve.initial.begin(), curve.initial.end());
    CHECK(labeled.size() == cfg.initial_labeled);
    std::size_t expected = cfg.initial_labeled;
    for (const auto& r : curve.records) {
      for (auto i : r.acquired) {
        CHECK(i < data.train.size());
        CHECK(labeled.insert(i).second);
      }
      expected += cfg.batch_size;
      CHECK(r.labeled == expected);
      CHECK(labeled.size() == expected);
    }
  }
}

TEST_CASE("validation rows are never labeled") {
  auto cfg = small_config(StrategyKind::Random);
  cfg.validation_size = 50;
  cfg.iterations = 15;
  const auto data = resolve_dataset(cfg.dataset);
  const auto curve = run_seed(cfg, data.train, data.test, 1);
  // 200 rows - 50 held out - 20 initial leaves 130 = 13 batches of 10.
  CHECK(curve.records.size() == 13);
  CHECK(curve.stopped_early);
  CHECK(curve.unlabeled_at_stop == 0);
}

TEST_CASE("exhausting the pool stops early") {
  auto cfg = small_config(StrategyKind::Uncertainty);
  cfg.initial_labeled = 150;
  cfg.batch_size = 30;
  cfg.iterations = 4;
  const auto data = resolve_dataset(cfg.dataset);
  const auto curve = run_seed(cfg, data.train, data.test, 1);
  CHECK(curve.records.size() == 1);
  CHECK(curve.stopped_early);
  CHECK(curve.unlabeled_at_stop == 20);
}

TEST_CASE("repeated runs write byte-identical directories") {
  std::vector<ExperimentConfig> configs{small_config(StrategyKind::Besra), small_config(StrategyKind::Random)};
  const auto a = scratch_dir("determinism_a"), b = scratch_dir("determinism_b");
  for (auto& c : configs) c.output_dir = a;
  run_study(configs);
  for (auto& c : configs) c.output_dir = b;
  run_study(configs);
  const auto left = directory_contents(a), right = directory_contents(b);
  CHECK(left.size() == 5);  // 2 strategies x 2 seeds + aggregate.csv
  CHECK(left.count("aggregate.csv") == 1);
  CHECK(left == right);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("curve files round trip") {
  auto cfg = small_config(StrategyKind::Besra);
  const auto data = resolve_dataset(cfg.dataset);
  std::stringstream streamed;
  const auto curve = run_seed(cfg, data.train, data.test, 5, &streamed);
  std::stringstream rewritten;
  write_curve(rewritten, curve);
  CHECK(streamed.str() == rewritten.str());
  const auto back = read_curve(streamed);
  CHECK(back.strategy == curve.strategy);
  CHECK(back.initial == curve.initial);
  REQUIRE(back.records.size() == curve.records.size());
  for (std::size_t t = 0; t < back.records.size(); ++t) {
    CHECK(back.records[t].acquired == curve.records[t].acquired);
    CHECK(back.records[t].metrics.macro_f1 == curve.records[t].metrics.macro_f1);
  }

  std::istringstream bad("{\"event\":\"iteration\"}\n");
  CHECK_THROWS_AS(read_curve(bad), ParseError);
  std::istringstream garbage("{\"event\":\"start\",\"strategy\":\"x\",\"seed\":1,\"initial\":[]}\nnot json\n");
  try {
    read_curve(garbage);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("bootstrap band examples") {
  const std::vector<double> same(5, 0.7);
  const auto flat = bootstrap_mean_band(same, 10000, 1);
  CHECK(flat.mean == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(flat.lower == flat.upper);

  const std::vector<double> two{0.4, 0.6};
  CHECK(bootstrap_mean_band(two, 10000, 1).mean == doctest::Approx(0.5).epsilon(1e-15));

  const std::vector<LearningCurve> curves{flat_curve("s", 1, {0.3, 0.5}), flat_curve("s", 2, {0.3, 0.5})};
  for (const auto& p : aggregate(curves, "micro_f1")) CHECK(p.lower == p.upper);
}

TEST_CASE("bootstrap matches exact enumeration") {
  Rng rng(17);
  // Five replicate curves at one checkpoint, spread like learning-curve metrics.
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> values(5);
    for (double& v : values) v = rng.uniform(0.7, 0.9);
    const auto band = bootstrap_mean_band(values, 10000, derive_seed(3, Stream::Bootstrap, trial));
    const auto exact = oracle::exact_bootstrap_band(values);
    CHECK(band.lower <= band.mean);
    CHECK(band.mean <= band.upper);
    CHECK(std::abs(band.lower - exact.lower) <= 0.005);
    CHECK(std::abs(band.upper - exact.upper) <= 0.005);
  }
  // Values over all of [0, 1]: mean error across trials.
  double total_error = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values(5);
    for (double& v : values) v = rng.uniform();
    const auto band = bootstrap_mean_band(values, 10000, derive_seed(4, Stream::Bootstrap, trial));
    const auto exact = oracle::exact_bootstrap_band(values);
    total_error += std::abs(band.lower - exact.lower) + std::abs(band.upper - exact.upper);
  }
  CHECK(total_error / 100.0 <= 0.005);
}

TEST_CASE("aggregate rejects unusable input") {
  const auto a = flat_curve("s", 1, {0.1, 0.2});
  const std::vector<LearningCurve> one{a};
  CHECK_THROWS_AS(aggregate(one, "micro_f1"), std::invalid_argument);
  auto shifted = flat_curve("s", 2, {0.1, 0.2});
  shifted.records[1].labeled += 1;
  const std::vector<LearningCurve> misaligned{a, shifted};
  CHECK_THROWS_AS(aggregate(misaligned, "micro_f1"), std::invalid_argument);
  const std::vector<LearningCurve> short_one{a, flat_curve("s", 2, {0.1})};
  CHECK_THROWS_AS(aggregate(short_one, "micro_f1"), std::invalid_argument);
}

TEST_CASE("plot csv validation") {
  std::istringstream good(std::string(kPlotCsvHeader) + "\nrandom,200,0.5,0.4,0.6\nrandom,300,0.6,0.6,0.6\n");
  CHECK(validate_plot_csv(good) == 2);
  const auto fails_at = [](const std::string& body) {
    std::istringstream in(std::string(kPlotCsvHeader) + "\n" + body);
    try {
      validate_plot_csv(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(fails_at("random,200,0.5,0.6,0.7\n") == 2);
  CHECK(fails_at("random,200,0.5,0.4,0.6\nrandom,200,0.5,0.4,0.6\n") == 3);
  CHECK(fails_at("random,200,0.5,0.4\n") == 2);
  CHECK(fails_at("random,2x,0.5,0.4,0.6\n") == 2);
  std::istringstream no_header("random,200,0.5,0.4,0.6\n");
  CHECK_THROWS_AS(validate_plot_csv(no_header), ParseError);
}

TEST_CASE("export-plot reproduces the checked-in fixture") {
  const fs::path fixtures(BESRA_FIXTURES);
  const auto out = scratch_dir("plot") / "plot.csv";
  CHECK(cli({"export-plot", (fixtures / "curves").string(), "--metric", "micro_f1", "--out", out.string()}) == 0);
  CHECK(slurp(out) == slurp(fixtures / "plot_micro_f1.csv"));
  std::ifstream in(out);
  CHECK(validate_plot_csv(in) == 4);
  fs::remove_all(out.parent_path());
}

TEST_CASE("config files") {
  const auto configs = parse_config(R"({
    "dataset": {"train": "a.txt", "test": "/abs/b.txt"},
    "strategies": ["random", {"kind": "besra", "alpha": 1, "beta": 1}],
    "batch_size": 50, "iterations": 10, "seeds": [4, 5], "train": {"epochs": 30}
  })",
                                     "/base");
  REQUIRE(configs.size() == 2);
  CHECK(configs[0].strategy.name() == "random");
  CHECK(configs[1].strategy.name() == "besra_a1_b1");
  CHECK(configs[1].dataset.train_path == fs::path("/base/a.txt"));
  CHECK(configs[1].dataset.test_path == fs::path("/abs/b.txt"));
  CHECK(configs[0].batch_size == 50);
  CHECK(configs[0].train.epochs == 30);
  CHECK(configs[0].seeds == std::vector<std::uint64_t>{4, 5});

  CHECK_THROWS_AS(parse_config(R"({"dataset": {"synthetic": {}}, "batch": 5})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"dataset": {"synthetic": {"labelz": 3}}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"dataset": {"synthetic": {}}, "batch_size": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"dataset": {"synthetic": {}}, "strategies": ["random", "random"]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{not json"), std::invalid_argument);
  CHECK(parse_synthetic_spec(R"({"train_mean_ir": 200})").train_mean_ir == 200.0);
}

TEST_CASE("cli exit codes") {
  CHECK(cli({}) == 2);
  CHECK(cli({"frobnicate"}) == 2);
  CHECK(cli({"run", "--bogus"}) == 2);
  CHECK(cli({"run", "--config", "/nonexistent/config.json"}) == 2);
  CHECK(cli({"--help"}) == 0);
  CHECK(cli({"export-plot", BESRA_FIXTURES, "--metric", "accuracy"}) == 2);

  const auto dir = scratch_dir("cli");
  CHECK(cli({"export-plot", dir.string()}) == 1);  // no curve files
  fs::remove_all(dir);
}

TEST_CASE("cli gen-data writes the default 1200/600 split") {
  const auto dir = scratch_dir("gen");
  CHECK(cli({"gen-data", "--out", dir.string(), "--seed", "4", "--train-mean-ir", "200"}) == 0);
  const auto train = load_dataset(dir / "train.txt");
  const auto test = load_dataset(dir / "test.txt");
  CHECK(train.size() == 1200);
  CHECK(test.size() == 600);
  CHECK(train.split == Split::Train);
  CHECK(test.split == Split::Test);
  CHECK(std::abs(mean_ir(train.labels).mean_ir - 200.0) <= 10.0);
  fs::remove_all(dir);
}

TEST_CASE("cli run and aggregate") {
  const auto dir = scratch_dir("run");
  const auto data = generate_synthetic(small_spec());
  save_dataset(data.train, dir / "train.txt");
  save_dataset(data.test, dir / "test.txt");
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"dataset": {"train": "train.txt", "test": "test.txt"}, "strategy": "random",
               "initial_labeled": 20, "batch_size": 10, "iterations": 1, "ensemble_size": 2,
               "seeds": [1, 2], "train": {"epochs": 20}})";
  }
  const auto out = dir / "out";
  CHECK(cli({"run", "--config", (dir / "config.json").string(), "--out", out.string()}) == 0);
  CHECK(fs::exists(out / "curve_random_seed1.jsonl"));
  CHECK(fs::exists(out / "curve_random_seed2.jsonl"));
  CHECK(fs::exists(out / "aggregate.csv"));
  const auto first = slurp(out / "aggregate.csv");
  CHECK(cli({"aggregate", out.string()}) == 0);
  CHECK(slurp(out / "aggregate.csv") == first);
  CHECK(cli({"run", "--config", (dir / "config.json").string(), "--out", (dir / "single").string(), "--seed", "9"}) ==
        0);
  CHECK(fs::exists(dir / "single" / "curve_random_seed9.jsonl"));
  CHECK_FALSE(fs::exists(dir / "single" / "aggregate.csv"));
  fs::remove_all(dir);
}

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "besra/harness.hpp"
#include "json.hpp"

namespace besra {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_if(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config: bad value for '") + key + "'");
  }
}

SyntheticSpec synthetic_from_json(const json& j) {
  reject_unknown(j,
                 {"labels", "n_train", "n_test", "dim", "train_mean_ir", "test_mean_ir", "top_label_fraction",
                  "prototype_support", "noise", "background", "feature_norm", "seed"},
                 "synthetic");
  SyntheticSpec s;
  read_if(j, "labels", s.labels);
  read_if(j, "n_train", s.n_train);
  read_if(j, "n_test", s.n_test);
  read_if(j, "dim", s.dim);
  read_if(j, "train_mean_ir", s.train_mean_ir);
  read_if(j, "test_mean_ir", s.test_mean_ir);
  read_if(j, "top_label_fraction", s.top_label_fraction);
  read_if(j, "prototype_support", s.prototype_support);
  read_if(j, "noise", s.noise);
  read_if(j, "background", s.background);
  read_if(j, "feature_norm", s.feature_norm);
  read_if(j, "seed", s.seed);
  return s;
}

Strategy strategy_from_json(const json& j) {
  Strategy s;
  if (j.is_string()) {
    s.kind = parse_strategy_kind(j.get<std::string>());
    return s;
  }
  reject_unknown(j, {"kind", "alpha", "beta", "label"}, "strategy");
  if (!j.contains("kind")) throw std::invalid_argument("config: strategy needs a 'kind'");
  s.kind = parse_strategy_kind(j.at("kind").get<std::string>());
  double alpha = s.params.alpha, beta = s.params.beta;
  read_if(j, "alpha", alpha);
  read_if(j, "beta", beta);
  if (s.kind != StrategyKind::Besra && (j.contains("alpha") || j.contains("beta"))) {
    throw std::invalid_argument("config: alpha/beta only apply to the besra strategy");
  }
  s.params = ScoreParams{alpha, beta};
  read_if(j, "label", s.label);
  return s;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return synthetic_from_json(j);
}

std::vector<ExperimentConfig> parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  reject_unknown(j,
                 {"dataset", "strategy", "strategies", "ensemble_size", "initial_labeled", "validation_size",
                  "batch_size", "iterations", "estimation_pool_size", "seeds", "output_dir", "train", "threshold",
                  "threads", "record_timing"},
                 "config");

  ExperimentConfig base;
  if (!j.contains("dataset")) throw std::invalid_argument("config: missing 'dataset'");
  const json& ds = j.at("dataset");
  reject_unknown(ds, {"synthetic", "train", "test"}, "dataset");
  if (ds.contains("synthetic")) {
    if (ds.contains("train") || ds.contains("test")) {
      throw std::invalid_argument("config: dataset is either synthetic or a train/test pair");
    }
    base.dataset.synthetic = synthetic_from_json(ds.at("synthetic"));
  } else {
    std::string train, test;
    read_if(ds, "train", train);
    read_if(ds, "test", test);
    if (train.empty() || test.empty()) throw std::invalid_argument("config: dataset needs 'train' and 'test'");
    const auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : base_dir / p; };
    base.dataset.train_path = resolve(train);
    base.dataset.test_path = resolve(test);
  }

  read_if(j, "ensemble_size", base.ensemble_size);
  read_if(j, "initial_labeled", base.initial_labeled);
  read_if(j, "validation_size", base.validation_size);
  read_if(j, "batch_size", base.batch_size);
  read_if(j, "iterations", base.iterations);
  read_if(j, "estimation_pool_size", base.estimation_pool_size);
  read_if(j, "seeds", base.seeds);
  read_if(j, "threshold", base.threshold);
  read_if(j, "threads", base.threads);
  read_if(j, "record_timing", base.record_timing);
  std::string out;
  read_if(j, "output_dir", out);
  base.output_dir = out;
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"learning_rate", "epochs", "l2"}, "train");
    read_if(t, "learning_rate", base.train.learning_rate);
    read_if(t, "epochs", base.train.epochs);
    read_if(t, "l2", base.train.l2);
  }

  std::vector<Strategy> strategies;
  if (j.contains("strategy") && j.contains("strategies")) {
    throw std::invalid_argument("config: give 'strategy' or 'strategies', not both");
  }
  if (j.contains("strategies")) {
    if (!j.at("strategies").is_array() || j.at("strategies").empty()) {
      throw std::invalid_argument("config: 'strategies' must be a non-empty array");
    }
    for (const auto& s : j.at("strategies")) strategies.push_back(strategy_from_json(s));
  } else if (j.contains("strategy")) {
    strategies.push_back(strategy_from_json(j.at("strategy")));
  } else {
    strategies.emplace_back();
  }

  std::set<std::string> names;
  std::vector<ExperimentConfig> configs;
  for (const auto& s : strategies) {
    if (!names.insert(s.name()).second) throw std::invalid_argument("config: duplicate strategy '" + s.name() + "'");
    ExperimentConfig cfg = base;
    cfg.strategy = s;
    cfg.validate();
    configs.push_back(std::move(cfg));
  }
  return configs;
}

std::vector<ExperimentConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace besra

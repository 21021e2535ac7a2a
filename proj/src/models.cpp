#include "besra/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "besra/errors.hpp"
#include "besra/rng.hpp"

namespace besra {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
  if (!(l2 >= 0.0)) throw std::invalid_argument("TrainConfig: l2 must be >= 0");
}

BRLinearModel::BRLinearModel(std::size_t labels, std::size_t dim)
    : labels_(labels), dim_(dim), weights_(labels * dim, 0.0), biases_(labels, 0.0) {
  if (labels == 0 || dim == 0) throw std::invalid_argument("BRLinearModel: empty shape");
}

std::vector<double> BRLinearModel::parameters() const {
  std::vector<double> out(weights_);
  out.insert(out.end(), biases_.begin(), biases_.end());
  return out;
}

void BRLinearModel::set_parameters(std::span<const double> values) {
  if (values.size() != weights_.size() + biases_.size()) {
    throw std::invalid_argument("BRLinearModel: parameter count mismatch");
  }
  std::copy_n(values.begin(), weights_.size(), weights_.begin());
  std::copy(values.begin() + static_cast<std::ptrdiff_t>(weights_.size()), values.end(), biases_.begin());
}

double BRLinearModel::logit(const SparseVector& x, std::size_t k) const {
  const double* w = weights_.data() + k * dim_;
  double z = biases_[k];
  for (const auto& f : x) z += w[f.index] * f.value;
  return z;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

void check_rows(const BRLinearModel& model, const MultiLabelDataset& data, std::span<const std::size_t> rows) {
  if (model.dim() != data.dim) throw std::invalid_argument("feature dimension mismatch");
  if (model.labels() != data.num_labels()) throw std::invalid_argument("label count mismatch");
  for (std::size_t r : rows) {
    if (r >= data.size()) throw std::out_of_range("row index out of range");
  }
}

double weight_penalty(const BRLinearModel& model, double l2) {
  if (l2 == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < model.labels(); ++k) {
    for (double w : model.weights(k)) total += w * w;
  }
  return 0.5 * l2 * total;
}

std::vector<std::size_t> all_rows(const MultiLabelDataset& data) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

BRLinearModel initialize_model(std::size_t labels, std::size_t dim, std::uint64_t seed) {
  BRLinearModel model(labels, dim);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t k = 0; k < labels; ++k) {
    for (double& w : model.weights(k)) w = rng.uniform(-scale, scale);
  }
  return model;
}

double objective(const BRLinearModel& model, const MultiLabelDataset& data, std::span<const std::size_t> rows,
                 double l2) {
  check_rows(model, data, rows);
  if (rows.empty()) throw std::invalid_argument("objective: no rows");
  double total = 0.0;
  for (std::size_t r : rows) {
    for (std::size_t k = 0; k < model.labels(); ++k) {
      const double z = model.logit(data.features[r], k);
      total += softplus(z) - (data.labels.at(r, k) ? z : 0.0);
    }
  }
  return total / static_cast<double>(rows.size()) + weight_penalty(model, l2);
}

std::vector<double> objective_gradient(const BRLinearModel& model, const MultiLabelDataset& data,
                                       std::span<const std::size_t> rows, double l2,
                                       std::span<const std::size_t> order) {
  check_rows(model, data, rows);
  if (rows.empty()) throw std::invalid_argument("objective_gradient: no rows");
  if (!order.empty() && order.size() != rows.size()) throw std::invalid_argument("objective_gradient: bad order");
  const std::size_t labels = model.labels();
  const std::size_t dim = model.dim();
  std::vector<double> grad(labels * dim + labels, 0.0);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const std::size_t r = order.empty() ? rows[j] : rows[order[j]];
    const auto& x = data.features[r];
    for (std::size_t k = 0; k < labels; ++k) {
      const double residual = (sigmoid(model.logit(x, k)) - data.labels.at(r, k)) * inv_n;
      double* gw = grad.data() + k * dim;
      for (const auto& f : x) gw[f.index] += residual * f.value;
      grad[labels * dim + k] += residual;
    }
  }
  if (l2 != 0.0) {
    for (std::size_t k = 0; k < labels; ++k) {
      const auto w = model.weights(k);
      for (std::size_t d = 0; d < dim; ++d) grad[k * dim + d] += l2 * w[d];
    }
  }
  return grad;
}

TrainResult train_with_history(const MultiLabelDataset& data, std::span<const std::size_t> rows,
                               const TrainConfig& cfg) {
  cfg.validate();
  if (rows.empty()) throw std::invalid_argument("train: empty labeled set");
  TrainResult result{initialize_model(data.num_labels(), data.dim, derive_seed(cfg.seed, Stream::Ensemble)), {}};
  auto& model = result.model;
  check_rows(model, data, rows);

  Rng shuffle_rng(derive_seed(cfg.seed, Stream::Shuffle));
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double loss = objective(model, data, rows, cfg.l2);
  result.loss_history.push_back(loss);
  double rate = cfg.learning_rate;
  BRLinearModel candidate = model;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    const auto grad = objective_gradient(model, data, rows, cfg.l2, order);
    const auto params = model.parameters();
    std::vector<double> next(params.size());
    bool accepted = false;
    for (int halving = 0; halving < 60 && !accepted; ++halving) {
      for (std::size_t j = 0; j < params.size(); ++j) next[j] = params[j] - rate * grad[j];
      candidate.set_parameters(next);
      const double trial = objective(candidate, data, rows, cfg.l2);
      if (trial <= loss) {
        model = candidate;
        loss = trial;
        accepted = true;
      } else {
        rate *= 0.5;
      }
    }
    result.loss_history.push_back(loss);
    if (!accepted) break;
  }
  return result;
}

BRLinearModel train(const MultiLabelDataset& data, std::span<const std::size_t> rows, const TrainConfig& cfg) {
  return train_with_history(data, rows, cfg).model;
}

BRLinearModel train(const MultiLabelDataset& data, const TrainConfig& cfg) {
  const auto rows = all_rows(data);
  return train(data, rows, cfg);
}

std::vector<double> predict_probs(const BRLinearModel& model, const MultiLabelDataset& data,
                                  std::span<const std::size_t> rows) {
  check_rows(model, data, rows);
  constexpr double kLow = std::numeric_limits<double>::min();
  const double high = std::nextafter(1.0, 0.0);
  std::vector<double> out(rows.size() * model.labels());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t k = 0; k < model.labels(); ++k) {
      out[j * model.labels() + k] = std::clamp(sigmoid(model.logit(data.features[rows[j]], k)), kLow, high);
    }
  }
  return out;
}

std::vector<double> predict_probs(const BRLinearModel& model, const MultiLabelDataset& data) {
  const auto rows = all_rows(data);
  return predict_probs(model, data, rows);
}

std::vector<BRLinearModel> train_ensemble(const MultiLabelDataset& data, std::span<const std::size_t> rows,
                                          const TrainConfig& cfg, std::size_t members) {
  std::vector<std::uint64_t> seeds(members);
  for (std::size_t e = 0; e < members; ++e) seeds[e] = derive_seed(cfg.seed, Stream::Ensemble, e + 1);
  return train_ensemble(data, rows, cfg, seeds);
}

std::vector<BRLinearModel> train_ensemble(const MultiLabelDataset& data, std::span<const std::size_t> rows,
                                          const TrainConfig& cfg, std::span<const std::uint64_t> member_seeds) {
  if (member_seeds.size() < 2) throw std::invalid_argument("train_ensemble: at least two members required");
  std::vector<BRLinearModel> members;
  members.reserve(member_seeds.size());
  for (std::uint64_t seed : member_seeds) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = seed;
    members.push_back(train(data, rows, member_cfg));
  }
  return members;
}

EnsembleProbs ensemble_probs(std::span<const BRLinearModel> members, const MultiLabelDataset& data,
                             std::span<const std::size_t> rows) {
  std::vector<std::vector<double>> tables;
  tables.reserve(members.size());
  for (const auto& m : members) tables.push_back(predict_probs(m, data, rows));
  return EnsembleProbs(tables, rows.size(), data.num_labels());
}

void write_model(std::ostream& out, const BRLinearModel& model) {
  out << "besra-model 1\n" << model.labels() << ' ' << model.dim() << '\n';
  out << 'b';
  for (std::size_t k = 0; k < model.labels(); ++k) out << ' ' << format_double(model.bias(k));
  out << '\n';
  for (std::size_t k = 0; k < model.labels(); ++k) {
    out << 'w';
    for (double w : model.weights(k)) out << ' ' << format_double(w);
    out << '\n';
  }
}

BRLinearModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "besra-model 1") throw ParseError("expected 'besra-model 1'", 1);
  std::size_t labels = 0, dim = 0;
  if (!std::getline(in, line)) throw ParseError("missing shape line", 2);
  {
    std::istringstream shape(line);
    if (!(shape >> labels >> dim) || labels == 0 || dim == 0) throw ParseError("malformed shape line", 2);
  }
  BRLinearModel model(labels, dim);
  const auto read_row = [&](std::size_t lineno, char tag, std::span<double> dest) {
    if (!std::getline(in, line)) throw ParseError("missing row", lineno);
    std::istringstream row(line);
    char t = 0;
    if (!(row >> t) || t != tag) throw ParseError(std::string("expected row tag '") + tag + "'", lineno);
    std::string token;
    for (double& v : dest) {
      if (!(row >> token)) throw ParseError("too few values", lineno);
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError("malformed value '" + token + "'", lineno);
      }
    }
    if (row >> token) throw ParseError("too many values", lineno);
  };
  std::vector<double> biases(labels);
  read_row(3, 'b', biases);
  for (std::size_t k = 0; k < labels; ++k) read_row(4 + k, 'w', model.weights(k));
  for (std::size_t k = 0; k < labels; ++k) model.bias(k) = biases[k];
  return model;
}

void save_model(const BRLinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_model(out, model);
}

BRLinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_model(in);
}

}  // namespace besra

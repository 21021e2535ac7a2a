#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "besra/data.hpp"
#include "besra/ensemble.hpp"

namespace besra {

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

// One logistic model per label: p(y_k = 1 | x) = sigmoid(w_k . x + b_k).
class BRLinearModel {
 public:
  BRLinearModel(std::size_t labels, std::size_t dim);

  std::size_t labels() const noexcept { return labels_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<double> weights(std::size_t k) { return {weights_.data() + k * dim_, dim_}; }
  std::span<const double> weights(std::size_t k) const { return {weights_.data() + k * dim_, dim_}; }
  double& bias(std::size_t k) { return biases_[k]; }
  double bias(std::size_t k) const { return biases_[k]; }

  // All parameters, weights (labels x dim) followed by biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  double logit(const SparseVector& x, std::size_t k) const;

  bool operator==(const BRLinearModel&) const = default;

 private:
  std::size_t labels_;
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<double> biases_;
};

double sigmoid(double z);

// Weights uniform in [-1/sqrt(D), 1/sqrt(D)], biases zero.
BRLinearModel initialize_model(std::size_t labels, std::size_t dim, std::uint64_t seed);

// Mean over the given rows of the summed per-label binary cross-entropy,
// plus (l2 / 2) ||W||^2 (biases are not penalized).
double objective(const BRLinearModel& model, const MultiLabelDataset& data, std::span<const std::size_t> rows,
                 double l2);

// Gradient of objective(), laid out like BRLinearModel::parameters().
// order, when nonempty, is the row accumulation order.
std::vector<double> objective_gradient(const BRLinearModel& model, const MultiLabelDataset& data,
                                       std::span<const std::size_t> rows, double l2,
                                       std::span<const std::size_t> order = {});

struct TrainResult {
  BRLinearModel model;
  std::vector<double> loss_history;  // objective before the first step, then after each epoch
};

// Full-batch gradient descent from a seeded initialization. A step that
// would raise the objective is halved until it does not, and the reduced
// rate is kept for later epochs. Throws std::invalid_argument for an empty
// row set.
TrainResult train_with_history(const MultiLabelDataset& data, std::span<const std::size_t> rows,
                               const TrainConfig& cfg);
BRLinearModel train(const MultiLabelDataset& data, std::span<const std::size_t> rows, const TrainConfig& cfg);
BRLinearModel train(const MultiLabelDataset& data, const TrainConfig& cfg);

// Row-major rows x labels table of P(y_k = 1 | x), strictly inside (0, 1).
std::vector<double> predict_probs(const BRLinearModel& model, const MultiLabelDataset& data,
                                  std::span<const std::size_t> rows);
std::vector<double> predict_probs(const BRLinearModel& model, const MultiLabelDataset& data);

// E members trained with seeds derived from cfg.seed; E must be >= 2.
std::vector<BRLinearModel> train_ensemble(const MultiLabelDataset& data, std::span<const std::size_t> rows,
                                          const TrainConfig& cfg, std::size_t members);
// Members trained with explicitly given seeds.
std::vector<BRLinearModel> train_ensemble(const MultiLabelDataset& data, std::span<const std::size_t> rows,
                                          const TrainConfig& cfg, std::span<const std::uint64_t> member_seeds);

EnsembleProbs ensemble_probs(std::span<const BRLinearModel> members, const MultiLabelDataset& data,
                             std::span<const std::size_t> rows);

// Checkpoint text format "besra-model 1", see docs/formats.md.
void write_model(std::ostream& out, const BRLinearModel& model);
BRLinearModel read_model(std::istream& in);
void save_model(const BRLinearModel& model, const std::filesystem::path& path);
BRLinearModel load_model(const std::filesystem::path& path);

}  // namespace besra

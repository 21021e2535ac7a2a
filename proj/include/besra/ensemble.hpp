#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace besra {

// P(y_k = 1 | theta_e, x_i) for every ensemble member e, instance i and
// label k. Stored instance-major so the E member probabilities of one
// (instance, label) cell are contiguous.
class EnsembleProbs {
 public:
  // member_tables[e] is an instances x labels row-major table.
  EnsembleProbs(const std::vector<std::vector<double>>& member_tables, std::size_t instances,
                std::size_t labels);

  std::size_t models() const noexcept { return models_; }
  std::size_t instances() const noexcept { return instances_; }
  std::size_t labels() const noexcept { return labels_; }

  double at(std::size_t model, std::size_t instance, std::size_t label) const {
    return values_[(instance * labels_ + label) * models_ + model];
  }

  // The E member probabilities for one instance and label.
  std::span<const double> cell(std::size_t instance, std::size_t label) const {
    return {values_.data() + (instance * labels_ + label) * models_, models_};
  }

 private:
  std::size_t models_;
  std::size_t instances_;
  std::size_t labels_;
  std::vector<double> values_;
};

// Posterior weight of each ensemble member; nonnegative, sums to one.
class EnsembleWeights {
 public:
  static EnsembleWeights uniform(std::size_t models);

  // Validates nonnegativity and normalization (within 1e-12).
  explicit EnsembleWeights(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> values() const noexcept { return weights_; }
  double operator[](std::size_t e) const { return weights_[e]; }

 private:
  std::vector<double> weights_;
};

// sum_e w_e p_e for one label.
double mixture(const EnsembleWeights& weights, std::span<const double> member_probs);

// Ensemble predictive P(y_k = 1 | L, x) for every label of one instance.
std::vector<double> predictive(const EnsembleWeights& weights, const EnsembleProbs& probs,
                               std::size_t instance);

// Member likelihoods of observing label value y for one label, given each
// member's P(y = 1). y = 0 uses 1 - p.
std::vector<double> label_likelihoods(std::span<const double> member_probs, int y);

// Bayesian reweighting w'_e = w_e l_e / sum w l. Throws
// DegenerateEvidenceError when the evidence sum is zero.
EnsembleWeights reweight(const EnsembleWeights& weights, std::span<const double> likelihoods);

// Predictive at x' after conditioning the ensemble on one hypothesized label.
double updated_predictive(const EnsembleWeights& weights, std::span<const double> member_probs_at_xprime,
                          std::span<const double> likelihoods);

}  // namespace besra

#include "besra/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#include "besra/errors.hpp"

namespace besra {

EnsembleProbs::EnsembleProbs(const std::vector<std::vector<double>>& member_tables,
                             std::size_t instances, std::size_t labels)
    : models_(member_tables.size()), instances_(instances), labels_(labels) {
  if (models_ < 2) throw std::invalid_argument("EnsembleProbs: at least two members required");
  if (labels_ == 0) throw std::invalid_argument("EnsembleProbs: no labels");
  values_.resize(models_ * instances_ * labels_);
  for (std::size_t e = 0; e < models_; ++e) {
    const auto& table = member_tables[e];
    if (table.size() != instances_ * labels_) {
      throw std::invalid_argument("EnsembleProbs: member table has wrong shape");
    }
    for (std::size_t cell = 0; cell < table.size(); ++cell) {
      const double p = table[cell];
      if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("EnsembleProbs: probability outside [0,1]");
      values_[cell * models_ + e] = p;
    }
  }
}

EnsembleWeights EnsembleWeights::uniform(std::size_t models) {
  if (models == 0) throw std::invalid_argument("EnsembleWeights: empty ensemble");
  return EnsembleWeights(std::vector<double>(models, 1.0 / static_cast<double>(models)));
}

EnsembleWeights::EnsembleWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("EnsembleWeights: empty ensemble");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::domain_error("EnsembleWeights: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::domain_error("EnsembleWeights: weights not normalized");
}

double mixture(const EnsembleWeights& weights, std::span<const double> member_probs) {
  if (member_probs.size() != weights.size()) throw std::invalid_argument("mixture: size mismatch");
  double total = 0.0;
  for (std::size_t e = 0; e < member_probs.size(); ++e) total += weights[e] * member_probs[e];
  return total;
}

std::vector<double> predictive(const EnsembleWeights& weights, const EnsembleProbs& probs,
                               std::size_t instance) {
  if (weights.size() != probs.models()) throw std::invalid_argument("predictive: ensemble size mismatch");
  if (instance >= probs.instances()) throw std::out_of_range("predictive: instance out of range");
  std::vector<double> out(probs.labels());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mixture(weights, probs.cell(instance, k));
  return out;
}

std::vector<double> label_likelihoods(std::span<const double> member_probs, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
  std::vector<double> out(member_probs.begin(), member_probs.end());
  if (y == 0) {
    for (double& p : out) p = 1.0 - p;
  }
  return out;
}

EnsembleWeights reweight(const EnsembleWeights& weights, std::span<const double> likelihoods) {
  if (likelihoods.size() != weights.size()) throw std::invalid_argument("reweight: size mismatch");
  std::vector<double> out(weights.size());
  double evidence = 0.0;
  for (std::size_t e = 0; e < out.size(); ++e) {
    const double l = likelihoods[e];
    if (!(l >= 0.0 && l <= 1.0)) throw std::domain_error("reweight: likelihood outside [0,1]");
    out[e] = weights[e] * l;
    evidence += out[e];
  }
  if (!(evidence > 0.0)) {
    throw DegenerateEvidenceError("reweight: hypothesized label has zero probability under the ensemble");
  }
  for (double& w : out) w /= evidence;
  return EnsembleWeights(std::move(out));
}

double updated_predictive(const EnsembleWeights& weights, std::span<const double> member_probs_at_xprime,
                          std::span<const double> likelihoods) {
  return mixture(reweight(weights, likelihoods), member_probs_at_xprime);
}

}  // namespace besra

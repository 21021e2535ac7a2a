#include "besra/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "besra/errors.hpp"
#include "besra/rng.hpp"

namespace besra {

EstimationPool sample_estimation_pool(std::span<const std::size_t> unlabeled, std::size_t size,
                                      std::uint64_t seed) {
  if (unlabeled.empty()) throw std::invalid_argument("estimation pool: unlabeled set is empty");
  if (size == 0) throw std::invalid_argument("estimation pool: size must be positive");
  Rng rng(seed);
  EstimationPool pool;
  for (std::size_t pick : rng.sample(unlabeled.size(), std::min(size, unlabeled.size()))) {
    pool.indices.push_back(unlabeled[pick]);
  }
  return pool;
}

DeltaQScorer::DeltaQScorer(const EnsembleProbs& probs, const EnsembleWeights& weights, const EstimationPool& pool,
                           ScoreParams params)
    : probs_(probs), weights_(weights), pool_(pool.indices), rule_(params) {
  if (pool_.empty()) throw std::invalid_argument("DeltaQScorer: empty estimation pool");
  if (weights_.size() != probs_.models()) throw std::invalid_argument("DeltaQScorer: ensemble size mismatch");
  const std::size_t labels = probs_.labels();
  before_.resize(pool_.size() * labels);
  score_pos_.resize(before_.size());
  score_neg_.resize(before_.size());
  for (std::size_t j = 0; j < pool_.size(); ++j) {
    if (pool_[j] >= probs_.instances()) throw std::out_of_range("DeltaQScorer: pool index out of range");
    for (std::size_t k = 0; k < labels; ++k) {
      const std::size_t cell = j * labels + k;
      before_[cell] = mixture(weights_, probs_.cell(pool_[j], k));
      score_pos_[cell] = rule_.floored_score(before_[cell], 1);
      score_neg_[cell] = rule_.floored_score(before_[cell], 0);
    }
  }
}

AcquisitionVector DeltaQScorer::operator()(std::size_t candidate) const {
  if (candidate >= probs_.instances()) throw std::out_of_range("DeltaQScorer: candidate out of range");
  const std::size_t labels = probs_.labels();
  const std::size_t models = probs_.models();
  AcquisitionVector out(pool_.size(), 0.0);
  for (std::size_t k = 0; k < labels; ++k) {
    const auto at_candidate = probs_.cell(candidate, k);
    for (int y = 0; y <= 1; ++y) {
      const auto likelihoods = label_likelihoods(at_candidate, y);
      const double evidence = mixture(weights_, likelihoods);
      EnsembleWeights posterior = EnsembleWeights::uniform(models);
      try {
        posterior = reweight(weights_, likelihoods);
      } catch (const DegenerateEvidenceError&) {
        throw DegenerateEvidenceError("candidate " + std::to_string(candidate) + ", label " + std::to_string(k) +
                                      ", y=" + std::to_string(y) + ": zero evidence under every ensemble member");
      }
      for (std::size_t j = 0; j < pool_.size(); ++j) {
        const std::size_t cell = j * labels + k;
        const double after = mixture(posterior, probs_.cell(pool_[j], k));
        const double gain = after * (rule_.floored_score(after, 1) - score_pos_[cell]) +
                            (1.0 - after) * (rule_.floored_score(after, 0) - score_neg_[cell]);
        out[j] += evidence * gain;
      }
    }
  }
  return out;
}

AcquisitionVector delta_q_vector(std::size_t candidate, const EstimationPool& pool, const EnsembleProbs& probs,
                                 const EnsembleWeights& weights, ScoreParams params) {
  return DeltaQScorer(probs, weights, pool, params)(candidate);
}

ScoredPool score_pool(std::span<const std::size_t> unlabeled, const EstimationPool& pool,
                      const EnsembleProbs& probs, const EnsembleWeights& weights, ScoreParams params,
                      unsigned threads) {
  if (unlabeled.empty()) throw std::invalid_argument("score_pool: unlabeled set is empty");
  if (pool.indices.empty()) throw std::invalid_argument("score_pool: estimation pool is empty");
  const DeltaQScorer scorer(probs, weights, pool, params);
  ScoredPool scored;
  scored.candidates.assign(unlabeled.begin(), unlabeled.end());
  scored.vectors.resize(unlabeled.size());

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, unlabeled.size()));
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) scored.vectors[i] = scorer(scored.candidates[i]);
  };
  if (threads <= 1) {
    work(0, unlabeled.size());
    return scored;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  const std::size_t chunk = (unlabeled.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(unlabeled.size(), t * chunk);
    const std::size_t end = std::min(unlabeled.size(), begin + chunk);
    workers.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return scored;
}

BatchSelection select_batch(const ScoredPool& scored, std::size_t batch, std::uint64_t seed,
                            const KMeansOptions& options) {
  const std::size_t n = scored.candidates.size();
  if (batch == 0) throw std::invalid_argument("select_batch: batch size must be positive");
  if (batch > n) throw std::invalid_argument("select_batch: batch size exceeds candidate count");
  if (scored.vectors.size() != n) throw std::invalid_argument("select_batch: vectors do not match candidates");
  const std::size_t dim = scored.vectors.front().size();
  std::vector<double> points;
  points.reserve(n * dim);
  for (const auto& v : scored.vectors) {
    if (v.size() != dim) throw std::invalid_argument("select_batch: ragged acquisition vectors");
    points.insert(points.end(), v.begin(), v.end());
  }
  const auto clustering = kmeans(points, dim, batch, seed, options);

  BatchSelection selection;
  std::vector<char> taken(n, 0);
  const std::span<const double> all(points);
  for (std::size_t c = 0; c < batch; ++c) {
    const auto centroid = std::span<const double>(clustering.centroids).subspan(c * dim, dim);
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double d = squared_distance(all.subspan(i * dim, dim), centroid);
      if (d < best_d || best == n) {
        best_d = d;
        best = i;
      }
    }
    taken[best] = 1;
    selection.indices.push_back(scored.candidates[best]);
    selection.clusters.push_back(static_cast<int>(c));
  }
  return selection;
}

BatchSelection random_acquire(std::span<const std::size_t> unlabeled, std::size_t batch, std::uint64_t seed) {
  if (batch == 0) throw std::invalid_argument("random_acquire: batch size must be positive");
  if (batch > unlabeled.size()) throw std::invalid_argument("random_acquire: batch size exceeds unlabeled count");
  Rng rng(seed);
  BatchSelection selection;
  for (std::size_t pick : rng.sample(unlabeled.size(), batch)) {
    selection.indices.push_back(unlabeled[pick]);
    selection.clusters.push_back(-1);
  }
  return selection;
}

double mean_binary_entropy(std::span<const double> predictive_probs) {
  if (predictive_probs.empty()) throw std::invalid_argument("mean_binary_entropy: no labels");
  double total = 0.0;
  for (double p : predictive_probs) {
    if (p > 0.0 && p < 1.0) total -= p * std::log(p) + (1.0 - p) * std::log1p(-p);
  }
  return total / static_cast<double>(predictive_probs.size());
}

BatchSelection uncertainty_acquire(std::span<const std::size_t> unlabeled, const EnsembleProbs& probs,
                                   const EnsembleWeights& weights, std::size_t batch) {
  if (batch == 0) throw std::invalid_argument("uncertainty_acquire: batch size must be positive");
  if (batch > unlabeled.size()) {
    throw std::invalid_argument("uncertainty_acquire: batch size exceeds unlabeled count");
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(unlabeled.size());
  for (std::size_t i : unlabeled) ranked.emplace_back(mean_binary_entropy(predictive(weights, probs, i)), i);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  BatchSelection selection;
  for (std::size_t r = 0; r < batch; ++r) {
    selection.indices.push_back(ranked[r].second);
    selection.clusters.push_back(-1);
  }
  return selection;
}

}  // namespace besra

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "besra/ensemble.hpp"
#include "besra/kmeans.hpp"
#include "besra/scoring.hpp"

namespace besra {

// One accumulated expected score change per estimation-pool point.
using AcquisitionVector = std::vector<double>;

// Distinct instance indices standing in for the input distribution.
struct EstimationPool {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

// Uniform draw of min(size, |unlabeled|) distinct members of unlabeled.
EstimationPool sample_estimation_pool(std::span<const std::size_t> unlabeled, std::size_t size,
                                      std::uint64_t seed);

// Expected change in the binary-relevance Beta score at each estimation
// point x' from labeling a candidate x:
//
//   vec[x'] = sum_k sum_{y_k} P(y_k | L, x)
//             * sum_{y'_k} P(y'_k | L, (x, y_k), x')
//             * [S(p_new_k(x'), y'_k) - S(p_old_k(x'), y'_k)]
//
// where p_new_k is the predictive at x' after reweighting the ensemble on
// the hypothesis y_k, and only label k's predictive is updated. Scores use
// the probability floor so log-family vectors stay finite. Each inner term
// is an expected score gain under the updated predictive, hence >= 0 for a
// proper scoring rule.
//
// The current predictives and their scores at the estimation pool are
// computed once per scorer; operator() is const and thread-safe.
class DeltaQScorer {
 public:
  DeltaQScorer(const EnsembleProbs& probs, const EnsembleWeights& weights, const EstimationPool& pool,
               ScoreParams params);

  // Throws DegenerateEvidenceError (with candidate and label) when a
  // hypothesized label has zero probability under the whole ensemble.
  AcquisitionVector operator()(std::size_t candidate) const;

 private:
  const EnsembleProbs& probs_;
  EnsembleWeights weights_;
  std::vector<std::size_t> pool_;
  BetaScoringRule rule_;
  std::vector<double> before_;    // pool x labels current predictive
  std::vector<double> score_pos_; // S(before, 1)
  std::vector<double> score_neg_; // S(before, 0)
};

AcquisitionVector delta_q_vector(std::size_t candidate, const EstimationPool& pool, const EnsembleProbs& probs,
                                 const EnsembleWeights& weights, ScoreParams params);

// Acquisition vectors for every unlabeled candidate, in the order given.
struct ScoredPool {
  std::vector<std::size_t> candidates;
  std::vector<AcquisitionVector> vectors;
};

// Candidates are scored across `threads` workers (0 = hardware
// concurrency); results are independent of the thread count.
ScoredPool score_pool(std::span<const std::size_t> unlabeled, const EstimationPool& pool,
                      const EnsembleProbs& probs, const EnsembleWeights& weights, ScoreParams params,
                      unsigned threads = 1);

struct BatchSelection {
  std::vector<std::size_t> indices;
  std::vector<int> clusters;  // k-Means cluster per index, -1 for baselines
};

// k-Means with `batch` clusters over the acquisition vectors, then for each
// centroid in order the closest candidate not yet taken.
BatchSelection select_batch(const ScoredPool& scored, std::size_t batch, std::uint64_t seed,
                            const KMeansOptions& options = {});

BatchSelection random_acquire(std::span<const std::size_t> unlabeled, std::size_t batch, std::uint64_t seed);

// Mean per-label binary entropy (nats) of a predictive vector.
double mean_binary_entropy(std::span<const double> predictive_probs);

// Top-`batch` candidates by mean binary entropy of the ensemble predictive;
// ties go to the lower index.
BatchSelection uncertainty_acquire(std::span<const std::size_t> unlabeled, const EnsembleProbs& probs,
                                   const EnsembleWeights& weights, std::size_t batch);

}  // namespace besra

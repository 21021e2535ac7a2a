#pragma once

#include <vector>

#include "besra/ensemble.hpp"
#include "besra/rng.hpp"

namespace besra::testing {

// members x instances x labels probabilities in [0.01, 0.99].
inline std::vector<std::vector<std::vector<double>>> random_tensor(Rng& rng, std::size_t members,
                                                                   std::size_t instances, std::size_t labels) {
  std::vector<std::vector<std::vector<double>>> t(members,
                                                  std::vector<std::vector<double>>(instances, std::vector<double>(labels)));
  for (auto& m : t) {
    for (auto& row : m) {
      for (double& p : row) p = rng.uniform(0.01, 0.99);
    }
  }
  return t;
}

inline EnsembleProbs to_probs(const std::vector<std::vector<std::vector<double>>>& t) {
  std::vector<std::vector<double>> tables;
  for (const auto& m : t) {
    std::vector<double> flat;
    for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
    tables.push_back(std::move(flat));
  }
  return EnsembleProbs(tables, t[0].size(), t[0][0].size());
}

inline EnsembleWeights random_weights(Rng& rng, std::size_t members) {
  std::vector<double> w(members);
  double total = 0.0;
  for (double& v : w) total += (v = rng.uniform(0.05, 1.0));
  for (double& v : w) v /= total;
  return EnsembleWeights(w);
}

}  // namespace besra::testing

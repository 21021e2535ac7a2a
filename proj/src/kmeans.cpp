#include "besra/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "besra/rng.hpp"

namespace besra {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    total += d * d;
  }
  return total;
}

namespace {

std::vector<double> seed_centroids(std::span<const double> points, std::size_t n, std::size_t dim,
                                   std::size_t clusters, Rng& rng) {
  const auto point = [&](std::size_t i) { return points.subspan(i * dim, dim); };
  std::vector<double> centroids;
  centroids.reserve(clusters * dim);
  std::vector<char> chosen(n, 0);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < clusters; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += nearest[i];
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (nearest[i] <= 0.0) continue;
          pick = i;
          target -= nearest[i];
          if (target < 0.0) break;
        }
      } else {
        // Every point coincides with a centroid; draw among unused points.
        std::vector<std::size_t> unused;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) unused.push_back(i);
        }
        pick = unused[rng.below(unused.size())];
      }
    }
    chosen[pick] = 1;
    const auto centre = point(pick);
    centroids.insert(centroids.end(), centre.begin(), centre.end());
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(point(i), centre));
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t clusters, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (dim == 0 || points.size() % dim != 0) throw std::invalid_argument("kmeans: bad point layout");
  const std::size_t n = points.size() / dim;
  if (clusters == 0 || clusters > n) throw std::invalid_argument("kmeans: cluster count must be in [1, n]");

  Rng rng(seed);
  KMeansResult result;
  result.centroids = seed_centroids(points, n, dim, clusters, rng);
  result.assignment.assign(n, clusters);

  double scale = 0.0;
  for (double v : points) scale += v * v;
  scale = std::sqrt(scale / static_cast<double>(n));
  const double limit = options.tolerance * scale;

  const auto point = [&](std::size_t i) { return points.subspan(i * dim, dim); };
  std::vector<double> sums(clusters * dim);
  std::vector<std::size_t> sizes(clusters);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < clusters; ++c) {
        const double d = squared_distance(point(i), std::span<const double>(result.centroids).subspan(c * dim, dim));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.assignment[i] != best) {
        result.assignment[i] = best;
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = result.assignment[i];
      ++sizes[c];
      const auto p = point(i);
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += p[j];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < clusters; ++c) {
      if (sizes[c] == 0) continue;
      double shift = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double updated = sums[c * dim + j] / static_cast<double>(sizes[c]);
        const double d = updated - result.centroids[c * dim + j];
        shift += d * d;
        result.centroids[c * dim + j] = updated;
      }
      moved = std::max(moved, std::sqrt(shift));
    }
    if (moved <= limit) break;
  }
  return result;
}

}  // namespace besra

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace besra {

struct KMeansOptions {
  std::size_t max_iterations = 300;
  // Lloyd iterations stop once no centroid moves farther than
  // tolerance * (root-mean-square point norm), or assignments repeat.
  double tolerance = 1e-6;
};

struct KMeansResult {
  std::vector<double> centroids;  // clusters x dim, row-major
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

// k-means++ seeding followed by Lloyd iterations. points is n x dim
// row-major. Empty clusters keep their previous centroid.
KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t clusters, std::uint64_t seed,
                    const KMeansOptions& options = {});

}  // namespace besra

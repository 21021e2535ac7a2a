#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace besra {

// Independent randomness streams expanded from one root seed.
enum class Stream : std::uint64_t {
  Dataset = 1,
  InitialPool = 2,
  EstimationPool = 3,
  Ensemble = 4,
  KMeans = 5,
  RandomAcquire = 6,
  Bootstrap = 7,
  Shuffle = 8,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Counter-based derivation: the result depends only on (root, stream, a, b).
std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t a = 0,
                          std::uint64_t b = 0) noexcept;

// mt19937_64 with distribution code written out here so sequences are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  // Uniform integer in [0, n), unbiased.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // k distinct values of [0, n) in draw order.
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace besra

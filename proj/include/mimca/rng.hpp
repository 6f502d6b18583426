#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mimca {

// Deterministic splittable RNG. All draws go through hand-rolled
// transformations of the raw 64-bit stream so that outputs are
// bit-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // splitmix64 warm-up so that nearby seeds decorrelate
    next_u64();
    next_u64();
  }

  // Independent substream for index i (imputation m, replication t, ...).
  // Derivation depends only on (root seed, i), never on draw order.
  Rng substream(std::uint64_t i) const {
    std::uint64_t s = state_ ^ (0x9e3779b97f4a7c15ULL * (i + 1));
    return Rng(s);
  }

  std::uint64_t next_u64() {
    // splitmix64 (Steele, Lea, Flood 2014)
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    return static_cast<std::size_t>(next_u64() % n);
  }

  bool bernoulli(double p) { return next_double() < p; }

  // draw one index from unnormalized nonnegative weights via CDF inversion
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
    double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
      acc += weights[j];
      if (u < acc) return j;
    }
    return weights.size() - 1;
  }

  // k distinct indices from [0, n), partial Fisher-Yates, order preserved
  // as drawn
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + uniform_index(n - i);
      std::swap(pool[i], pool[j]);
      out[i] = pool[i];
    }
    return out;
  }

 private:
  std::uint64_t state_;
};

}  // namespace mimca

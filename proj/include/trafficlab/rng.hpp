#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace traffic {

// splitmix64; replica i of master seed s runs on mt19937_64 seeded with
// derive_seed(s, i). Both algorithms are pinned so another implementation
// can reproduce the streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

struct Rng {
  std::mt19937_64 engine;

  explicit Rng(std::uint64_t seed) : engine(seed) {}

  // uniform on (0,1), 53-bit resolution, never exactly 0 or 1
  double uniform() {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::size_t index(std::size_t n) {  // uniform on {0,...,n-1}
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine);
  }

  // exact Poisson; product method, split by additivity to stay in floating range
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 400.0) {
      double half = mean * 0.5;
      return poisson(half) + poisson(mean - half);
    }
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }
};

}  // namespace traffic

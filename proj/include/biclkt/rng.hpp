#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace biclkt {

// Every random draw in the project flows through this one generator type.
// Distributions are hand-rolled on top of the raw engine so that streams are
// bit-reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(splitmix(seed)) {}

  uint64_t next_u64() { return engine_(); }

  // [0, 1), 53 mantissa bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // [0, n); n must be > 0
  uint64_t below(uint64_t n) {
    // multiply-shift rejection-free mapping; bias is < 2^-64 * n
    unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<uint64_t>(wide >> 64);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Box-Muller on open interval draws
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derived stream keyed by up to three salts. Forking never disturbs the
  // parent's state, which is what keeps per-graph streams schedule-independent.
  Rng fork(uint64_t a, uint64_t b = 0, uint64_t c = 0) const {
    uint64_t h = seed_;
    h = mix(h, 0x9e3779b97f4a7c15ull ^ a);
    h = mix(h, 0xbf58476d1ce4e5b9ull ^ b);
    h = mix(h, 0x94d049bb133111ebull ^ c);
    return Rng(h);
  }

  uint64_t seed() const { return seed_; }

 private:
  static uint64_t mix(uint64_t h, uint64_t k) {
    h ^= k + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
  }

  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace biclkt

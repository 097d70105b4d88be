#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace lcew {

// Deterministic random stream. mt19937_64 is fully specified by the standard;
// the variate transforms are implemented here by hand because the standard
// library distributions are implementation-defined and would break the
// bit-reproducibility contracts.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Rejection-sampled truncated normal on [lo, hi].
  double truncated_normal(double mean, double sd, double lo, double hi) {
    for (int i = 0; i < 1000; ++i) {
      const double x = normal(mean, sd);
      if (x >= lo && x <= hi) return x;
    }
    return 0.5 * (lo + hi);  // pathological truncation window
  }

  // Exponential inter-arrival gap for a Poisson process of the given rate.
  double exponential(double rate) {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return -std::log(u) / rate;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(gen_() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 step; used to derive independent sub-stream seeds from one
// master seed so that consuming one stream never shifts another.
inline uint64_t derive_seed(uint64_t master, uint64_t stream_id) {
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace lcew

/*
 * random.hpp
 *
 * Seedable, splittable random numbers with a fixed, documented algorithm.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Distributions from <random> are implementation defined, so the
 * conversion to doubles is done here: uniform() takes the top 53 bits of one
 * engine draw and scales by 2^-53, giving a value in [0,1).
 *
 * Streams are split by hashing (seed, stream) with the SplitMix64 finalizer.
 * Given the same seed and stream index, results are bit-identical across
 * platforms and thread counts.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gridabs {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /* independent generator for sub-stream `stream` of `seed` */
  static Rng stream(std::uint64_t seed, std::uint64_t stream) {
    Rng r(0);
    r.engine_.seed(derive_seed(seed, stream));
    return r;
  }

  std::uint64_t next() { return engine_(); }

  /* uniform on [0,1) */
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /* uniform on [a,b) */
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /* uniform on {0,...,n-1}, n >= 1 */
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  bool coin(double p_true) { return uniform() < p_true; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gridabs

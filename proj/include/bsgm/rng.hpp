#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bsgm {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source. All variates are built here from raw
/// 64-bit words so draws are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(mix64(seed)) {}

  /// Stream `stream` of master seed `seed`; distinct streams are independent.
  static Rng stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix64(seed) ^ mix64(stream * 0xd1b54a32d192ed03ULL + 1));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Uniform integer on [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal (Marsaglia polar, caches the second variate).
  double normal();

  double exponential() { return -std::log(uniform_open()); }

  /// Gamma with unit scale (Marsaglia & Tsang).
  double gamma(double shape);

  double beta(double a, double b);

  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bsgm

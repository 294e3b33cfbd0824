#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace optwin {

// All randomness in the simulator flows through RngStream so that a run is a
// pure function of (inputs, seed). Uniform and normal draws are generated by
// explicit arithmetic on mt19937_64 output rather than std::*_distribution,
// whose sequences are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  RngStream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0)
      : engine_(derive_seed(seed, tag, index)) {}

  // [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller without caching the second variate: each call consumes exactly
  // two engine outputs, so sequences are independent of call interleaving.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double clipped_normal(double sigma, double clip_sigmas = 3.0) {
    double z = normal();
    if (z > clip_sigmas) z = clip_sigmas;
    if (z < -clip_sigmas) z = -clip_sigmas;
    return z * sigma;
  }

  std::uint64_t next_u64() { return engine_(); }

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the tag
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return splitmix64(seed ^ splitmix64(h ^ splitmix64(index)));
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace optwin

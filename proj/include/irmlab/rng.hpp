#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace irmlab {

// Named substream of a root seed. Streams are independent of each other, so
// drawing more values from one stage never shifts the values seen by another.
// All draws go through explicit integer arithmetic on mt19937_64 output, which
// the standard pins down exactly, so sequences are bit-identical across
// platforms and standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::string_view name, std::uint64_t salt = 0)
      : gen_(mix(mix(root_seed, fnv1a(name)), salt)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform in [0, n). Multiply-shift; bias is below 2^-64 per draw.
  std::uint32_t uniform_int(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; consumes exactly two uniforms per call.
  double gaussian(double sigma) {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Index into a cumulative table built from `probs`; the last bucket absorbs
  // rounding slack.
  template <typename Probs>
  int discrete(const Probs& probs) {
    double u = next_double();
    double acc = 0.0;
    int last = 0;
    int i = 0;
    for (double p : probs) {
      acc += p;
      last = i;
      if (u < acc) return i;
      ++i;
    }
    return last;
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  // splitmix64 finalizer; decorrelates nearby (seed, name, salt) triples.
  static constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull + b;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace irmlab

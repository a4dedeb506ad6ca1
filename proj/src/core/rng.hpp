#pragma once

#include <cstdint>
#include <cmath>

namespace artemis {

// Purpose tags separating the independent randomness sources of a run.
// Streams keyed on the same (seed, worker, iteration, purpose) tuple are
// bit-identical across executions and platforms.
enum class Draw : std::uint64_t {
  DataGen = 1,
  Gradient = 2,
  UplinkCompress = 3,
  DownlinkCompress = 4,
  Participation = 5,
};

// Counter-based splittable stream. Each output is a stateless hash of
// (key, counter); only the counter advances, so streams with disjoint keys
// never interact and a stream can be reconstructed from its key alone.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t worker, std::uint64_t iteration,
            Draw purpose)
      : key_(mix(mix(mix(mix(0x243f6a8885a308d3ull, seed), worker), iteration),
                 static_cast<std::uint64_t>(purpose))) {}

  std::uint64_t next_u64() { return mix(key_, ctr_++); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one spare kept per stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for n << 2^64; we still use
    // Lemire-style rejection to stay exact.
    const std::uint64_t threshold = -n % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 0x6a09e667f3bcc909ull);
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace artemis

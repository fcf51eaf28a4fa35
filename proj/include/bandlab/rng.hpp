#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bandlab {

// splitmix64 step; used both as a stand-alone mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based replica seeding: the seed of replica i depends only on
// (master, i), never on scheduling or worker count.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// Deterministic random stream.  Normals come from an explicit Box-Muller
// transform so the draw sequence does not depend on the standard library's
// unspecified normal_distribution algorithm.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(expand(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_pos() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal N(0, 1).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static std::mt19937_64 expand(std::uint64_t seed) {
    // Seed the full mt19937_64 state from a splitmix64 sequence.
    std::uint64_t s = seed;
    std::seed_seq::result_type words[8];
    for (auto& w : words) {
      w = static_cast<std::seed_seq::result_type>(splitmix64(s) & 0xffffffffULL);
    }
    std::seed_seq seq(std::begin(words), std::end(words));
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace bandlab

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace ranloop {

/// Named draw streams. Every consumer of randomness owns a stream so that
/// adding draws to one subsystem never shifts another subsystem's sequence.
enum class RngStream : uint32_t {
  Placement = 0,
  Traffic,
  Mobility,
  Shadowing,
  Harq,
  Agent,
};

inline constexpr std::size_t kRngStreamCount = 6;

/// Counter-based generator: the n-th draw of a stream is a pure function of
/// (seed, stream, n). Copying the cursor replays the identical sequence,
/// which is what makes forked twins evolve like their parent.
class DeterministicRng {
 public:
  DeterministicRng() = default;
  explicit DeterministicRng(uint64_t seed) : seed_(seed) {}

  uint64_t next_u64(RngStream s) {
    const auto idx = static_cast<std::size_t>(s);
    uint64_t z = (seed_ ^ kStreamSalt[idx]) + (++draws_[idx]) * 0x9E3779B97F4A7C15ULL;
    return mix(mix(z));
  }

  /// Uniform in [0, 1).
  double uniform(RngStream s) {
    return static_cast<double>(next_u64(s) >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos(RngStream s) {
    return static_cast<double>((next_u64(s) >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Consumes one draw.
  int uniform_int(RngStream s, int n) {
    const auto x = static_cast<unsigned __int128>(next_u64(s));
    return static_cast<int>((x * static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Standard normal via Box-Muller. Consumes exactly two draws.
  double normal(RngStream s) {
    const double u1 = uniform_pos(s);
    const double u2 = uniform(s);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Knuth's product method; draw count varies with lambda but is itself
  /// deterministic. lambda <= 0 consumes nothing.
  int poisson(RngStream s, double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform_pos(s);
    } while (p > limit);
    return k - 1;
  }

  uint64_t seed() const { return seed_; }
  uint64_t draw_count(RngStream s) const { return draws_[static_cast<std::size_t>(s)]; }
  void set_draw_count(RngStream s, uint64_t n) { draws_[static_cast<std::size_t>(s)] = n; }

  bool operator==(const DeterministicRng&) const = default;

 private:
  static constexpr std::array<uint64_t, kRngStreamCount> kStreamSalt = {
      0xD6E8FEB86659FD93ULL, 0xA5A3F1E9B87D201FULL, 0x9F29C2AD613B4F0DULL,
      0xC3D6A18F05B52E71ULL, 0x8B72E6BD49C10A35ULL, 0xE7037ED1A0B428DBULL,
  };

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  uint64_t seed_{0};
  std::array<uint64_t, kRngStreamCount> draws_{};
};

}  // namespace ranloop

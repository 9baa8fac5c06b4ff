#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace langevin {

// splitmix64 step: advances `state` and returns the next output.
// Used to expand a 64-bit seed into generator state and to derive
// independent per-stream seeds from (master seed, stream index).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic seed for stream `stream` under a master seed. Trials, chains
// and matrix generation all get their own stream so results do not depend on
// scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64_next(s);
  s = a ^ (stream * 0x9e3779b97f4a7c15ull + 0xd1b54a32d192ed03ull);
  return splitmix64_next(s);
}

// xoshiro256++ (Blackman & Vigna). A dedicated generator instead of <random>
// engines because chain output must be bit-identical across platforms and
// standard-library versions; std::normal_distribution is
// implementation-defined.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is absorbing
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // One pair of independent standard normals (Marsaglia polar method).
  // Every consumer draws whole pairs, so stream consumption is replayable.
  std::pair<double, double> normal_pair() {
    double u, v, r2;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    return {u * f, v * f};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace langevin

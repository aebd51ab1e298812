#pragma once

#include <cstddef>
#include <cstdint>

namespace shbreg {

__extension__ using uint128_t = unsigned __int128;

/// Identifies one reproducible random stream: ensemble run r uses {base_seed, r}.
struct RunSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Counter-based generator: the k-th output is a pure function of (seed, stream, k),
/// so streams are independent of evaluation order and thread assignment.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed + kGolden) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8bb84b93962eacc9ULL))) {}
  explicit CounterRng(RunSeed s) : CounterRng(s.seed, s.stream) {}

  std::uint64_t next() { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [-1, 1).
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

  /// Uniform on {0, ..., n-1}, unbiased (Lemire's multiply-and-reject).
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = n;
    uint128_t prod = static_cast<uint128_t>(next()) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        prod = static_cast<uint128_t>(next()) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::size_t>(prod >> 64);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace shbreg

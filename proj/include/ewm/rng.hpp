#pragma once

#include <cstdint>

namespace ewm {

/// Stafford "variant 13" 64-bit finalizer (the SplitMix64 output function).
/// A bijection on uint64 with full avalanche; used for every seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Counter-based stream: draw i is mix64(key + (i + 1) * gamma), i.e. SplitMix64
/// with an explicit counter. Output depends only on (key, counter), so streams
/// are reproducible across platforms and can be split without shared state.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGoldenGamma); }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer on [0, bound) by Lemire's multiply-shift (bias < 2^-32 for small bounds).
  std::uint64_t below(std::uint64_t bound) noexcept {
    __extension__ using U128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<U128>(next_u64()) * bound) >> 64);
  }

  /// Independent child stream; disjoint sub-seeds give unrelated keys.
  constexpr CounterRng split(std::uint64_t subseed) const noexcept {
    return CounterRng(mix64(key_ ^ mix64(subseed + kGoldenGamma)));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ewm

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ifstail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Separates independent consumers of a single user seed.
enum class StreamDomain : std::uint64_t {
  Backward = 1,
  Forward = 2,
  Lyapunov = 3,
  Ldp = 4,
  LdpReference = 5,
  Entropy = 6,
  Smoothing = 7,
  Diagnostic = 8,
  DiagnosticReference = 9,
  Push = 10,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamDomain domain,
                                    std::uint64_t k = 0) noexcept {
  return mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(domain))) +
               mix64(k + 0x632BE59BD9B4E019ULL));
}

/*
 * Counter-based random stream. The i-th output is a pure function of
 * (seed, index, i), so draw `index` of a batch sees the same numbers no matter
 * which worker thread evaluates it.
 *
 * Satisfies UniformRandomBitGenerator, so the standard distributions work on
 * top of it.
 */
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t index) noexcept
      : key_(mix64(seed ^ mix64(index ^ 0xD1B54A32D192ED03ULL))),
        gamma_(mix64(key_ + 0x9E3779B97F4A7C15ULL) | 1ULL) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * gamma_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double normal() { return normal_(*this); }

  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t gamma_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ifstail

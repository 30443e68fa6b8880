#pragma once

#include <cstdint>

namespace twinbeam {

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent seed from a base seed and a label (used for
/// per-point and per-resample sub-seeds).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t label) noexcept {
  return mix64(mix64(base + 0x9E3779B97F4A7C15ULL) + label);
}

/// Counter-based random stream keyed by (seed, stream_id).
///
/// Draw i is a pure function of (key, i) — the SplitMix64 sequence with
/// initial state `key` — so streams can be created and consumed in any
/// order across workers and still produce identical output. One stream is
/// keyed per pulse (stream_id = pulse_id) or per bootstrap resample.
///
/// Satisfies UniformRandomBitGenerator, so distribution samplers can run
/// directly on top of it.
class RngStream {
public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : state_(mix64(mix64(seed + kGolden) ^ mix64(stream_id ^ 0x6A09E667F3BCC909ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~0ULL; }

  result_type operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t state_;
};

}  // namespace twinbeam

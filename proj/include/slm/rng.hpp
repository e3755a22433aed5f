#pragma once

// Counter-based random streams. Each simulated path owns an independent
// Philox4x32-10 stream keyed by a 64-bit mix of (seed, path index), so a
// path's draws do not depend on which thread runs it or in what order.

#include <array>
#include <cstdint>

namespace slm {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Key of the stream used by path `path_index` under `seed`.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_index) noexcept {
  return mix64(seed ^ mix64(path_index ^ 0x5DEECE66Dull));
}

/// Independent seed derived from a master seed, e.g. for the two sides of a
/// duality check.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept {
  return mix64(mix64(master) + 0xD1B54A32D192ED03ull * (tag + 1));
}

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32-10 block.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Inverse of the standard normal CDF (Wichura's AS241, about 1e-16
/// relative accuracy). p must lie in (0, 1).
double inverse_normal_cdf(double p) noexcept;

class PhiloxStream {
 public:
  explicit PhiloxStream(std::uint64_t key) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    if (have_ == 0) refill();
    return buffer_[--have_];
  }

  /// Standard normal by inversion.
  double normal() noexcept { return inverse_normal_cdf(uniform()); }

  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  void refill() noexcept;

  PhiloxKey key_;
  std::uint64_t block_ = 0;
  std::array<double, 2> buffer_{};
  int have_ = 0;
};

}  // namespace slm

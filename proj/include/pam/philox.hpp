#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace pam {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  [[nodiscard]] static constexpr Counter apply(Counter c, Key k) noexcept {
    for (int round = 0; round < 10; ++round) {
      c = single_round(c, k);
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return c;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Two independent standard normals attached to the lattice pair (row, pair_index) under `seed`.
[[nodiscard]] inline std::array<double, 2> normal_pair(std::uint64_t seed, std::int64_t row,
                                                       std::int64_t pair_index) noexcept {
  const auto r = static_cast<std::uint64_t>(row);
  const auto p = static_cast<std::uint64_t>(pair_index);
  const auto out = Philox4x32::apply(
      {static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32),
       static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  constexpr double kScale = 0x1.0p-53;
  const double u1 =
      (static_cast<double>(((std::uint64_t{out[0]} << 32) | out[1]) >> 11) + 0.5) * kScale;
  const double u2 =
      (static_cast<double>(((std::uint64_t{out[2]} << 32) | out[3]) >> 11) + 0.5) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Deterministic uniform(0,1) stream identified by (seed, stream); draw n is a pure function of n.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  [[nodiscard]] double next() noexcept {
    if (have_ == 0) {
      const auto out = Philox4x32::apply(
          {static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
           static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
          {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
      ++block_;
      buffer_[0] = to_unit((std::uint64_t{out[0]} << 32) | out[1]);
      buffer_[1] = to_unit((std::uint64_t{out[2]} << 32) | out[3]);
      have_ = 2;
    }
    return buffer_[2 - have_--];
  }

 private:
  static double to_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<double, 2> buffer_{};
  int have_ = 0;
};

/// Floor division for the pair index of a possibly negative lattice column.
[[nodiscard]] constexpr std::int64_t floor_half(std::int64_t k) noexcept {
  return (k >= 0) ? k / 2 : -((-k + 1) / 2);
}

/// SplitMix64 finaliser; used to derive independent stream keys.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace pam

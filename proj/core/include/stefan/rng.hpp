#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace stefan {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
// A draw is a pure function of (key, counter), so Brownian increments can be
// keyed by (seed, path, mode, step) and are identical for any thread count
// or evaluation order.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const std::array<std::uint32_t, 4> next{
          static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
          static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
          static_cast<std::uint32_t>(p0)};
      ctr = next;
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }
};

// Standard normal via Box-Muller on one Philox block. u1 is kept strictly
// positive so the log is always finite.
inline double counter_normal(std::uint64_t seed, std::uint32_t path, std::uint32_t mode,
                             std::uint32_t step, std::uint32_t stream = 0) {
  const auto r = Philox4x32::block(
      {path, mode, step, stream},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t a = (std::uint64_t{r[0]} << 32) | r[1];
  const std::uint64_t b = (std::uint64_t{r[2]} << 32) | r[3];
  const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace stefan

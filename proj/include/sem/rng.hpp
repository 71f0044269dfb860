#pragma once

#include <array>
#include <cstdint>

namespace sem {

// Counter-mode random stream: Philox4x32-10.  Every draw is a pure function
// of (seed, path, step, coordinate), so any entry of a Brownian table is
// addressable without generating its predecessors and parallel generation is
// scheduler-independent by construction.
namespace philox {

inline constexpr std::uint32_t kMult0 = 0xD2511F53u;
inline constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
    const std::array<std::uint32_t, 4> next = {
        static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
        static_cast<std::uint32_t>(p0)};
    ctr = next;
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

// Uniform draw in the open interval (0, 1), 53 usable mantissa bits.
inline double keyed_uniform(std::uint64_t seed, std::int64_t path,
                            std::int64_t step, int coordinate) {
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed),
      static_cast<std::uint32_t>(seed >> 32)};
  const auto upath = static_cast<std::uint64_t>(path);
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step),
      static_cast<std::uint32_t>(coordinate) ^
          (static_cast<std::uint32_t>(step >> 32) << 16),
      static_cast<std::uint32_t>(upath),
      static_cast<std::uint32_t>(upath >> 32)};
  const auto out = philox::block(ctr, key);
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Inverse standard-normal CDF (Wichura's PPND16 rational approximation,
// accurate to ~1e-16 over (0,1)).
double inverse_normal_cdf(double p);

// One N(0,1) draw keyed by (seed, path, step, coordinate).
inline double keyed_normal(std::uint64_t seed, std::int64_t path,
                           std::int64_t step, int coordinate) {
  return inverse_normal_cdf(keyed_uniform(seed, path, step, coordinate));
}

}  // namespace sem

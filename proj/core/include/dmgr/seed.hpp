// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace dmgr {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (base, stream, index).
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                           std::uint64_t index = 0) {
  return splitmix64(splitmix64(base ^ splitmix64(stream)) + index);
}

}  // namespace dmgr

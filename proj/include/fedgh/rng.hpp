#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedgh {

// Independent random streams used by a run. Each stream is seeded from the
// experiment seed, its tag, and any indices (round, client id) it is keyed on,
// so one consumer never shifts another consumer's draws.
enum class Stream : std::uint64_t {
  data = 1,
  holdout = 2,
  partition = 3,
  init = 4,
  sampling = 5,
  client = 6,
  order = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                 std::initializer_list<std::uint64_t> parts = {}) noexcept {
  std::uint64_t h = derive_seed(base, {static_cast<std::uint64_t>(stream)});
  return parts.size() == 0 ? h : derive_seed(h, parts);
}

using Rng = std::mt19937_64;

}  // namespace fedgh

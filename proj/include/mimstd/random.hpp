#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mimstd {

using Engine = std::mt19937_64;

/// Tags that keep independent random streams apart when a seed is split.
enum class Stream : std::uint64_t {
  index_data = 1,
  target_data = 2,
  mcmc = 3,
  synthesis = 4,
  pooling = 5,
  bootstrap = 6,
  truth = 7,
  allocation = 8,
  outcomes = 9,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based seed derivation: the derived seed is a pure function of the
/// root and the key path, so streams do not depend on the order in which
/// workers request them.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept;

inline std::uint64_t derive_seed(std::uint64_t root, Stream purpose) noexcept {
  return derive_seed(root, {static_cast<std::uint64_t>(purpose)});
}

inline std::uint64_t derive_seed(std::uint64_t root, Stream purpose, std::uint64_t index) noexcept {
  return derive_seed(root, {static_cast<std::uint64_t>(purpose), index});
}

inline Engine make_engine(std::uint64_t seed) { return Engine{seed}; }

/// Uniform on [0, 1) with 53 random bits; identical on every platform.
inline double uniform01(Engine& eng) noexcept {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace mimstd

#pragma once

#include <cstdint>
#include <random>

namespace ostrovsky {

/// SplitMix64 finalizer. Used to turn (master seed, stream index) into
/// well-separated engine seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Engine = std::mt19937_64;

/// Independent stream for sample `index` of a run seeded by `master`.
/// The stream depends only on the pair, never on scheduling.
inline Engine make_stream(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(mix64(master)),
                    static_cast<std::uint32_t>(mix64(master) >> 32),
                    static_cast<std::uint32_t>(mix64(index ^ 0x5851f42d4c957f2dULL)),
                    static_cast<std::uint32_t>(mix64(index ^ 0x5851f42d4c957f2dULL) >> 32)};
  return Engine(seq);
}

}  // namespace ostrovsky

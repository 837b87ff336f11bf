#pragma once

#include <cstdint>
#include <random>

namespace qsvm {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent substream seed for (seed, stream, index). Parallel and serial
/// executions that key their generators this way draw identical numbers.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

// Stream tags so the different consumers of one user seed never collide.
namespace streams {
inline constexpr std::uint64_t kAnneal = 0xA11EA1;
inline constexpr std::uint64_t kShots = 0x5407;
inline constexpr std::uint64_t kRealization = 0x2EA1;
inline constexpr std::uint64_t kEmbedding = 0xE3BED;
inline constexpr std::uint64_t kSplit = 0x5B117;
inline constexpr std::uint64_t kSmote = 0x53073;
inline constexpr std::uint64_t kUndersample = 0x0DE2;
inline constexpr std::uint64_t kBaseline = 0xBA5E;
inline constexpr std::uint64_t kSynthetic = 0x5717;
}  // namespace streams

}  // namespace qsvm

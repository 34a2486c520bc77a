#pragma once

#include <cstdint>
#include <random>

namespace qplas {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to decorrelate (seed, stream, index) triples.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Independent generator for substream `index` of logical stream `stream`
// under a run seed. Same triple, same sequence; different triples are
// decorrelated, so work split by index is reproducible regardless of the
// number of threads that execute it.
Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

// Stream tags used across the library so that unrelated consumers of one
// run seed never share a substream.
namespace streams {
inline constexpr std::uint64_t kSimulate = 0x51u;
inline constexpr std::uint64_t kTimeTags = 0x7Au;
inline constexpr std::uint64_t kBootstrapKs = 0xB5u;
inline constexpr std::uint64_t kBootstrapAffinity = 0xBAu;
}  // namespace streams

}  // namespace qplas

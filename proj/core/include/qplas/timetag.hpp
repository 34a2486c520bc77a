#pragma once

// Two-channel time-tag processing: herald (A) / probe (B) coincidence matching,
// grouping heralds into sets of nu probes, and a stream simulator.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qplas/random.hpp"

namespace qplas::timetag {

inline constexpr std::int64_t kResolutionPs = 25;

enum class Channel { A, B };

struct TimeTagEvent {
    Channel channel = Channel::A;
    std::int64_t timestamp_ps = 0;
};

enum class WindowKind {
    OneSided,   // 0 <= tB - tA <= window
    Symmetric,  // |tB - tA| <= window
};

struct CoincidenceConfig {
    std::int64_t window_ps = 4000;
    std::int64_t nu = 150;
    WindowKind kind = WindowKind::OneSided;

    void validate() const;
};

struct Streams {
    std::vector<std::int64_t> a;  // herald timestamps, ascending
    std::vector<std::int64_t> b;  // probe timestamps, ascending
};

struct Pair {
    std::size_t a = 0;
    std::size_t b = 0;
    friend bool operator==(const Pair&, const Pair&) = default;
};

// Greedy one-to-one matching in time order: each A event takes the earliest
// still-unmatched B event inside its window. Throws ContractError on unsorted
// input.
std::vector<Pair> match_coincidences(std::span<const std::int64_t> stream_a, std::span<const std::int64_t> stream_b,
                                     std::int64_t window_ps, WindowKind kind = WindowKind::OneSided);

struct HeraldSet {
    std::int64_t first_herald_ps = 0;
    std::int64_t last_herald_ps = 0;
    std::int64_t transmitted = 0;  // Nt
};

// Consecutive blocks of nu A events; a trailing partial block is dropped.
std::vector<HeraldSet> group_into_timed_sets(std::span<const std::int64_t> stream_a, std::span<const Pair> pairs,
                                             std::int64_t nu);
std::vector<std::int64_t> group_into_sets(std::span<const std::int64_t> stream_a, std::span<const Pair> pairs,
                                          std::int64_t nu);

struct StreamSimulation {
    double herald_rate_hz = 5e4;
    double transmission = 0.066;
    double duration_s = 1.0;
    std::int64_t jitter_ps = 0;      // B delay uniform in [0, jitter]
    double background_rate_hz = 0.0; // uncorrelated B events (accidentals)
    std::int64_t start_ps = 0;
};

Streams simulate_streams(const StreamSimulation& sim, Rng& rng);

// `channel,timestamp_ps`, rows sorted by timestamp across channels.
std::string format_timetag_csv(const Streams& streams);
Streams parse_timetag_csv(std::string_view text, const std::string& source);
// One channel per file: a `timestamp_ps` column (a `channel` column, if
// present, is ignored).
std::vector<std::int64_t> parse_channel_csv(std::string_view text, const std::string& source);

}  // namespace qplas::timetag

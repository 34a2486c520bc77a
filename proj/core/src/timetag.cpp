#include "qplas/timetag.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>
#include <sstream>

#include "qplas/csv.hpp"
#include "qplas/errors.hpp"

namespace qplas::timetag {

namespace {

void require_sorted(std::span<const std::int64_t> s, const char* name) {
    if (!std::is_sorted(s.begin(), s.end())) {
        throw ContractError(std::string("match_coincidences: stream ") + name + " is not sorted ascending");
    }
}

std::int64_t quantize(double t_ps) {
    return static_cast<std::int64_t>(std::floor(t_ps / kResolutionPs)) * kResolutionPs;
}

}  // namespace

void CoincidenceConfig::validate() const {
    if (window_ps <= 0) throw DomainError("coincidence window must be > 0");
    if (nu < 1) throw DomainError("nu must be >= 1");
}

std::vector<Pair> match_coincidences(std::span<const std::int64_t> stream_a, std::span<const std::int64_t> stream_b,
                                     std::int64_t window_ps, WindowKind kind) {
    if (window_ps <= 0) throw DomainError("match_coincidences: window must be > 0");
    require_sorted(stream_a, "A");
    require_sorted(stream_b, "B");

    const std::int64_t lead = kind == WindowKind::Symmetric ? window_ps : 0;
    std::vector<Pair> pairs;
    // Every B event before `next` is either matched or too early for all
    // remaining A events, so the candidate for each A is just stream_b[next].
    std::size_t next = 0;
    for (std::size_t i = 0; i < stream_a.size(); ++i) {
        const std::int64_t ta = stream_a[i];
        while (next < stream_b.size() && stream_b[next] < ta - lead) ++next;
        if (next < stream_b.size() && stream_b[next] - ta <= window_ps) {
            pairs.push_back({i, next});
            ++next;
        }
    }
    return pairs;
}

std::vector<HeraldSet> group_into_timed_sets(std::span<const std::int64_t> stream_a, std::span<const Pair> pairs,
                                             std::int64_t nu) {
    if (nu < 1) throw DomainError("group_into_sets: nu must be >= 1");
    const auto n_blocks = stream_a.size() / static_cast<std::size_t>(nu);
    std::vector<HeraldSet> sets(n_blocks);
    for (std::size_t k = 0; k < n_blocks; ++k) {
        sets[k].first_herald_ps = stream_a[k * nu];
        sets[k].last_herald_ps = stream_a[(k + 1) * nu - 1];
    }
    for (const auto& p : pairs) {
        if (p.a >= stream_a.size()) throw ContractError("group_into_sets: pair index outside stream A");
        const auto block = p.a / static_cast<std::size_t>(nu);
        if (block < n_blocks) ++sets[block].transmitted;
    }
    return sets;
}

std::vector<std::int64_t> group_into_sets(std::span<const std::int64_t> stream_a, std::span<const Pair> pairs,
                                          std::int64_t nu) {
    const auto sets = group_into_timed_sets(stream_a, pairs, nu);
    std::vector<std::int64_t> counts;
    counts.reserve(sets.size());
    for (const auto& s : sets) counts.push_back(s.transmitted);
    return counts;
}

Streams simulate_streams(const StreamSimulation& sim, Rng& rng) {
    if (!(sim.herald_rate_hz > 0.0)) throw DomainError("simulate_streams: herald rate must be > 0");
    if (!(sim.transmission >= 0.0 && sim.transmission <= 1.0)) {
        throw DomainError("simulate_streams: transmission must lie in [0, 1]");
    }
    if (!(sim.duration_s >= 0.0) || sim.jitter_ps < 0 || !(sim.background_rate_hz >= 0.0)) {
        throw DomainError("simulate_streams: duration, jitter and background rate must be >= 0");
    }

    Streams out;
    const double end_ps = static_cast<double>(sim.start_ps) + sim.duration_s * 1e12;
    std::exponential_distribution<double> gap(sim.herald_rate_hz * 1e-12);
    std::bernoulli_distribution transmitted(sim.transmission);
    std::uniform_int_distribution<std::int64_t> delay_steps(0, sim.jitter_ps / kResolutionPs);

    double t = static_cast<double>(sim.start_ps);
    while (true) {
        t += gap(rng);
        if (t >= end_ps) break;
        const std::int64_t ta = quantize(t);
        out.a.push_back(ta);
        if (transmitted(rng)) out.b.push_back(ta + delay_steps(rng) * kResolutionPs);
    }
    if (sim.background_rate_hz > 0.0) {
        std::exponential_distribution<double> bg_gap(sim.background_rate_hz * 1e-12);
        double tb = static_cast<double>(sim.start_ps);
        while (true) {
            tb += bg_gap(rng);
            if (tb >= end_ps) break;
            out.b.push_back(quantize(tb));
        }
    }
    std::sort(out.b.begin(), out.b.end());
    return out;
}

std::string format_timetag_csv(const Streams& streams) {
    std::ostringstream out;
    out << "channel,timestamp_ps\n";
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < streams.a.size() || j < streams.b.size()) {
        const bool take_a = j >= streams.b.size() || (i < streams.a.size() && streams.a[i] <= streams.b[j]);
        if (take_a) {
            out << "A," << streams.a[i++] << '\n';
        } else {
            out << "B," << streams.b[j++] << '\n';
        }
    }
    return out.str();
}

Streams parse_timetag_csv(std::string_view text, const std::string& source) {
    const auto table = csv::parse(text, source);
    const auto cc = table.column("channel");
    const auto ct = table.column("timestamp_ps");
    Streams s;
    std::int64_t previous = std::numeric_limits<std::int64_t>::min();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto line = table.lines[r];
        const auto& ch = table.rows[r][cc];
        const auto ts = csv::parse_integer(table.rows[r][ct], source, line);
        if (ts < 0) throw ParseError(source, line, "timestamp must be >= 0");
        if (ts < previous) throw ParseError(source, line, "rows must be sorted by timestamp");
        previous = ts;
        if (ch == "A") {
            s.a.push_back(ts);
        } else if (ch == "B") {
            s.b.push_back(ts);
        } else {
            throw ParseError(source, line, "channel must be A or B, got '" + ch + "'");
        }
    }
    return s;
}

std::vector<std::int64_t> parse_channel_csv(std::string_view text, const std::string& source) {
    const auto table = csv::parse(text, source);
    const auto ct = table.column("timestamp_ps");
    std::vector<std::int64_t> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto line = table.lines[r];
        const auto ts = csv::parse_integer(table.rows[r][ct], source, line);
        if (ts < 0) throw ParseError(source, line, "timestamp must be >= 0");
        if (!out.empty() && ts < out.back()) throw ParseError(source, line, "rows must be sorted by timestamp");
        out.push_back(ts);
    }
    return out;
}

}  // namespace qplas::timetag

#include "qplas/photon_stats.hpp"

#include <cmath>
#include <random>

#include "qplas/errors.hpp"

namespace qplas::photon {

namespace {

void check_T(double T) {
    if (!(T >= 0.0 && T <= 1.0)) throw DomainError("transmission must lie in [0, 1]");
}

void check_nu(double nu) {
    if (!(nu >= 1.0)) throw DomainError("nu must be >= 1");
}

}  // namespace

std::string_view to_string(ProbeKind kind) noexcept {
    switch (kind) {
        case ProbeKind::HeraldedSinglePhoton: return "heralded";
        case ProbeKind::CoherentUnitMean: return "coherent";
    }
    return "unknown";
}

ProbeKind parse_probe_kind(std::string_view name) {
    if (name == "heralded" || name == "quantum" || name == "single_photon") return ProbeKind::HeraldedSinglePhoton;
    if (name == "coherent" || name == "classical") return ProbeKind::CoherentUnitMean;
    throw DomainError("unknown probe model '" + std::string(name) + "'");
}

void SamplingPlan::validate() const {
    if (nu < 1) throw DomainError("sampling plan: nu must be >= 1");
    if (mu < 1) throw DomainError("sampling plan: mu must be >= 1");
    if (!(bin_seconds > 0.0)) throw DomainError("sampling plan: bin_seconds must be > 0");
}

std::int64_t sample_transmitted(double T, std::int64_t nu, ProbeKind kind, Rng& rng) {
    check_T(T);
    check_nu(static_cast<double>(nu));
    switch (kind) {
        case ProbeKind::HeraldedSinglePhoton: {
            std::binomial_distribution<std::int64_t> dist(nu, T);
            return dist(rng);
        }
        case ProbeKind::CoherentUnitMean: {
            if (T == 0.0) return 0;
            std::poisson_distribution<std::int64_t> dist(static_cast<double>(nu) * T);
            return dist(rng);
        }
    }
    return 0;
}

std::int64_t sample_transmitted_per_probe(double T, std::int64_t nu, Rng& rng) {
    check_T(T);
    check_nu(static_cast<double>(nu));
    std::bernoulli_distribution probe(T);
    std::int64_t n = 0;
    for (std::int64_t i = 0; i < nu; ++i) n += probe(rng) ? 1 : 0;
    return n;
}

double estimate_T(std::int64_t Nt, std::int64_t nu) {
    if (nu <= 0) throw DomainError("estimate_T: nu must be >= 1");
    if (Nt < 0) throw DomainError("estimate_T: Nt must be >= 0");
    return static_cast<double>(Nt) / static_cast<double>(nu);
}

std::vector<double> sample_set_transmissions(double T, const SamplingPlan& plan, ProbeKind kind, Rng& rng) {
    plan.validate();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(plan.mu));
    for (std::int64_t i = 0; i < plan.mu; ++i) out.push_back(estimate_T(sample_transmitted(T, plan.nu, kind, rng), plan.nu));
    return out;
}

SetStatistics set_statistics(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("set_statistics: empty sample list");
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n), samples.size()};
}

double dT_quantum(double T, double nu) {
    check_T(T);
    check_nu(nu);
    return std::sqrt(T * (1.0 - T) / nu);
}

double dT_classical(double T, double nu) {
    if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("dT_classical: T must be >= 0");
    check_nu(nu);
    return std::sqrt(T / nu);
}

double enhancement(double T) {
    if (!(T >= 0.0 && T <= 1.0)) throw DomainError("enhancement: T must lie in [0, 1)");
    if (T == 1.0) throw DomainError("enhancement: singular at T = 1");
    return 1.0 / std::sqrt(1.0 - T);
}

}  // namespace qplas::photon

#pragma once

// Counting statistics of a probe arm: how many of nu probes make it through a
// channel of transmission T, the per-set transmission estimator, and the
// closed-form precision of that estimator for single-photon and coherent probes.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qplas/random.hpp"

namespace qplas::photon {

enum class ProbeKind {
    HeraldedSinglePhoton,  // binomial counts
    CoherentUnitMean,      // Poisson counts, one photon per probe on average
};

std::string_view to_string(ProbeKind kind) noexcept;
ProbeKind parse_probe_kind(std::string_view name);  // "heralded" | "coherent"

struct SamplingPlan {
    std::int64_t nu = 150;     // probes per set
    std::int64_t mu = 2000;    // sets per time bin
    double bin_seconds = 6.0;  // duration of one bin

    void validate() const;
};

struct SetStatistics {
    double mean_T = 0.0;
    double std_T = 0.0;
    std::size_t n_sets = 0;
};

// Number of transmitted probes out of nu. Binomial(nu, T) for heralded single
// photons, Poisson(nu T) for unit-mean coherent probes.
std::int64_t sample_transmitted(double T, std::int64_t nu, ProbeKind kind, Rng& rng);

// Same law as the heralded case, drawn one Bernoulli trial per probe.
std::int64_t sample_transmitted_per_probe(double T, std::int64_t nu, Rng& rng);

double estimate_T(std::int64_t Nt, std::int64_t nu);

// mu per-set transmissions for one time bin.
std::vector<double> sample_set_transmissions(double T, const SamplingPlan& plan, ProbeKind kind, Rng& rng);

// Mean and population (1/mu) standard deviation of per-set transmissions.
SetStatistics set_statistics(std::span<const double> samples);

double dT_quantum(double T, double nu);
double dT_classical(double T, double nu);

// dT_classical / dT_quantum = 1/sqrt(1 - T); independent of nu.
double enhancement(double T);

}  // namespace qplas::photon

#pragma once

// Bootstrap pipelines: resampled sensorgrams, the classical Gaussian
// surrogate, the observable-rate estimate and the double-reciprocal affinity
// chain. Repetition r always draws from substream r of the configured seed, so
// results do not depend on the thread count.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qplas/estimation/association_fit.hpp"
#include "qplas/estimation/dataset.hpp"
#include "qplas/kinetics.hpp"
#include "qplas/random.hpp"

namespace qplas::estimation {

enum class NoiseMode { Quantum, Classical };
std::string_view to_string(NoiseMode mode) noexcept;
NoiseMode parse_noise_mode(std::string_view name);

struct BootstrapConfig {
    std::int64_t m = 175;      // resampled sensorgrams averaged per repetition
    std::int64_t p = 15000;    // repetitions
    std::uint64_t rng_seed = 0;
    unsigned threads = 1;

    void validate() const;
};

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over the repetitions
    std::size_t n = 0;
};

// Exactly zero std when all values are identical.
Summary summarize(std::span<const double> values);

// One T_i per bin, drawn uniformly with replacement from the stored sets.
kinetics::Sensorgram bootstrap_sensorgram(const ExperimentDataset& ds, Rng& rng);

// <T> + N(0, sqrt(<T>/nu)) per bin, unclamped.
kinetics::Sensorgram classical_surrogate_sensorgram(const kinetics::Sensorgram& mean, double nu, Rng& rng);

// Average of m noisy sensorgrams of the given mode (values only).
std::vector<double> averaged_draw(const ExperimentDataset& ds, const std::vector<double>& bin_means, NoiseMode mode,
                                  std::int64_t m, double nu, Rng& rng);

struct KsOptions {
    double nu = 150.0;        // probes per set, for the classical surrogate
    LmOptions lm{};
    double fit_from_s = 0.0;  // bins earlier than this are excluded from the fit
};

struct KsEstimate {
    Summary ks;
    Summary T0;
    Summary Tinf;
    std::vector<double> distribution;  // converged ks values in repetition order
    std::size_t attempted = 0;
    std::size_t failed = 0;
    std::vector<std::string> warnings;
};

// p times: average m resampled (quantum) or surrogate (classical) sensorgrams,
// fit the association curve, keep ks. Non-converged fits are discarded and
// counted; throws EstimationError when none converge.
KsEstimate estimate_ks(const ExperimentDataset& ds, const BootstrapConfig& config, NoiseMode mode,
                       const KsOptions& options = {});

struct AffinityOptions {
    double nu = 150.0;
    double steady_center_s = 94.0;
    double steady_width_s = 6.0;
    // false: amplitude above the pre-injection baseline; true: raw steady T.
    bool raw_steady_state = false;
};

struct AffinityInput {
    const ExperimentDataset* dataset = nullptr;
    double L0 = 0.0;
};

struct AffinityEstimate {
    Summary KA;
    Summary kd;
    Summary ka;
    std::vector<double> KA_distribution;
    std::vector<double> kd_distribution;
    std::vector<double> ka_distribution;
    std::size_t attempted = 0;
    std::size_t discarded = 0;
    std::vector<std::string> warnings;
};

// p times: bootstrap the steady-state transmission of each concentration,
// fit 1/Tss against 1/L0, invert for KA, pair with ks_distribution[r] and
// solve for kd and ka at L0_ref (the concentration the ks values belong to).
AffinityEstimate estimate_affinity(std::span<const AffinityInput> inputs, std::span<const double> ks_distribution,
                                   double L0_ref, const BootstrapConfig& config, NoiseMode mode,
                                   const AffinityOptions& options = {});

// Indices of bins whose centre lies within the steady-state window.
std::vector<std::size_t> steady_state_bins(const ExperimentDataset& ds, double center_s, double width_s);

}  // namespace qplas::estimation

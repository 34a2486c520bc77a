#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qplas/kinetics.hpp"

namespace qplas::estimation {

// Every per-set transmission of every time bin of one injection, plus the
// cavity concentration of that injection when known.
struct ExperimentDataset {
    std::string label;
    std::optional<double> L0;
    std::vector<double> time_s;                // bin centres, uniformly spaced
    std::vector<std::vector<double>> samples;  // samples[bin] = T_i, i < mu

    std::size_t bins() const noexcept { return time_s.size(); }

    // Throws DomainError on empty bins, non-finite or negative T_i,
    // non-increasing or non-uniform times.
    void validate() const;

    // Per-bin mean and population standard deviation.
    kinetics::Sensorgram mean_sensorgram() const;
};

// Long format: `time_s,set_index,T_i[,L0_M]`, rows of a bin contiguous and
// bins in increasing time. L0_M, when present, must be constant.
std::string format_dataset_csv(const ExperimentDataset& ds);
ExperimentDataset parse_dataset_csv(std::string_view text, const std::string& source);

// Mean transmission before injection (bins with t < 0), or the first bin's
// mean when the record starts at injection.
double baseline_transmission(const ExperimentDataset& ds);

struct Alignment {
    double time_shift_s = 0.0;  // subtracted from every time
    double T_shift = 0.0;       // added to every T_i
};

struct AlignedDataset {
    ExperimentDataset dataset;
    Alignment offsets;
};

// Moves the injection to t = 0 and, if requested, shifts transmissions so
// the baseline equals `target_baseline`.
AlignedDataset align_dataset(const ExperimentDataset& ds, double injection_time_s,
                             std::optional<double> target_baseline);

}  // namespace qplas::estimation

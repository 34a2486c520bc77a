#pragma once

// Run configuration: a flat `key = value` text format with dotted sections,
// or the `config` object of a previously written run manifest.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qplas/kinetics.hpp"
#include "qplas/photon_stats.hpp"
#include "qplas/spr_optics.hpp"
#include "qplas/timetag.hpp"

namespace qplas::runner {

enum class TransmissionSource { Direct, Stack };

// Gold film on a prism; the analyte index follows the bound fraction.
struct StackSettings {
    double prism_index = 1.5106;
    double film_permittivity_re = -25.8;
    double film_permittivity_im = 1.63;
    double film_thickness_nm = 50.0;
    double buffer_index = 1.329;
    double wavelength_nm = 810.0;
    double operating_drop = 0.4;
    double delta_n_max = 0.004;
    optics::EfficiencyBudget budget = optics::reference_budget();

    optics::LayerStack stack() const;
};

struct TimeTagSettings {
    bool enabled = false;
    double herald_rate_hz = 5e4;
    std::int64_t window_ps = 4000;
    bool symmetric_window = false;
    std::int64_t jitter_ps = 0;
    double background_rate_hz = 0.0;
    double origin_s = 0.0;  // dataset time of timestamp 0
    std::optional<double> L0;  // concentration written by ingest-timetags
};

struct RunConfig {
    std::optional<std::uint64_t> seed;
    photon::ProbeKind probe = photon::ProbeKind::HeraldedSinglePhoton;
    photon::SamplingPlan sampling{};
    double duration_s = 100.0;       // recorded time after injection
    double pre_injection_s = 0.0;    // recorded time before injection

    TransmissionSource source = TransmissionSource::Direct;
    double direct_T0 = 0.06;
    double direct_Tinf = 0.04;       // rise amplitude at the highest concentration
    StackSettings stack{};

    double kd = 0.01;
    double KA = 6.72e4;
    std::vector<kinetics::InjectionRecipe> recipes = kinetics::reference_recipes();

    std::int64_t bootstrap_m = 175;
    std::int64_t bootstrap_p = 15000;
    unsigned threads = 1;

    double fit_from_s = 0.0;
    double steady_center_s = 94.0;
    double steady_width_s = 6.0;
    bool raw_steady_state = false;
    double injection_time_s = 0.0;
    std::optional<double> target_baseline;

    TimeTagSettings timetag{};
    std::string output_dir = "qplas_out";

    // Throws ConfigError naming the offending key.
    void validate() const;
};

// Canonical echo: every key that affects results, in a fixed order, with
// numbers in shortest round-trip form. The seed is included when set; the
// output directory and the thread count are not.
std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config);
std::string format_config(const RunConfig& config);

// Unknown keys, duplicates and malformed values throw ConfigError.
RunConfig parse_config(std::string_view text, const std::string& source);
RunConfig config_from_key_values(const std::vector<std::pair<std::string, std::string>>& kv, const std::string& source);

// Text config, or a JSON run manifest when the content starts with '{'.
RunConfig load_config(const std::string& path);

}  // namespace qplas::runner

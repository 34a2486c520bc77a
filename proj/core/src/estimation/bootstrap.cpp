#include "qplas/estimation/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parallel.hpp"
#include "qplas/errors.hpp"
#include "qplas/estimation/linear_fit.hpp"
#include "qplas/photon_stats.hpp"

namespace qplas::estimation {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t stream_tag(std::uint64_t base, NoiseMode mode) {
    return base + (mode == NoiseMode::Classical ? 0x100u : 0u);
}

std::vector<double> bin_means(const ExperimentDataset& ds) {
    std::vector<double> out;
    out.reserve(ds.bins());
    for (const auto& bin : ds.samples) out.push_back(photon::set_statistics(bin).mean_T);
    return out;
}

// Mean of m draws from one bin.
double averaged_bin_draw(const std::vector<double>& bin, double bin_mean, NoiseMode mode, std::int64_t m, double nu,
                         Rng& rng) {
    double acc = 0.0;
    if (mode == NoiseMode::Quantum) {
        std::uniform_int_distribution<std::size_t> pick(0, bin.size() - 1);
        for (std::int64_t k = 0; k < m; ++k) acc += bin[pick(rng)];
        return acc / static_cast<double>(m);
    }
    const double sigma = std::sqrt(bin_mean / nu);
    if (sigma == 0.0) return bin_mean;
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::int64_t k = 0; k < m; ++k) acc += noise(rng);
    return bin_mean + acc / static_cast<double>(m);
}

std::string percent_warning(std::size_t count, std::size_t total, const char* what) {
    return std::to_string(count) + " of " + std::to_string(total) + " " + what;
}

ExperimentDataset subset_from(const ExperimentDataset& ds, double from_s) {
    ExperimentDataset out;
    out.label = ds.label;
    out.L0 = ds.L0;
    for (std::size_t b = 0; b < ds.bins(); ++b) {
        if (ds.time_s[b] >= from_s) {
            out.time_s.push_back(ds.time_s[b]);
            out.samples.push_back(ds.samples[b]);
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(NoiseMode mode) noexcept {
    return mode == NoiseMode::Quantum ? "quantum" : "classical";
}

NoiseMode parse_noise_mode(std::string_view name) {
    if (name == "quantum") return NoiseMode::Quantum;
    if (name == "classical") return NoiseMode::Classical;
    throw DomainError("unknown mode '" + std::string(name) + "' (expected quantum or classical)");
}

void BootstrapConfig::validate() const {
    if (m < 1) throw DomainError("bootstrap: m must be >= 1");
    if (p < 1) throw DomainError("bootstrap: p must be >= 1");
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return {kNaN, kNaN, 0};
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
        return {values.front(), 0.0, values.size()};
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

kinetics::Sensorgram bootstrap_sensorgram(const ExperimentDataset& ds, Rng& rng) {
    if (ds.bins() == 0) throw DomainError("bootstrap_sensorgram: dataset has no bins");
    kinetics::Sensorgram s;
    s.time_s = ds.time_s;
    s.T_mean.reserve(ds.bins());
    for (const auto& bin : ds.samples) {
        if (bin.empty()) throw DomainError("bootstrap_sensorgram: empty bin");
        std::uniform_int_distribution<std::size_t> pick(0, bin.size() - 1);
        s.T_mean.push_back(bin[pick(rng)]);
    }
    s.T_std.assign(ds.bins(), 0.0);
    return s;
}

kinetics::Sensorgram classical_surrogate_sensorgram(const kinetics::Sensorgram& mean, double nu, Rng& rng) {
    if (!(nu >= 1.0)) throw DomainError("classical_surrogate_sensorgram: nu must be >= 1");
    kinetics::Sensorgram s;
    s.time_s = mean.time_s;
    s.T_mean.reserve(mean.size());
    for (double m : mean.T_mean) {
        if (!(m >= 0.0)) throw DomainError("classical_surrogate_sensorgram: mean transmission must be >= 0");
        const double sigma = std::sqrt(m / nu);
        if (sigma == 0.0) {
            s.T_mean.push_back(m);
            continue;
        }
        std::normal_distribution<double> noise(0.0, sigma);
        s.T_mean.push_back(m + noise(rng));
    }
    s.T_std.assign(mean.size(), 0.0);
    return s;
}

std::vector<double> averaged_draw(const ExperimentDataset& ds, const std::vector<double>& means, NoiseMode mode,
                                  std::int64_t m, double nu, Rng& rng) {
    if (m < 1) throw DomainError("averaged_draw: m must be >= 1");
    std::vector<double> acc(ds.bins(), 0.0);
    if (mode == NoiseMode::Quantum) {
        std::vector<std::uniform_int_distribution<std::size_t>> picks;
        picks.reserve(ds.bins());
        for (const auto& bin : ds.samples) picks.emplace_back(0, bin.size() - 1);
        for (std::int64_t k = 0; k < m; ++k) {
            for (std::size_t b = 0; b < ds.bins(); ++b) acc[b] += ds.samples[b][picks[b](rng)];
        }
        for (double& a : acc) a /= static_cast<double>(m);
        return acc;
    }
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<double> sigma(ds.bins());
    for (std::size_t b = 0; b < ds.bins(); ++b) sigma[b] = std::sqrt(means[b] / nu);
    for (std::int64_t k = 0; k < m; ++k) {
        for (std::size_t b = 0; b < ds.bins(); ++b) {
            if (sigma[b] > 0.0) acc[b] += sigma[b] * unit(rng);
        }
    }
    for (std::size_t b = 0; b < ds.bins(); ++b) acc[b] = means[b] + acc[b] / static_cast<double>(m);
    return acc;
}

KsEstimate estimate_ks(const ExperimentDataset& full, const BootstrapConfig& config, NoiseMode mode,
                       const KsOptions& options) {
    config.validate();
    full.validate();
    if (!(options.nu >= 1.0)) throw DomainError("estimate_ks: nu must be >= 1");
    const ExperimentDataset ds = subset_from(full, options.fit_from_s);
    if (ds.bins() < 3) throw DomainError("estimate_ks: need at least 3 bins after injection");
    const auto means = bin_means(ds);

    const auto p = static_cast<std::size_t>(config.p);
    std::vector<double> ks(p, kNaN), T0(p, kNaN), Tinf(p, kNaN);
    const auto tag = stream_tag(streams::kBootstrapKs, mode);

    detail::parallel_for(p, config.threads, [&](std::size_t r) {
        Rng rng = make_stream(config.rng_seed, tag, r);
        const auto y = averaged_draw(ds, means, mode, config.m, options.nu, rng);
        const auto fit = fit_association(ds.time_s, y, options.lm);
        if (fit.converged && fit.params.allFinite()) {
            T0[r] = fit.params[kT0];
            Tinf[r] = fit.params[kTinf];
            ks[r] = fit.params[kKs];
        }
    });

    KsEstimate out;
    out.attempted = p;
    std::vector<double> t0v, tinfv;
    for (std::size_t r = 0; r < p; ++r) {
        if (std::isnan(ks[r])) {
            ++out.failed;
            continue;
        }
        out.distribution.push_back(ks[r]);
        t0v.push_back(T0[r]);
        tinfv.push_back(Tinf[r]);
    }
    if (out.distribution.empty()) throw EstimationError("estimate_ks: no bootstrap fit converged");
    if (out.failed * 100 > p) out.warnings.push_back(percent_warning(out.failed, p, "ks fits did not converge"));
    out.ks = summarize(out.distribution);
    out.T0 = summarize(t0v);
    out.Tinf = summarize(tinfv);
    return out;
}

std::vector<std::size_t> steady_state_bins(const ExperimentDataset& ds, double center_s, double width_s) {
    if (!(width_s > 0.0)) throw DomainError("steady-state window width must be > 0");
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < ds.bins(); ++b) {
        if (std::abs(ds.time_s[b] - center_s) <= 0.5 * width_s) out.push_back(b);
    }
    return out;
}

AffinityEstimate estimate_affinity(std::span<const AffinityInput> inputs, std::span<const double> ks_distribution,
                                   double L0_ref, const BootstrapConfig& config, NoiseMode mode,
                                   const AffinityOptions& options) {
    config.validate();
    if (inputs.size() < 3) throw DomainError("estimate_affinity: need at least 3 concentrations");
    if (ks_distribution.empty()) throw DomainError("estimate_affinity: empty ks distribution");
    if (!(L0_ref > 0.0)) throw DomainError("estimate_affinity: reference L0 must be > 0");
    if (!(options.nu >= 1.0)) throw DomainError("estimate_affinity: nu must be >= 1");

    struct Prepared {
        const ExperimentDataset* ds;
        std::vector<std::size_t> steady;
        std::vector<double> steady_means;
        double baseline;
        double inv_L0;
    };
    std::vector<Prepared> prep;
    for (const auto& in : inputs) {
        if (in.dataset == nullptr) throw DomainError("estimate_affinity: null dataset");
        in.dataset->validate();
        if (!(in.L0 > 0.0)) throw DomainError("estimate_affinity: concentrations must be > 0");
        Prepared pr{in.dataset, steady_state_bins(*in.dataset, options.steady_center_s, options.steady_width_s), {},
                    options.raw_steady_state ? 0.0 : baseline_transmission(*in.dataset), 1.0 / in.L0};
        if (pr.steady.empty()) {
            throw DomainError("estimate_affinity: dataset '" + in.dataset->label +
                              "' has no bin inside the steady-state window");
        }
        for (auto b : pr.steady) pr.steady_means.push_back(photon::set_statistics(in.dataset->samples[b]).mean_T);
        prep.push_back(std::move(pr));
    }

    const auto p = static_cast<std::size_t>(config.p);
    std::vector<double> KA(p, kNaN), kd(p, kNaN), ka(p, kNaN);
    const auto tag = stream_tag(streams::kBootstrapAffinity, mode);

    detail::parallel_for(p, config.threads, [&](std::size_t r) {
        Rng rng = make_stream(config.rng_seed, tag, r);
        std::vector<double> xs, ys;
        xs.reserve(prep.size());
        ys.reserve(prep.size());
        bool ok = true;
        for (const auto& pr : prep) {
            double tss = 0.0;
            for (std::size_t j = 0; j < pr.steady.size(); ++j) {
                tss += averaged_bin_draw(pr.ds->samples[pr.steady[j]], pr.steady_means[j], mode, config.m, options.nu,
                                         rng);
            }
            tss /= static_cast<double>(pr.steady.size());
            const double amplitude = tss - pr.baseline;
            if (!(amplitude > 0.0)) ok = false;
            xs.push_back(pr.inv_L0);
            ys.push_back(1.0 / amplitude);
        }
        if (!ok) return;
        const auto line = linear_fit(xs, ys);
        if (!(line.slope > 0.0) || !(line.intercept > 0.0)) return;
        const double ks = ks_distribution[r % ks_distribution.size()];
        if (!(ks > 0.0)) return;
        const auto aff = kinetics::affinity_from_reciprocal_fit(line.slope, line.intercept);
        const auto rates = kinetics::rates_from_affinity(ks, aff.KA, L0_ref);
        KA[r] = aff.KA;
        kd[r] = rates.kd;
        ka[r] = rates.ka;
    });

    AffinityEstimate out;
    out.attempted = p;
    for (std::size_t r = 0; r < p; ++r) {
        if (std::isnan(KA[r])) {
            ++out.discarded;
            continue;
        }
        out.KA_distribution.push_back(KA[r]);
        out.kd_distribution.push_back(kd[r]);
        out.ka_distribution.push_back(ka[r]);
    }
    if (out.KA_distribution.empty()) throw EstimationError("estimate_affinity: every repetition was discarded");
    if (out.discarded * 20 > p) {
        out.warnings.push_back(percent_warning(out.discarded, p, "affinity repetitions discarded (non-positive slope or intercept)"));
    }
    out.KA = summarize(out.KA_distribution);
    out.kd = summarize(out.kd_distribution);
    out.ka = summarize(out.ka_distribution);
    return out;
}

}  // namespace qplas::estimation

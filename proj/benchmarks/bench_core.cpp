#include <algorithm>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "qplas/estimation/association_fit.hpp"
#include "qplas/estimation/bootstrap.hpp"
#include "qplas/kinetics.hpp"
#include "qplas/photon_stats.hpp"
#include "qplas/random.hpp"
#include "qplas/spr_optics.hpp"
#include "qplas/timetag.hpp"

using namespace qplas;

namespace {

estimation::ExperimentDataset reference_dataset(std::uint64_t seed) {
    estimation::ExperimentDataset ds;
    photon::SamplingPlan plan;
    Rng rng = make_stream(seed, streams::kSimulate);
    for (double t = 0.0; t < 100.0; t += 6.0) {
        ds.time_s.push_back(t);
        ds.samples.push_back(photon::sample_set_transmissions(kinetics::model_transmission(t, 0.04, 0.0411, 0.06), plan,
                                                              photon::ProbeKind::HeraldedSinglePhoton, rng));
    }
    return ds;
}

void BM_AssociationFit(benchmark::State& state) {
    std::vector<double> t, y;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 1e-3);
    for (int i = 0; i < 17; ++i) {
        t.push_back(6.0 * i);
        y.push_back(kinetics::association_curve(t.back(), 0.06, 0.04, 0.0411) + noise(rng));
    }
    for (auto _ : state) benchmark::DoNotOptimize(estimation::fit_association(t, y));
}
BENCHMARK(BM_AssociationFit);

void BM_MatchCoincidences(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::int64_t> anywhere(0, static_cast<std::int64_t>(n) * 20000);
    std::uniform_int_distribution<std::int64_t> delay(0, 4000);
    std::vector<std::int64_t> a(n), b(n);
    for (auto& v : a) v = anywhere(rng);
    std::sort(a.begin(), a.end());
    for (std::size_t i = 0; i < n; ++i) b[i] = i % 2 ? a[i] + delay(rng) : anywhere(rng);
    std::sort(b.begin(), b.end());
    for (auto _ : state) benchmark::DoNotOptimize(timetag::match_coincidences(a, b, 4000));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_MatchCoincidences)->Arg(10000)->Arg(1000000);

void BM_Reflectance(benchmark::State& state) {
    optics::LayerStack s;
    s.prism_index = 1.5106;
    s.analyte_index = 1.329;
    s.wavelength_nm = 810.0;
    s.layers = {{{-25.8, 1.63}, 50.0}};
    double th = 1.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(optics::reflectance(s, th));
        th = th < 1.2 ? th + 1e-6 : 1.1;
    }
}
BENCHMARK(BM_Reflectance);

void BM_ResonanceSearch(benchmark::State& state) {
    optics::LayerStack s;
    s.prism_index = 1.5106;
    s.analyte_index = 1.329;
    s.wavelength_nm = 810.0;
    s.layers = {{{-25.8, 1.63}, 50.0}};
    for (auto _ : state) benchmark::DoNotOptimize(optics::find_resonance_angle(s));
}
BENCHMARK(BM_ResonanceSearch);

// One bootstrap repetition: m averaged resamples plus one fit.
void BM_BootstrapRepetition(benchmark::State& state) {
    const auto ds = reference_dataset(3);
    estimation::BootstrapConfig cfg;
    cfg.p = 1;
    cfg.rng_seed = 4;
    const auto mode = state.range(0) ? estimation::NoiseMode::Classical : estimation::NoiseMode::Quantum;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimation::estimate_ks(ds, cfg, mode));
        ++cfg.rng_seed;
    }
}
BENCHMARK(BM_BootstrapRepetition)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "qplas/csv.hpp"
#include "qplas/errors.hpp"
#include "qplas/photon_stats.hpp"
#include "qplas/runner/commands.hpp"

using namespace qplas;
using namespace qplas::runner;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("qplas_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

RunConfig small_config(const fs::path& out, std::uint64_t seed = 11) {
    RunConfig c;
    c.seed = seed;
    c.sampling.mu = 200;
    c.bootstrap_p = 200;
    c.bootstrap_m = 50;
    c.output_dir = out.string();
    return c;
}

std::vector<std::string> dataset_files(const CommandResult& r) {
    std::vector<std::string> out;
    for (const auto& f : r.files) {
        if (f.filename().string().rfind("dataset_", 0) == 0) out.push_back(f.string());
    }
    return out;
}

const estimation::Summary& row(const EstimateReport& r, const std::string& p, estimation::NoiseMode m) {
    for (const auto& x : r.rows) {
        if (x.parameter == p && x.mode == m) return x.summary;
    }
    FAIL("missing row " << p);
    static estimation::Summary none;
    return none;
}

}  // namespace

TEST_CASE("time grid") {
    RunConfig c;
    c.duration_s = 100;
    auto g = time_grid(c);
    REQUIRE(g.size() == 17);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 96.0);
    c.pre_injection_s = 12;
    g = time_grid(c);
    CHECK(g.front() == -12.0);
    CHECK(g.size() == 19);
    c.duration_s = 0;
    CHECK(time_grid(c).empty());
}

TEST_CASE("simulate writes one dataset per reference injection") {
    TempDir dir("simulate");
    const auto c = small_config(dir.path);
    const auto r = cmd_simulate(c);
    const auto files = dataset_files(r);
    REQUIRE(files.size() == 4);
    CHECK(r.files.back().filename() == "manifest_simulate.json");
    const double expected[] = {4.659e-5, 3.106e-5, 2.330e-5, 1.553e-5};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto ds = load_dataset(files[i]);
        REQUIRE(ds.L0);
        CHECK(*ds.L0 == doctest::Approx(expected[i]).epsilon(1e-3));
        CHECK(ds.bins() == 17);
        CHECK(ds.samples[0].size() == 200);
    }
    const auto curves = truth_curves(c);
    CHECK(curves[0].T.front() == 0.06);
    CHECK(curves[0].T.back() < 0.10);
    CHECK(curves[0].occupancy > curves[3].occupancy);
}

TEST_CASE("zero duration gives header-only datasets") {
    TempDir dir("empty");
    auto c = small_config(dir.path);
    c.duration_s = 0;
    const auto r = cmd_simulate(c);
    for (const auto& f : dataset_files(r)) {
        CHECK(csv::read_text_file(f) == "time_s,set_index,T_i,L0_M\n");
    }
}

TEST_CASE("same seed, same bytes; manifests reproduce runs") {
    TempDir a("det_a"), b("det_b"), m("det_m");
    const auto ra = cmd_simulate(small_config(a.path));
    const auto rb = cmd_simulate(small_config(b.path));
    REQUIRE(ra.files.size() == rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        CHECK(csv::read_text_file(ra.files[i]) == csv::read_text_file(rb.files[i]));
    }
    auto from_manifest = load_config(ra.files.back().string());
    from_manifest.output_dir = m.path.string();
    const auto rm = cmd_simulate(from_manifest);
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        CHECK(csv::read_text_file(ra.files[i]) == csv::read_text_file(rm.files[i]));
    }
    TempDir d("det_d");
    const auto rd = cmd_simulate(small_config(d.path, 12));
    CHECK(csv::read_text_file(ra.files[0]) != csv::read_text_file(rd.files[0]));
}

TEST_CASE("estimate recovers the simulated rate and is thread independent") {
    TempDir dir("estimate");
    auto c = small_config(dir.path);
    c.sampling.mu = 2000;
    const auto files = dataset_files(cmd_simulate(c));
    const auto r1 = cmd_estimate(files, c, ModeSelection::Both);
    const auto text1 = csv::read_text_file(dir / "results.csv");
    CHECK(text1.rfind("parameter,mode,mean,std,n\n", 0) == 0);

    const auto table = csv::parse(text1, "results.csv");
    CHECK(table.rows.size() == 14);
    const auto truth = truth_curves(c);
    for (const auto& rowv : table.rows) {
        if (rowv[0].rfind("ks[", 0) != 0) continue;
        const auto idx = static_cast<std::size_t>(rowv[0][std::string("ks[dataset_0").size()] - '1');
        const double mean = csv::parse_number(rowv[2], "r", 1);
        const double sd = csv::parse_number(rowv[3], "r", 1);
        CHECK(std::abs(mean - truth[idx].ks) <= 3.0 * sd);
    }

    auto c4 = c;
    c4.threads = 4;
    cmd_estimate(files, c4, ModeSelection::Both);
    CHECK(csv::read_text_file(dir / "results.csv") == text1);

    const auto manifest = csv::read_text_file(dir / "manifest_estimate.json");
    CHECK(manifest.find("\"retained_repetitions\"") != std::string::npos);
    CHECK(manifest.find("fnv1a64") != std::string::npos);
    CHECK_FALSE(r1.report.empty());
}

TEST_CASE("noiseless datasets give zero spread") {
    TempDir dir("noiseless");
    auto c = small_config(dir.path);
    std::vector<estimation::ExperimentDataset> sets;
    for (const auto& curve : truth_curves(c)) {
        estimation::ExperimentDataset ds;
        ds.label = curve.label;
        ds.L0 = curve.L0;
        ds.time_s = curve.time_s;
        for (double T : curve.T) ds.samples.emplace_back(10, T);
        sets.push_back(ds);
    }
    const auto rep = run_estimation(sets, c, ModeSelection::Quantum);
    for (const auto& r : rep.rows) CHECK(r.summary.std == 0.0);
    CHECK(row(rep, "ks[1.5%]", estimation::NoiseMode::Quantum).mean ==
          doctest::Approx(truth_curves(c)[0].ks).epsilon(1e-8));
}

TEST_CASE("estimate input errors") {
    TempDir dir("estimate_errors");
    auto c = small_config(dir.path);
    csv::write_text_file(dir / "no_l0.csv", "time_s,set_index,T_i\n0,0,0.1\n6,0,0.1\n12,0,0.1\n");
    try {
        cmd_estimate({dir / "no_l0.csv"}, c, ModeSelection::Both);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(exit_code_for(e) == kExitData);
    }
    csv::write_text_file(dir / "bad.csv", "time_s,set_index,T_i,L0_M\n0,0,0.1,1e-5\n6,0,x,1e-5\n");
    try {
        cmd_estimate({dir / "bad.csv"}, c, ModeSelection::Both);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(cmd_estimate({dir / "absent.csv"}, c, ModeSelection::Both), IoError);
    auto unseeded = c;
    unseeded.seed.reset();
    try {
        cmd_estimate({dir / "bad.csv"}, unseeded, ModeSelection::Both);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(exit_code_for(e) == kExitConfig);
    }
    CHECK(exit_code_for(EstimationError("x")) == kExitEstimation);
    CHECK(parse_mode_selection("classical") == ModeSelection::Classical);
    CHECK_THROWS_AS(parse_mode_selection("loud"), ConfigError);
}

TEST_CASE("compare against the noise laws") {
    TempDir dir("compare");
    auto c = small_config(dir.path);
    c.sampling.mu = 2000;
    c.duration_s = 300;
    const auto files = dataset_files(cmd_simulate(c));
    const auto r = cmd_compare({files[0]}, c);
    const auto table = csv::parse(csv::read_text_file(r.files[0]), "compare");
    CHECK(table.header == std::vector<std::string>{"time_s", "dT_measured", "dT_quantum_theory",
                                                    "dT_classical_theory", "enhancement"});
    double ss = 0.0;
    for (const auto& rowv : table.rows) {
        const double meas = csv::parse_number(rowv[1], "c", 1);
        const double q = csv::parse_number(rowv[2], "c", 1);
        ss += (meas / q - 1.0) * (meas / q - 1.0);
    }
    CHECK(std::sqrt(ss / static_cast<double>(table.rows.size())) < 0.05);
    const double last = csv::parse_number(table.rows.back()[4], "c", 1);
    CHECK(last == doctest::Approx(1.0 / std::sqrt(1.0 - 0.1)).epsilon(0.04));

    TempDir cdir("compare_coherent");
    auto cc = c;
    cc.probe = photon::ProbeKind::CoherentUnitMean;
    cc.output_dir = cdir.path.string();
    const auto cfiles = dataset_files(cmd_simulate(cc));
    const auto cr = cmd_compare({cfiles[0]}, cc);
    const auto ct = csv::parse(csv::read_text_file(cr.files[0]), "compare");
    double mean_enh = 0.0;
    for (const auto& rowv : ct.rows) mean_enh += csv::parse_number(rowv[4], "c", 1);
    mean_enh /= static_cast<double>(ct.rows.size());
    // Per-bin relative error of a std from 2000 sets is about 1.6%.
    CHECK(mean_enh == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("steady state at T = 0.10 shows the closed-form enhancement") {
    TempDir dir("compare_steady");
    estimation::ExperimentDataset ds;
    ds.L0 = 1e-5;
    photon::SamplingPlan plan;
    plan.mu = 20000;
    Rng rng = make_stream(4, 4);
    for (int b = 0; b < 5; ++b) {
        ds.time_s.push_back(6.0 * b);
        ds.samples.push_back(photon::sample_set_transmissions(0.10, plan, photon::ProbeKind::HeraldedSinglePhoton, rng));
    }
    csv::write_text_file(dir / "steady.csv", estimation::format_dataset_csv(ds));
    auto c = small_config(dir.path);
    const auto r = cmd_compare({dir / "steady.csv"}, c);
    const auto t = csv::parse(csv::read_text_file(r.files[0]), "compare");
    double m = 0.0;
    for (const auto& rowv : t.rows) m += csv::parse_number(rowv[4], "c", 1);
    m /= 5.0;
    CHECK(m == doctest::Approx(1.0541).epsilon(0.01));
}

TEST_CASE("time-tag path round trips through ingestion") {
    TempDir dir("timetags");
    auto c = small_config(dir.path);
    c.duration_s = 12;
    c.pre_injection_s = 6;
    c.timetag.enabled = true;
    c.recipes.resize(1);
    const auto r = cmd_simulate(c);
    std::string tags, dataset;
    for (const auto& f : r.files) {
        if (f.filename().string().rfind("timetags_", 0) == 0) tags = f.string();
        if (f.filename().string().rfind("dataset_", 0) == 0) dataset = f.string();
    }
    REQUIRE_FALSE(tags.empty());
    const auto ds = load_dataset(dataset);
    CHECK(ds.time_s == std::vector<double>{-6, 0, 6});
    CHECK(ds.samples[1].size() > 1900);

    TempDir out("timetags_ingest");
    auto ic = c;
    ic.timetag.origin_s = -6;
    ic.timetag.L0 = ds.L0;
    ic.output_dir = out.path.string();
    const auto ir = cmd_ingest_timetags({tags}, ic);
    CHECK(csv::read_text_file(ir.files[0]) == csv::read_text_file(dataset));

    // The same streams split into one file per channel.
    const auto streams = timetag::parse_timetag_csv(csv::read_text_file(tags), tags);
    std::string a = "timestamp_ps\n", b = "timestamp_ps\n";
    for (auto t : streams.a) a += std::to_string(t) + "\n";
    for (auto t : streams.b) b += std::to_string(t) + "\n";
    csv::write_text_file(out / "a.csv", a);
    csv::write_text_file(out / "b.csv", b);
    const auto split = cmd_ingest_timetags({out / "a.csv", out / "b.csv"}, ic);
    CHECK(csv::read_text_file(split.files[0]) == csv::read_text_file(dataset));
    CHECK_THROWS_AS(cmd_ingest_timetags({}, ic), ConfigError);
}

TEST_CASE("stack-driven transmission") {
    TempDir dir("stack");
    auto c = small_config(dir.path);
    c.source = TransmissionSource::Stack;
    const auto curves = truth_curves(c);
    const auto op = optics::operating_point(c.stack.stack(), c.stack.operating_drop);
    CHECK(curves[0].T.front() == doctest::Approx(optics::system_transmission(op.reflectance, c.stack.budget)));
    for (const auto& curve : curves) {
        for (std::size_t i = 1; i < curve.T.size(); ++i) CHECK(curve.T[i] >= curve.T[i - 1]);
    }
    CHECK(curves[0].T.back() - curves[0].T.front() > curves[3].T.back() - curves[3].T.front());
    CHECK(dataset_files(cmd_simulate(c)).size() == 4);

    c.stack.film_permittivity_re = 2.0;
    c.stack.film_permittivity_im = 0.0;
    CHECK_THROWS_AS(truth_curves(c), ConfigError);
}

TEST_CASE("unwritable output directory") {
    TempDir dir("unwritable");
    csv::write_text_file(dir / "file", "x");
    auto c = small_config(dir.path / "file" / "sub");
    CHECK_THROWS_AS(cmd_simulate(c), IoError);
}

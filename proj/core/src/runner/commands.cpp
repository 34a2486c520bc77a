#include "qplas/runner/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "qplas/csv.hpp"
#include "qplas/errors.hpp"
#include "qplas/photon_stats.hpp"
#include "qplas/random.hpp"
#include "qplas/spr_optics.hpp"

namespace qplas::runner {

namespace fs = std::filesystem;
using estimation::ExperimentDataset;
using estimation::NoiseMode;
using Json = nlohmann::ordered_json;

namespace {

std::string slug(const std::string& label) {
    std::string out;
    for (char ch : label) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || ch == '.' || ch == '-' || ch == '_') out += ch;
        else if (ch == '%') out += "pct";
        else out += '_';
    }
    return out;
}

std::string two_digits(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", i);
    return buf;
}

// FNV-1a, recorded in manifests to identify input files.
std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void prepare_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

Json config_echo(const RunConfig& config) {
    Json j = Json::object();
    for (const auto& [k, v] : to_key_values(config)) j[k] = v;
    return j;
}

Json manifest_head(const RunConfig& config, std::string_view command) {
    Json m;
    m["tool"] = "qplas";
    m["version"] = std::string(version());
    m["command"] = std::string(command);
    m["seed"] = config.seed ? Json(*config.seed) : Json(nullptr);
    m["config"] = config_echo(config);
    return m;
}

fs::path write_manifest(const RunConfig& config, std::string_view command, Json manifest) {
    const fs::path path = fs::path(config.output_dir) / ("manifest_" + std::string(command) + ".json");
    csv::write_text_file(path, manifest.dump(2) + "\n");
    return path;
}

std::uint64_t require_seed(const RunConfig& config) {
    if (!config.seed) throw ConfigError("seed: a seed is required (config key `seed` or --seed)");
    return *config.seed;
}

struct LoadedInput {
    std::string name;
    std::string hash;
    std::size_t bytes = 0;
};

Json inputs_json(const std::vector<LoadedInput>& inputs) {
    Json arr = Json::array();
    for (const auto& in : inputs) {
        Json e;
        e["file"] = in.name;
        e["bytes"] = in.bytes;
        e["fnv1a64"] = in.hash;
        arr.push_back(e);
    }
    return arr;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

std::string_view version() noexcept { return QPLAS_VERSION; }

ModeSelection parse_mode_selection(std::string_view name) {
    if (name == "quantum") return ModeSelection::Quantum;
    if (name == "classical") return ModeSelection::Classical;
    if (name == "both") return ModeSelection::Both;
    throw ConfigError("--mode: expected quantum, classical or both, got '" + std::string(name) + "'");
}

std::vector<NoiseMode> modes_of(ModeSelection selection) {
    switch (selection) {
        case ModeSelection::Quantum: return {NoiseMode::Quantum};
        case ModeSelection::Classical: return {NoiseMode::Classical};
        case ModeSelection::Both: break;
    }
    return {NoiseMode::Quantum, NoiseMode::Classical};
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const IoError*>(&e) ||
        dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ContractError*>(&e)) {
        return kExitData;
    }
    return kExitEstimation;
}

std::vector<double> time_grid(const RunConfig& config) {
    std::vector<double> grid;
    if (!(config.duration_s > 0.0)) return grid;
    const double bin = config.sampling.bin_seconds;
    const auto first = -static_cast<std::int64_t>(std::floor(config.pre_injection_s / bin + 1e-9));
    for (std::int64_t k = first;; ++k) {
        const double t = static_cast<double>(k) * bin;
        if (t >= config.duration_s - 1e-9 * bin) break;
        grid.push_back(t);
    }
    return grid;
}

std::vector<TruthCurve> truth_curves(const RunConfig& config) {
    config.validate();
    const auto grid = time_grid(config);
    const double ka = config.KA * config.kd;

    std::vector<TruthCurve> curves;
    double max_L0 = 0.0;
    for (const auto& r : config.recipes) {
        TruthCurve c;
        c.label = r.label;
        c.L0 = kinetics::cavity_concentration(r);
        c.ks = kinetics::observable_rate(ka, c.L0, config.kd);
        c.occupancy = config.KA * c.L0 / (1.0 + config.KA * c.L0);
        c.time_s = grid;
        max_L0 = std::max(max_L0, c.L0);
        curves.push_back(std::move(c));
    }

    if (config.source == TransmissionSource::Direct) {
        // Tinf is the rise at the highest concentration; the others follow the
        // same saturation amplitude.
        const double top_occupancy = config.KA * max_L0 / (1.0 + config.KA * max_L0);
        const double Tmax = top_occupancy > 0.0 ? config.direct_Tinf / top_occupancy : 0.0;
        for (auto& c : curves) {
            const double amplitude = kinetics::steady_state_amplitude(Tmax, config.KA, c.L0);
            for (double t : grid) {
                c.T.push_back(t < 0.0 ? config.direct_T0 : kinetics::model_transmission(t, amplitude, c.ks, config.direct_T0));
            }
        }
        return curves;
    }

    const auto stack = config.stack.stack();
    optics::OperatingPoint op;
    try {
        op = optics::operating_point(stack, config.stack.operating_drop);
    } catch (const NoResonanceError& e) {
        throw ConfigError(std::string("stack: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("stack: ") + e.what());
    }
    for (auto& c : curves) {
        for (double t : grid) {
            const double bound = t < 0.0 ? 0.0 : c.occupancy * -std::expm1(-c.ks * t);
            const double n = optics::analyte_index_trajectory(bound, config.stack.buffer_index, config.stack.delta_n_max);
            const double R = optics::reflectance(stack.with_analyte_index(n), op.theta);
            c.T.push_back(optics::system_transmission(R, config.stack.budget));
        }
    }
    return curves;
}

ExperimentDataset dataset_from_streams(const timetag::Streams& streams, const RunConfig& config) {
    const auto kind = config.timetag.symmetric_window ? timetag::WindowKind::Symmetric : timetag::WindowKind::OneSided;
    const auto pairs = timetag::match_coincidences(streams.a, streams.b, config.timetag.window_ps, kind);
    const auto sets = timetag::group_into_timed_sets(streams.a, pairs, config.sampling.nu);

    const double bin_s = config.sampling.bin_seconds;
    const double bin_ps = bin_s * 1e12;
    const auto nu = static_cast<double>(config.sampling.nu);
    std::map<std::int64_t, std::vector<double>> bins;
    for (const auto& s : sets) {
        const auto k = static_cast<std::int64_t>(std::floor(static_cast<double>(s.first_herald_ps) / bin_ps));
        bins[k].push_back(static_cast<double>(s.transmitted) / nu);
    }

    ExperimentDataset ds;
    ds.L0 = config.timetag.L0;
    std::int64_t expected = bins.empty() ? 0 : bins.begin()->first;
    for (auto& [k, values] : bins) {
        if (k != expected) {
            throw DomainError("time tags: no complete herald set starts in bin " + std::to_string(expected) +
                              "; the record has a gap");
        }
        ++expected;
        ds.time_s.push_back(config.timetag.origin_s + static_cast<double>(k) * bin_s);
        ds.samples.push_back(std::move(values));
    }
    return ds;
}

CommandResult cmd_simulate(const RunConfig& config) {
    config.validate();
    const auto seed = require_seed(config);
    const auto curves = truth_curves(config);
    const fs::path out_dir(config.output_dir);
    prepare_output_dir(out_dir);

    CommandResult result;
    Json outputs = Json::array();
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        const std::string stem = "dataset_" + two_digits(i + 1) + "_" + slug(c.label);
        ExperimentDataset ds;
        ds.label = stem;
        ds.L0 = c.L0;
        Json entry;

        if (config.timetag.enabled) {
            Rng rng = make_stream(seed, streams::kTimeTags, i);
            timetag::Streams all;
            for (std::size_t b = 0; b < c.time_s.size(); ++b) {
                timetag::StreamSimulation sim;
                sim.herald_rate_hz = config.timetag.herald_rate_hz;
                sim.transmission = c.T[b];
                sim.duration_s = config.sampling.bin_seconds;
                sim.jitter_ps = config.timetag.jitter_ps;
                sim.background_rate_hz = config.timetag.background_rate_hz;
                sim.start_ps = static_cast<std::int64_t>(std::llround(static_cast<double>(b) * config.sampling.bin_seconds * 1e12));
                auto part = timetag::simulate_streams(sim, rng);
                all.a.insert(all.a.end(), part.a.begin(), part.a.end());
                all.b.insert(all.b.end(), part.b.begin(), part.b.end());
            }
            std::sort(all.b.begin(), all.b.end());
            const fs::path tags = out_dir / ("timetags_" + two_digits(i + 1) + "_" + slug(c.label) + ".csv");
            csv::write_text_file(tags, timetag::format_timetag_csv(all));
            result.files.push_back(tags);
            entry["timetags"] = tags.filename().string();

            RunConfig ingest = config;
            ingest.timetag.origin_s = c.time_s.empty() ? 0.0 : c.time_s.front();
            ingest.timetag.L0 = c.L0;
            ds = dataset_from_streams(all, ingest);
            ds.label = stem;
        } else {
            Rng rng = make_stream(seed, streams::kSimulate, i);
            ds.time_s = c.time_s;
            for (double T : c.T) ds.samples.push_back(photon::sample_set_transmissions(T, config.sampling, config.probe, rng));
        }

        const fs::path file = out_dir / (stem + ".csv");
        csv::write_text_file(file, estimation::format_dataset_csv(ds));
        result.files.push_back(file);

        entry["dataset"] = file.filename().string();
        entry["label"] = c.label;
        entry["L0_M"] = c.L0;
        entry["ks_true"] = c.ks;
        entry["occupancy"] = c.occupancy;
        entry["bins"] = ds.bins();
        outputs.push_back(entry);
    }

    Json manifest = manifest_head(config, "simulate");
    manifest["outputs"] = outputs;
    result.files.push_back(write_manifest(config, "simulate", manifest));

    std::ostringstream report;
    report << "simulated " << curves.size() << " injection(s) into " << out_dir.string() << '\n';
    for (const auto& c : curves) {
        report << "  " << pad(c.label, 8) << " L0 = " << fmt(c.L0) << " M, ks = " << fmt(c.ks) << " 1/s\n";
    }
    result.report = report.str();
    return result;
}

ExperimentDataset load_dataset(const std::string& path) {
    const auto text = csv::read_text_file(path);
    auto ds = estimation::parse_dataset_csv(text, path);
    ds.label = fs::path(path).stem().string();
    return ds;
}

EstimateReport run_estimation(const std::vector<ExperimentDataset>& datasets, const RunConfig& config,
                              ModeSelection selection) {
    config.validate();
    const auto seed = require_seed(config);
    if (datasets.empty()) throw ConfigError("estimate: no dataset given");

    std::vector<ExperimentDataset> aligned;
    for (const auto& ds : datasets) {
        if (!ds.L0) throw DomainError("dataset '" + ds.label + "' has no concentration (L0_M)");
        aligned.push_back(estimation::align_dataset(ds, config.injection_time_s, config.target_baseline).dataset);
        aligned.back().label = ds.label;
    }

    // Rates of the highest concentration feed the affinity chain.
    std::size_t ref = 0;
    for (std::size_t i = 1; i < aligned.size(); ++i) {
        if (*aligned[i].L0 > *aligned[ref].L0) ref = i;
    }

    EstimateReport report;
    const auto modes = modes_of(selection);
    estimation::KsOptions ks_options;
    ks_options.nu = static_cast<double>(config.sampling.nu);
    ks_options.fit_from_s = config.fit_from_s;
    estimation::AffinityOptions aff_options;
    aff_options.nu = ks_options.nu;
    aff_options.steady_center_s = config.steady_center_s;
    aff_options.steady_width_s = config.steady_width_s;
    aff_options.raw_steady_state = config.raw_steady_state;

    for (auto mode : modes) {
        std::vector<double> ref_distribution;
        for (std::size_t i = 0; i < aligned.size(); ++i) {
            estimation::BootstrapConfig bc;
            bc.m = config.bootstrap_m;
            bc.p = config.bootstrap_p;
            bc.threads = config.threads;
            bc.rng_seed = mix64(seed + i + 1);
            const auto est = estimation::estimate_ks(aligned[i], bc, mode, ks_options);
            report.rows.push_back({"ks[" + aligned[i].label + "]", mode, est.ks});
            for (const auto& w : est.warnings) {
                report.warnings.push_back(std::string(to_string(mode)) + " " + aligned[i].label + ": " + w);
            }
            if (i == ref) ref_distribution = est.distribution;
        }
        if (aligned.size() < 3) {
            if (mode == modes.front()) report.warnings.push_back("affinity needs at least 3 datasets; KA, kd and ka skipped");
            continue;
        }
        std::vector<estimation::AffinityInput> inputs;
        for (const auto& ds : aligned) inputs.push_back({&ds, *ds.L0});
        estimation::BootstrapConfig bc;
        bc.m = config.bootstrap_m;
        bc.p = config.bootstrap_p;
        bc.threads = config.threads;
        bc.rng_seed = seed;
        const auto aff = estimation::estimate_affinity(inputs, ref_distribution, *aligned[ref].L0, bc, mode, aff_options);
        report.rows.push_back({"KA", mode, aff.KA});
        report.rows.push_back({"kd", mode, aff.kd});
        report.rows.push_back({"ka", mode, aff.ka});
        for (const auto& w : aff.warnings) report.warnings.push_back(std::string(to_string(mode)) + " affinity: " + w);
    }

    // Side-by-side table, one line per parameter.
    std::vector<std::string> params;
    for (const auto& r : report.rows) {
        if (std::find(params.begin(), params.end(), r.parameter) == params.end()) params.push_back(r.parameter);
    }
    std::size_t width = 10;
    for (const auto& p : params) width = std::max(width, p.size() + 2);
    std::ostringstream t;
    t << pad("parameter", width);
    for (auto mode : modes) t << pad(std::string(to_string(mode)), 34);
    if (modes.size() == 2) t << "improvement";
    t << '\n';
    for (const auto& p : params) {
        t << pad(p, width);
        double stds[2] = {0.0, 0.0};
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                         [&](const ResultRow& r) { return r.parameter == p && r.mode == modes[k]; });
            const auto& s = it->summary;
            stds[k] = s.std;
            const double rel = s.mean != 0.0 ? 100.0 * s.std / std::abs(s.mean) : 0.0;
            t << pad(fmt(s.mean) + " +/- " + fmt(s.std) + " (" + fmt(rel) + "%) ", 34);
        }
        if (modes.size() == 2) t << (stds[1] > 0.0 ? fmt(100.0 * (stds[1] - stds[0]) / stds[1]) + "%" : "-");
        t << '\n';
    }
    report.table = t.str();
    return report;
}

CommandResult cmd_estimate(const std::vector<std::string>& dataset_paths, const RunConfig& config,
                           ModeSelection selection) {
    config.validate();
    require_seed(config);
    if (dataset_paths.empty()) throw ConfigError("estimate: no dataset given");
    std::vector<ExperimentDataset> datasets;
    std::vector<LoadedInput> inputs;
    for (const auto& path : dataset_paths) {
        const auto text = csv::read_text_file(path);
        auto ds = estimation::parse_dataset_csv(text, path);
        if (!ds.L0) throw ParseError(path, 1, "missing L0_M column (cavity concentration)");
        ds.label = fs::path(path).stem().string();
        datasets.push_back(std::move(ds));
        inputs.push_back({fs::path(path).filename().string(), content_hash(text), text.size()});
    }

    const auto report = run_estimation(datasets, config, selection);
    const fs::path out_dir(config.output_dir);
    prepare_output_dir(out_dir);

    std::ostringstream csv_out;
    csv_out << "parameter,mode,mean,std,n\n";
    for (const auto& r : report.rows) {
        csv_out << r.parameter << ',' << to_string(r.mode) << ',' << csv::format_number(r.summary.mean) << ','
                << csv::format_number(r.summary.std) << ',' << r.summary.n << '\n';
    }
    CommandResult result;
    const fs::path results = out_dir / "results.csv";
    csv::write_text_file(results, csv_out.str());
    result.files.push_back(results);
    const fs::path table = out_dir / "results_table.txt";
    csv::write_text_file(table, report.table);
    result.files.push_back(table);

    Json manifest = manifest_head(config, "estimate");
    manifest["mode"] = selection == ModeSelection::Both ? "both" : std::string(to_string(modes_of(selection).front()));
    manifest["inputs"] = inputs_json(inputs);
    Json kept = Json::object();
    for (const auto& r : report.rows) kept[r.parameter + "/" + std::string(to_string(r.mode))] = r.summary.n;
    manifest["retained_repetitions"] = kept;
    manifest["attempted_repetitions"] = config.bootstrap_p;
    manifest["warnings"] = report.warnings;
    manifest["outputs"] = Json::array({results.filename().string(), table.filename().string()});
    result.files.push_back(write_manifest(config, "estimate", manifest));

    result.warnings = report.warnings;
    result.report = report.table;
    return result;
}

CommandResult cmd_compare(const std::vector<std::string>& dataset_paths, const RunConfig& config) {
    config.validate();
    require_seed(config);
    if (dataset_paths.empty()) throw ConfigError("compare: no dataset given");
    const double nu = static_cast<double>(config.sampling.nu);
    const fs::path out_dir(config.output_dir);

    std::vector<std::pair<fs::path, std::string>> pending;
    std::vector<LoadedInput> inputs;
    std::ostringstream report;
    for (const auto& path : dataset_paths) {
        const auto text = csv::read_text_file(path);
        const auto ds = estimation::parse_dataset_csv(text, path);
        inputs.push_back({fs::path(path).filename().string(), content_hash(text), text.size()});
        std::ostringstream out;
        out << "time_s,dT_measured,dT_quantum_theory,dT_classical_theory,enhancement\n";
        double last_enh = 0.0;
        for (std::size_t b = 0; b < ds.bins(); ++b) {
            const auto st = photon::set_statistics(ds.samples[b]);
            const double T = st.mean_T;
            const double dq = T < 1.0 ? photon::dT_quantum(T, nu) : 0.0;
            const double dc = photon::dT_classical(T, nu);
            const double enh = st.std_T > 0.0 ? dc / st.std_T : 0.0;
            last_enh = enh;
            out << csv::format_number(ds.time_s[b]) << ',' << csv::format_number(st.std_T) << ','
                << csv::format_number(dq) << ',' << csv::format_number(dc) << ',' << csv::format_number(enh) << '\n';
        }
        const std::string stem = fs::path(path).stem().string();
        pending.emplace_back(out_dir / ("compare_" + stem + ".csv"), out.str());
        report << stem << ": " << ds.bins() << " bins";
        if (ds.bins() > 0) report << ", final-bin enhancement " << fmt(last_enh);
        report << '\n';
    }

    prepare_output_dir(out_dir);
    CommandResult result;
    Json outputs = Json::array();
    for (const auto& [path, content] : pending) {
        csv::write_text_file(path, content);
        result.files.push_back(path);
        outputs.push_back(path.filename().string());
    }
    Json manifest = manifest_head(config, "compare");
    manifest["inputs"] = inputs_json(inputs);
    manifest["outputs"] = outputs;
    result.files.push_back(write_manifest(config, "compare", manifest));
    result.report = report.str();
    return result;
}

CommandResult cmd_ingest_timetags(const std::vector<std::string>& paths, const RunConfig& config) {
    config.validate();
    require_seed(config);
    if (paths.empty() || paths.size() > 2) {
        throw ConfigError("ingest-timetags: expected one merged file or two single-channel files");
    }
    timetag::Streams streams;
    std::vector<LoadedInput> inputs;
    std::vector<std::string> texts;
    for (const auto& p : paths) {
        texts.push_back(csv::read_text_file(p));
        inputs.push_back({fs::path(p).filename().string(), content_hash(texts.back()), texts.back().size()});
    }
    if (paths.size() == 1) {
        streams = timetag::parse_timetag_csv(texts[0], paths[0]);
    } else {
        streams.a = timetag::parse_channel_csv(texts[0], paths[0]);
        streams.b = timetag::parse_channel_csv(texts[1], paths[1]);
    }

    auto ds = dataset_from_streams(streams, config);
    const std::string stem = fs::path(paths[0]).stem().string();
    ds.label = stem;
    const fs::path out_dir(config.output_dir);
    prepare_output_dir(out_dir);
    const fs::path file = out_dir / (stem + "_dataset.csv");
    csv::write_text_file(file, estimation::format_dataset_csv(ds));

    CommandResult result;
    result.files.push_back(file);
    Json manifest = manifest_head(config, "ingest-timetags");
    manifest["inputs"] = inputs_json(inputs);
    manifest["heralds"] = streams.a.size();
    manifest["probe_events"] = streams.b.size();
    manifest["bins"] = ds.bins();
    manifest["outputs"] = Json::array({file.filename().string()});
    result.files.push_back(write_manifest(config, "ingest-timetags", manifest));

    std::size_t n_sets = 0;
    for (const auto& bin : ds.samples) n_sets += bin.size();
    std::ostringstream report;
    report << stem << ": " << streams.a.size() << " heralds, " << n_sets << " sets of " << config.sampling.nu
           << " in " << ds.bins() << " bins -> " << file.string() << '\n';
    result.report = report.str();
    return result;
}

}  // namespace qplas::runner

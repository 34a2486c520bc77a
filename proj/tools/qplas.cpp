// qplas: simulate, estimate and compare quantum-probed plasmonic sensorgrams.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qplas/errors.hpp"
#include "qplas/runner/commands.hpp"
#include "qplas/runner/config.hpp"

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
    std::string mode = "both";
};

void add_common(CLI::App* cmd, Common& c, bool with_mode) {
    cmd->add_option("--config", c.config_path, "Config file (key = value) or a run manifest (JSON)");
    cmd->add_option("--seed", c.seed, "Random seed (overrides the config)");
    cmd->add_option("--threads", c.threads, "Worker threads for the bootstrap")->check(CLI::Range(1u, 1024u));
    cmd->add_option("--out", c.out, "Output directory (overrides output.dir)");
    if (with_mode) {
        cmd->add_option("--mode", c.mode, "Noise model to estimate under")
            ->check(CLI::IsMember({"quantum", "classical", "both"}));
    }
}

qplas::runner::RunConfig resolve(const Common& c) {
    auto config = c.config_path.empty() ? qplas::runner::RunConfig{} : qplas::runner::load_config(c.config_path);
    if (c.seed) config.seed = *c.seed;
    if (c.threads) config.threads = *c.threads;
    if (!c.out.empty()) config.output_dir = c.out;
    config.validate();
    return config;
}

void print(const qplas::runner::CommandResult& r) {
    std::cout << r.report;
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : r.files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and estimation for quantum-probed plasmonic binding kinetics"};
    app.set_version_flag("--version", std::string(qplas::runner::version()));
    app.require_subcommand(1);

    Common simulate_opts, estimate_opts, compare_opts, ingest_opts;
    std::vector<std::string> estimate_files, compare_files, ingest_files;

    auto* simulate = app.add_subcommand("simulate", "Write synthetic dataset CSVs for every configured injection");
    add_common(simulate, simulate_opts, false);

    auto* estimate = app.add_subcommand("estimate", "Bootstrap ks, KA, kd and ka from dataset CSVs");
    add_common(estimate, estimate_opts, true);
    estimate->add_option("datasets", estimate_files, "Dataset CSVs (time_s,set_index,T_i,L0_M)")->required();

    auto* compare = app.add_subcommand("compare", "Per-bin measured noise against both noise laws");
    add_common(compare, compare_opts, false);
    compare->add_option("datasets", compare_files, "Dataset CSVs")->required();

    auto* ingest = app.add_subcommand("ingest-timetags", "Convert time-tag CSVs into a dataset CSV");
    add_common(ingest, ingest_opts, false);
    ingest->add_option("files", ingest_files, "One merged channel,timestamp_ps file or two single-channel files (A B)")
        ->required()
        ->expected(1, 2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qplas::runner::kExitConfig;
    }

    try {
        using namespace qplas::runner;
        if (*simulate) {
            print(cmd_simulate(resolve(simulate_opts)));
        } else if (*estimate) {
            const auto config = resolve(estimate_opts);
            print(cmd_estimate(estimate_files, config, parse_mode_selection(estimate_opts.mode)));
        } else if (*compare) {
            print(cmd_compare(compare_files, resolve(compare_opts)));
        } else if (*ingest) {
            print(cmd_ingest_timetags(ingest_files, resolve(ingest_opts)));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return qplas::runner::exit_code_for(e);
    }
    return 0;
}

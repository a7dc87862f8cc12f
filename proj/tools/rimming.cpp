// rimming: command-line front end.
//
//   rimming evolve <config> [--output-dir DIR] [--snapshots t1,t2,...]
//   rimming steady <config> [--output-dir DIR]
//   rimming sweep  <config> [--output-dir DIR] [--snapshots ...]
//   rimming check  <config> [--output-dir DIR] [--seed N]
//   rimming reference
//
// Output directory precedence: --output-dir, then RIMMING_OUTPUT_DIR, then [output] dir.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rimming/cli/commands.hpp"
#include "rimming/cli/config.hpp"

int main(int argc, char** argv) {
    using namespace rimming::cli;

    CLI::App app{"Thin-film rimming flow laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rimming::io::artifact_version);

    std::string config_path;
    std::string output_dir;
    std::optional<unsigned long> seed;
    std::vector<double> snapshots;

    struct Sub {
        CLI::App* app;
        Mode mode;
    };
    std::vector<Sub> subs;
    for (Mode m : {Mode::Evolve, Mode::Steady, Mode::Sweep, Mode::Check}) {
        CLI::App* sc = app.add_subcommand(to_string(m), std::string("run a [") + to_string(m) + "] config");
        sc->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sc->add_option("--output-dir", output_dir, "output directory");
        sc->add_option("--seed", seed, "seed for randomized checks");
        sc->add_option("--snapshots", snapshots, "snapshot times, comma separated")->delimiter(',');
        subs.push_back({sc, m});
    }
    CLI::App* ref = app.add_subcommand("reference", "print every configuration key with its default");

    CLI11_PARSE(app, argc, argv);

    if (ref->parsed()) {
        write_reference(std::cout);
        return kOk;
    }

    Mode mode = Mode::Evolve;
    for (const Sub& s : subs) {
        if (s.app->parsed()) mode = s.mode;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const rimming::Error& e) {
        std::cerr << rimming::cli::detail::error_record("InputError", e.what(), to_string(mode)).dump() << '\n';
        return kBadInput;
    }
    if (cfg.mode != mode) {
        std::cerr << rimming::cli::detail::error_record(
                         "InputError",
                         std::string("config describes a '") + to_string(cfg.mode) + "' run, not '" + to_string(mode) + "'",
                         to_string(mode))
                         .dump()
                  << '\n';
        return kBadInput;
    }
    if (const char* env = std::getenv("RIMMING_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (seed) cfg.seed = *seed;
    if (!snapshots.empty()) {
        cfg.evolve.snapshot_times = snapshots;
        try {
            cfg.evolve.validate();
        } catch (const rimming::Error& e) {
            std::cerr << rimming::cli::detail::error_record("InputError", e.what(), to_string(mode)).dump() << '\n';
            return kBadInput;
        }
    }
    return dispatch(cfg, cfg.output_dir);
}

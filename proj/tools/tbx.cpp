#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset_name;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "TOML experiment configuration");
    cmd->add_option("--preset", o.preset_name, "compiled-in preset name (see 'preset list')");
    cmd->add_option("--out", o.out_path, "output CSV path (overrides the config)");
    cmd->add_option("--seed", o.seed, "rng seed (overrides the config)")->each([&](const std::string&) {
        o.seed_set = true;
    });
    cmd->add_option("--threads", o.threads, "sweep worker threads (default: hardware)");
}

tbx::Toml load_config(const CommonOpts& o) {
    std::string text;
    if (!o.config_path.empty() && !o.preset_name.empty())
        throw tbx::ConfigError("--config and --preset are mutually exclusive");
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw tbx::ConfigError("cannot open config file '" + o.config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    } else if (!o.preset_name.empty()) {
        const tbx::Preset* p = tbx::find_preset(o.preset_name);
        if (!p) throw tbx::ConfigError("unknown preset '" + o.preset_name + "'");
        text = p->toml;
    } else {
        throw tbx::ConfigError("one of --config or --preset is required");
    }
    tbx::Toml config = tbx::Toml::parse(text);
    if (o.seed_set) config.set_number("seed", static_cast<double>(o.seed));
    return config;
}

int run_command(const CommonOpts& o, void (*runner)(const tbx::Experiment&, std::ostream&)) {
    const tbx::Toml config = load_config(o);
    const int threads = o.threads > 0 ? o.threads
                                      : std::max(1u, std::thread::hardware_concurrency());
    const tbx::Experiment ex = tbx::make_experiment(config, threads);
    const std::string out_path = !o.out_path.empty() ? o.out_path : config.str_or("output.path", "out.csv");
    std::ostringstream buffer;
    runner(ex, buffer);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw tbx::ConfigError("cannot open output file '" + out_path + "'");
    out << buffer.str();
    std::cout << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tight-binding body-order approximation experiments"};
    app.require_subcommand(1);

    CommonOpts converge_o, truncate_o, locality_o, scf_o, nodes_o, vacuum_o;
    auto* converge = app.add_subcommand("converge", "error sweep of an approximation scheme");
    add_common(converge, converge_o);
    auto* truncate = app.add_subcommand("truncate", "banded/neighborhood truncation sweep");
    add_common(truncate, truncate_o);
    auto* locality = app.add_subcommand("locality", "derivative decay along the chain");
    add_common(locality, locality_o);
    auto* scf = app.add_subcommand("scf", "self-consistent field iteration");
    add_common(scf, scf_o);
    auto* nodes = app.add_subcommand("nodes", "emit node sets and Green-function values");
    add_common(nodes, nodes_o);
    auto* vacuum = app.add_subcommand("vacuum", "vacuum cluster expansion comparison");
    add_common(vacuum, vacuum_o);

    auto* preset = app.add_subcommand("preset", "list or dump compiled-in presets");
    std::string preset_action, preset_name;
    preset->add_option("action", preset_action, "list | dump")->required();
    preset->add_option("name", preset_name, "preset name for dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (preset->parsed()) {
            if (preset_action == "list") {
                for (const auto& p : tbx::presets())
                    std::cout << p.name << "  " << p.description << "\n";
                return 0;
            }
            if (preset_action == "dump") {
                const tbx::Preset* p = tbx::find_preset(preset_name);
                if (!p) throw tbx::ConfigError("unknown preset '" + preset_name + "'");
                std::cout << p->toml;
                return 0;
            }
            throw tbx::ConfigError("preset action must be 'list' or 'dump'");
        }
        if (converge->parsed()) return run_command(converge_o, tbx::run_converge);
        if (truncate->parsed()) return run_command(truncate_o, tbx::run_truncation);
        if (locality->parsed()) return run_command(locality_o, tbx::run_locality);
        if (scf->parsed()) return run_command(scf_o, tbx::run_scf);
        if (nodes->parsed()) return run_command(nodes_o, tbx::run_nodes);
        if (vacuum->parsed()) return run_command(vacuum_o, tbx::run_vacuum);
    } catch (const tbx::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

#pragma once

#include <ostream>
#include <string>

#include "config.hpp"

namespace tbx {

inline constexpr const char* kToolVersion = "tbx 0.1.0";

struct Experiment {
    Toml config;
    std::uint64_t config_hash = 0;
    int threads = 1;
};

Experiment make_experiment(const Toml& config, int threads);

void run_converge(const Experiment& ex, std::ostream& out);
void run_truncation(const Experiment& ex, std::ostream& out);
void run_locality(const Experiment& ex, std::ostream& out);
void run_scf(const Experiment& ex, std::ostream& out);
void run_nodes(const Experiment& ex, std::ostream& out);
void run_vacuum(const Experiment& ex, std::ostream& out);

}  // namespace tbx

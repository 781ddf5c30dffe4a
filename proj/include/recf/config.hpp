#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "recf/harness.hpp"

// JSON configuration for the CLI. Parsing is strict: unknown keys and
// wrong-typed values raise config_error so typos never fall back to
// defaults silently. resolved_json() materializes every field (including
// the defaults, the chosen backend and the resolved thread count), and a
// resolved config parses back to the same configuration — that is what the
// output sidecars embed to make experiments replayable.

namespace recf {

struct TheoryCliConfig {
    std::size_t moment_samples = 200000;
    std::vector<double> mu{0.01};
    std::vector<double> sigma_v2{0.01};
    std::size_t steps = 4000;
    bool simulate = false;
    std::size_t sim_runs = 200;
    std::size_t dimension_cap = 32;
};

struct SweepCliConfig {
    std::size_t grid_points = 25;
    double grid_span = 8.0;  // grid covers [mu_opt/span, mu_opt*span]
    double tail_fraction = 0.5;
    std::size_t moment_samples = 200000;
    std::size_t dimension_cap = 32;
};

struct CliConfig {
    ExperimentConfig experiment;

    // equalize
    std::size_t test_symbols = 100000;
    std::size_t eye_samples = 2000;

    TheoryCliConfig theory;
    SweepCliConfig sweep;

    // bench
    std::size_t bench_block = 500;

    std::string backend;  // "" until finalized, then "scalar" or "avx2"
};

// Parses a configuration object (not a sidecar). Throws config_error.
CliConfig parse_config(const nlohmann::json& j);

// Reads a config file; a replay sidecar (object with a "format" tag) is
// unwrapped to its embedded config. Throws config_error on I/O or parse
// problems.
CliConfig load_config(const std::string& path);

// Fills in the backend (best available when unset) and resolves the thread
// count so the configuration pins everything a replay needs.
void finalize_config(CliConfig& cfg);

nlohmann::json resolved_json(const CliConfig& cfg);

}  // namespace recf

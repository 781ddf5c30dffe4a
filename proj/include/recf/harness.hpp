#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recf/filters.hpp"
#include "recf/scenarios.hpp"

// Monte-Carlo experiment driver: builds per-run signal/noise/plant streams
// from a master seed, runs every configured filter over the *same* stream,
// and averages learning curves across runs. All randomness is derived from
// (master seed, stream id, run index), so results are reproducible and
// independent of which filters are enabled.

namespace recf {

struct FeatureParams {
    std::size_t n_features = 0;  // D
    double sigma2 = 1.0;

    bool operator==(const FeatureParams&) const = default;
};

struct FilterConfig {
    std::string label;  // CSV label; config layer guarantees non-empty unique
    FilterKind kind = FilterKind::clms;
    double mu = 0.0;
    FeatureParams feat;  // lrecf/wlrecf: map params; cklms: sigma2 only
    std::size_t dictionary_cap = 200000;
};

enum class PlantModel { system1, system2, eq_channel, random_walk };

std::string_view to_string(PlantModel p);
std::optional<PlantModel> parse_plant_model(std::string_view s);

struct ScenarioConfig {
    SourceSpec source;
    PlantModel plant = PlantModel::system1;
    std::size_t m = 5;  // regressor length
    NoiseSpec noise;

    // random-walk feature plant (always widely linear / augmented):
    FeatureParams rw_feat;
    double sigma_q2 = 0.0;

    // equalization decision delay:
    std::size_t delay = 2;
};

struct RunConfig {
    std::size_t runs = 1;
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    bool freeze_map = false;  // one feature map for all runs instead of per run
    int threads = 0;          // 0 = hardware concurrency (capped by runs)
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    std::vector<FilterConfig> filters;
    RunConfig run;
};

// Named sub-streams of the master seed.
enum class SeedStream : std::uint64_t {
    source = 1,
    noise = 2,
    feature_map = 3,
    walk = 4,
    walk_w0 = 5,
    test_source = 6,
    test_noise = 7,
    moments = 8,  // theory-side moment estimation
};

std::uint64_t experiment_seed(std::uint64_t master, SeedStream s, std::uint64_t run);

// The feature-map seed additionally keys on the map parameters, so a map is
// pinned by (master, run-or-frozen, D, sigma2) independently of filter order.
std::uint64_t map_seed(std::uint64_t master, bool freeze, std::uint64_t run,
                       const FeatureParams& p);

int resolve_threads(int requested, std::size_t runs);

struct FilterCurves {
    std::string label;
    FilterKind kind = FilterKind::clms;
    std::vector<double> mse, emse, msd;           // linear ensemble means
    std::vector<double> mse_db, emse_db, msd_db;  // 10*log10 of the above
    bool has_emse = false, has_msd = false;
    std::size_t diverged_runs = 0;  // runs excluded from this filter's average
};

struct LearningCurves {
    std::vector<FilterCurves> filters;
    std::size_t runs = 0, samples = 0;
    int threads_used = 1;
    double sigma_v2_run0 = 0.0;  // resolved noise power of run 0 (informational)
};

LearningCurves run_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// equalization: train on one stream, freeze, measure SER on a fresh one
// ---------------------------------------------------------------------------

struct SerReport {
    double ser = 0.0;
    std::size_t errors = 0;
    std::size_t count = 0;
};

// Nearest-symbol decisions against the QPSK constellation (fixed tie-break
// order); truth entries must be exact constellation points.
SerReport symbol_error_rate(std::span<const cdouble> predictions,
                            std::span<const cdouble> truth);

struct EqualizationResult {
    LearningCurves training;
    struct PerFilter {
        std::string label;
        SerReport ser;                   // totals across runs
        std::vector<cdouble> eye;        // run-0 test predictions (capped)
        std::vector<cdouble> eye_truth;  // transmitted symbols for those samples
        std::size_t diverged_runs = 0;   // runs skipped in the SER totals
    };
    std::vector<PerFilter> filters;
    std::size_t test_symbols_per_run = 0;
};

EqualizationResult run_equalization(const ExperimentConfig& cfg,
                                    std::size_t test_symbols,
                                    std::size_t eye_samples);

// ---------------------------------------------------------------------------
// step-size sweep (common random numbers across the grid)
// ---------------------------------------------------------------------------

struct SweepConfig {
    ExperimentConfig base;  // scenario + filters; mu is overwritten per point
    std::vector<double> mu_grid;
    double tail_fraction = 0.5;  // steady-state average over the curve tail
};

struct SweepPoint {
    double mu = 0.0;
    double sim_mse = 0.0;  // linear tail-averaged MSE (+inf if runs diverged)
    std::size_t diverged_runs = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::size_t argmin = 0;  // index of the smallest usable sim_mse
};

SweepResult run_mu_sweep(const SweepConfig& cfg);

// ---------------------------------------------------------------------------
// timing
// ---------------------------------------------------------------------------

struct TimingResult {
    std::string label;
    FilterKind kind = FilterKind::clms;
    double total_s = 0.0;        // timed updates only (excludes warm-up)
    double per_update_us = 0.0;
    double growth_exponent = 0.0;  // slope of log(block time) vs log(position)
    std::vector<double> block_s;
    std::vector<double> block_center;  // update index at each block's center
    std::size_t timed_updates = 0;
    std::size_t warmup_updates = 0;
};

// Single-threaded; run 0 of the scenario provides the stream. The warm-up
// updates run untimed (they still grow dictionaries).
std::vector<TimingResult> timing_benchmark(const ExperimentConfig& cfg,
                                           std::size_t block);

// Ordinary least-squares slope of y against x (sizes must match, >= 2).
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace recf

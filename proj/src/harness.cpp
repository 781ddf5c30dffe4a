#include "recf/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <thread>
#include <utility>

#include "recf/errors.hpp"
#include "recf/kernels.hpp"
#include "recf/rng.hpp"

namespace recf {

std::string_view to_string(PlantModel p) {
    switch (p) {
        case PlantModel::system1: return "system1";
        case PlantModel::system2: return "system2";
        case PlantModel::eq_channel: return "eq_channel";
        case PlantModel::random_walk: return "random_walk";
    }
    return "?";
}

std::optional<PlantModel> parse_plant_model(std::string_view s) {
    if (s == "system1") return PlantModel::system1;
    if (s == "system2") return PlantModel::system2;
    if (s == "eq_channel") return PlantModel::eq_channel;
    if (s == "random_walk") return PlantModel::random_walk;
    return std::nullopt;
}

std::uint64_t experiment_seed(std::uint64_t master, SeedStream s, std::uint64_t run) {
    return derive_seed(master, static_cast<std::uint64_t>(s), run);
}

std::uint64_t map_seed(std::uint64_t master, bool freeze, std::uint64_t run,
                       const FeatureParams& p) {
    std::uint64_t base =
        experiment_seed(master, SeedStream::feature_map, freeze ? 0 : run);
    return derive_seed(base, static_cast<std::uint64_t>(p.n_features),
                       std::bit_cast<std::uint64_t>(p.sigma2));
}

int resolve_threads(int requested, std::size_t runs) {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t want = requested > 0 ? static_cast<std::size_t>(requested) : hw;
    want = std::min(want, std::max<std::size_t>(runs, 1));
    return static_cast<int>(std::max<std::size_t>(want, 1));
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_slope: need matching sizes >= 2");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("least_squares_slope: degenerate abscissae");
    return sxy / sxx;
}

namespace {

PlantKind to_plant_kind(PlantModel p) {
    switch (p) {
        case PlantModel::system1: return PlantKind::system1;
        case PlantModel::system2: return PlantKind::system2;
        case PlantModel::eq_channel: return PlantKind::eq_channel;
        default: throw std::logic_error("no PlantKind for random_walk");
    }
}

void validate_experiment(const ExperimentConfig& cfg) {
    const auto& sc = cfg.scenario;
    if (cfg.filters.empty()) throw config_error("experiment has no filters");
    if (cfg.run.runs == 0) throw config_error("runs must be >= 1");
    if (cfg.run.samples == 0) throw config_error("samples must be >= 1");
    if (sc.m == 0 || sc.m > 64) throw config_error("regressor length m must be in [1, 64]");

    std::set<std::string> labels;
    for (const auto& fc : cfg.filters) {
        if (fc.label.empty()) throw config_error("filter label must not be empty");
        if (!labels.insert(fc.label).second)
            throw config_error("duplicate filter label '" + fc.label + "'");
        if (!(fc.mu > 0.0) || !std::isfinite(fc.mu))
            throw config_error("filter '" + fc.label + "': mu must be positive and finite");
        if (fc.kind == FilterKind::lrecf || fc.kind == FilterKind::wlrecf) {
            if (fc.feat.n_features == 0)
                throw config_error("filter '" + fc.label + "': n_features must be >= 1");
            if (!(fc.feat.sigma2 > 0.0) || !std::isfinite(fc.feat.sigma2))
                throw config_error("filter '" + fc.label + "': sigma2 must be positive");
        }
        if (fc.kind == FilterKind::cklms) {
            if (!(fc.feat.sigma2 > 0.0) || !std::isfinite(fc.feat.sigma2))
                throw config_error("filter '" + fc.label + "': sigma2 must be positive");
            if (fc.dictionary_cap == 0)
                throw config_error("filter '" + fc.label + "': dictionary_cap must be >= 1");
        }
    }

    if (sc.plant == PlantModel::random_walk) {
        if (sc.rw_feat.n_features == 0)
            throw config_error("random_walk plant: n_features must be >= 1");
        if (!(sc.rw_feat.sigma2 > 0.0) || !std::isfinite(sc.rw_feat.sigma2))
            throw config_error("random_walk plant: sigma2 must be positive");
        if (!(sc.sigma_q2 >= 0.0) || !std::isfinite(sc.sigma_q2))
            throw config_error("random_walk plant: sigma_q2 must be >= 0");
    }
}

// Per-run cache of feature maps keyed by (D, sigma2 bits); a filter and the
// random-walk plant with the same parameters share one map instance.
class MapRegistry {
public:
    MapRegistry(std::uint64_t master, bool freeze, std::uint64_t run, std::size_t m)
        : master_(master), freeze_(freeze), run_(run), m_(m) {}

    std::shared_ptr<const EulerFeatureMap> get(const FeatureParams& p) {
        auto key = std::make_pair(p.n_features, std::bit_cast<std::uint64_t>(p.sigma2));
        auto it = maps_.find(key);
        if (it != maps_.end()) return it->second;
        auto map = std::make_shared<const EulerFeatureMap>(
            m_, p.n_features, p.sigma2, map_seed(master_, freeze_, run_, p));
        maps_.emplace(key, map);
        return map;
    }

private:
    std::uint64_t master_;
    bool freeze_;
    std::uint64_t run_;
    std::size_t m_;
    std::map<std::pair<std::size_t, std::uint64_t>,
             std::shared_ptr<const EulerFeatureMap>> maps_;
};

// One run's data, generated before any filter sees it so stream content never
// depends on the filter list.
struct PreparedStream {
    std::size_t m = 0;
    std::size_t warm = 0;     // leading stream samples before the first update
    std::size_t samples = 0;  // number of updates
    bool tapped = true;       // regressor = delay line over xs; else xs holds m per step
    std::vector<cdouble> xs;
    std::vector<cdouble> targets;  // desired signal per update
    std::vector<cdouble> noise;    // per-update noise (empty when EMSE is undefined)
    double sigma_v2 = 0.0;
    // random-walk plant trajectory (row i = coefficients after emission i)
    std::size_t traj_dim = 0;
    std::vector<double> traj_re, traj_im;
};

PreparedStream prepare_stream(const ExperimentConfig& cfg, std::uint64_t run,
                              MapRegistry& maps) {
    const auto& sc = cfg.scenario;
    PreparedStream ps;
    ps.m = sc.m;
    ps.samples = cfg.run.samples;

    const std::uint64_t src_seed = experiment_seed(cfg.run.seed, SeedStream::source, run);
    const std::uint64_t noise_seed = experiment_seed(cfg.run.seed, SeedStream::noise, run);

    switch (sc.plant) {
        case PlantModel::system1:
        case PlantModel::system2: {
            PlantKind pk = to_plant_kind(sc.plant);
            const std::size_t pmem = plant_memory(pk);
            ps.warm = std::max(sc.m, pmem) - 1;
            const std::size_t total = ps.warm + ps.samples;
            ps.xs.resize(total);
            SignalSource src(sc.source, src_seed);
            src.fill(ps.xs);

            std::vector<cdouble> clean(ps.samples);
            std::vector<cdouble> recent(pmem);
            for (std::size_t i = 0; i < ps.samples; ++i) {
                const std::size_t n = ps.warm + i;
                for (std::size_t k = 0; k < pmem; ++k) recent[k] = ps.xs[n - k];
                clean[i] = plant_output(pk, recent);
            }
            auto cal = calibrate_noise(sc.noise, clean, noise_seed);
            ps.sigma_v2 = cal.sigma_v2;
            ps.noise = std::move(cal.noise);
            ps.targets.resize(ps.samples);
            for (std::size_t i = 0; i < ps.samples; ++i)
                ps.targets[i] = clean[i] + ps.noise[i];
            break;
        }

        case PlantModel::random_walk: {
            auto map = maps.get(sc.rw_feat);
            const std::size_t L = 2 * sc.rw_feat.n_features;
            SplitVec w0 = draw_walk_w0(
                L, experiment_seed(cfg.run.seed, SeedStream::walk_w0, 0));
            RandomWalkPlant plant(map, /*augmented=*/true, sc.sigma_q2, std::move(w0),
                                  experiment_seed(cfg.run.seed, SeedStream::walk, run));

            ps.tapped = false;
            ps.warm = 0;
            ps.xs.resize(ps.samples * sc.m);
            SignalSource src(sc.source, src_seed);
            src.fill(ps.xs);

            std::vector<cdouble> clean(ps.samples);
            ps.traj_dim = L;
            ps.traj_re.resize(ps.samples * L);
            ps.traj_im.resize(ps.samples * L);
            for (std::size_t i = 0; i < ps.samples; ++i) {
                clean[i] = plant.emit({ps.xs.data() + i * sc.m, sc.m});
                const SplitVec& w = plant.coefficients();
                std::copy(w.re.begin(), w.re.end(), ps.traj_re.begin() + i * L);
                std::copy(w.im.begin(), w.im.end(), ps.traj_im.begin() + i * L);
            }
            auto cal = calibrate_noise(sc.noise, clean, noise_seed);
            ps.sigma_v2 = cal.sigma_v2;
            ps.noise = std::move(cal.noise);
            ps.targets.resize(ps.samples);
            for (std::size_t i = 0; i < ps.samples; ++i)
                ps.targets[i] = clean[i] + ps.noise[i];
            break;
        }

        case PlantModel::eq_channel: {
            const std::size_t pmem = plant_memory(PlantKind::eq_channel);
            ps.warm = sc.m + pmem + sc.delay;
            const std::size_t total = ps.warm + ps.samples;
            std::vector<cdouble> symbols(total);
            SignalSource src(sc.source, src_seed);
            src.fill(symbols);

            // Channel output exists from t = pmem-1 on; earlier regressor taps
            // are never reached because warm > pmem - 1 + m - 1.
            const std::size_t t0 = pmem - 1;
            std::vector<cdouble> chan(total - t0);
            std::vector<cdouble> recent(pmem);
            for (std::size_t t = t0; t < total; ++t) {
                for (std::size_t k = 0; k < pmem; ++k) recent[k] = symbols[t - k];
                chan[t - t0] = plant_output(PlantKind::eq_channel, recent);
            }
            auto cal = calibrate_noise(sc.noise, chan, noise_seed);
            ps.sigma_v2 = cal.sigma_v2;

            // The filter sees the noisy channel output; the desired signal is
            // the clean delayed symbol, so only MSE is reported.
            ps.xs.assign(total, cdouble{0.0, 0.0});
            for (std::size_t t = t0; t < total; ++t)
                ps.xs[t] = chan[t - t0] + cal.noise[t - t0];
            ps.targets.resize(ps.samples);
            for (std::size_t i = 0; i < ps.samples; ++i)
                ps.targets[i] = symbols[ps.warm + i - sc.delay];
            break;
        }
    }
    return ps;
}

std::vector<std::unique_ptr<AdaptiveFilter>> build_filters(const ExperimentConfig& cfg,
                                                           MapRegistry& maps) {
    std::vector<std::unique_ptr<AdaptiveFilter>> out;
    out.reserve(cfg.filters.size());
    for (const auto& fc : cfg.filters) {
        FilterSpec spec;
        spec.kind = fc.kind;
        spec.mu = fc.mu;
        spec.input_dim = cfg.scenario.m;
        switch (fc.kind) {
            case FilterKind::clms:
                break;
            case FilterKind::cklms:
                spec.kernel_sigma2 = fc.feat.sigma2;
                spec.dictionary_cap = fc.dictionary_cap;
                break;
            case FilterKind::lrecf:
            case FilterKind::wlrecf:
                spec.map = maps.get(fc.feat);
                break;
        }
        out.push_back(make_filter(spec));
    }
    return out;
}

// MSD against the plant trajectory is meaningful only when the filter adapts
// the same coefficients the plant walks: a widely-linear filter on the
// plant's own feature map.
bool msd_eligible(const ExperimentConfig& cfg, const FilterConfig& fc) {
    return cfg.scenario.plant == PlantModel::random_walk &&
           fc.kind == FilterKind::wlrecf && fc.feat == cfg.scenario.rw_feat;
}

struct RunMetrics {
    struct PerFilter {
        std::vector<double> mse, emse, msd;
        bool completed = true;
    };
    std::vector<PerFilter> pf;
    double sigma_v2 = 0.0;
};

// Runs every filter over one prepared stream. When keep_filters is non-null
// the trained filter objects are returned for a post-training phase.
RunMetrics simulate_run(const ExperimentConfig& cfg, std::uint64_t run,
                        std::vector<std::unique_ptr<AdaptiveFilter>>* keep_filters) {
    MapRegistry maps(cfg.run.seed, cfg.run.freeze_map, run, cfg.scenario.m);
    PreparedStream ps = prepare_stream(cfg, run, maps);
    auto filters = build_filters(cfg, maps);

    RunMetrics rm;
    rm.sigma_v2 = ps.sigma_v2;
    rm.pf.resize(filters.size());

    std::vector<cdouble> reg(ps.m);
    for (std::size_t f = 0; f < filters.size(); ++f) {
        auto& pf = rm.pf[f];
        const bool want_emse = !ps.noise.empty();
        const bool want_msd = msd_eligible(cfg, cfg.filters[f]);
        pf.mse.resize(ps.samples);
        if (want_emse) pf.emse.resize(ps.samples);
        if (want_msd) pf.msd.resize(ps.samples);
        AdaptiveFilter& filt = *filters[f];
        try {
            for (std::size_t i = 0; i < ps.samples; ++i) {
                std::span<const cdouble> x;
                if (ps.tapped) {
                    const std::size_t n = ps.warm + i;
                    for (std::size_t k = 0; k < ps.m; ++k) reg[k] = ps.xs[n - k];
                    x = reg;
                } else {
                    x = {ps.xs.data() + i * ps.m, ps.m};
                }
                StepResult st = filt.update(x, ps.targets[i]);
                pf.mse[i] = std::norm(st.error);
                if (want_emse) pf.emse[i] = std::norm(st.error - ps.noise[i]);
                if (want_msd) {
                    const SplitVec& w = filt.weights();
                    pf.msd[i] = kernels::diff_norm2(
                        ps.traj_re.data() + i * ps.traj_dim,
                        ps.traj_im.data() + i * ps.traj_dim,
                        w.re.data(), w.im.data(), ps.traj_dim);
                }
            }
        } catch (const divergence_error&) {
            pf.completed = false;
        } catch (const resource_limit_error&) {
            pf.completed = false;
        }
    }
    if (keep_filters) *keep_filters = std::move(filters);
    return rm;
}

struct FilterAccum {
    std::vector<double> mse, emse, msd;
    std::size_t included = 0;
    std::size_t excluded = 0;

    void ensure(std::size_t samples, bool want_emse, bool want_msd) {
        if (mse.empty()) {
            mse.assign(samples, 0.0);
            if (want_emse) emse.assign(samples, 0.0);
            if (want_msd) msd.assign(samples, 0.0);
        }
    }
    void add(const RunMetrics::PerFilter& pf) {
        if (!pf.completed) {
            ++excluded;
            return;
        }
        ensure(pf.mse.size(), !pf.emse.empty(), !pf.msd.empty());
        for (std::size_t i = 0; i < pf.mse.size(); ++i) mse[i] += pf.mse[i];
        for (std::size_t i = 0; i < pf.emse.size(); ++i) emse[i] += pf.emse[i];
        for (std::size_t i = 0; i < pf.msd.size(); ++i) msd[i] += pf.msd[i];
        ++included;
    }
    void merge(const FilterAccum& o) {
        included += o.included;
        excluded += o.excluded;
        if (o.mse.empty()) return;
        ensure(o.mse.size(), !o.emse.empty(), !o.msd.empty());
        for (std::size_t i = 0; i < o.mse.size(); ++i) mse[i] += o.mse[i];
        for (std::size_t i = 0; i < o.emse.size(); ++i) emse[i] += o.emse[i];
        for (std::size_t i = 0; i < o.msd.size(); ++i) msd[i] += o.msd[i];
    }
};

std::vector<double> to_db(const std::vector<double>& lin) {
    std::vector<double> db(lin.size());
    for (std::size_t i = 0; i < lin.size(); ++i) db[i] = 10.0 * std::log10(lin[i]);
    return db;
}

// Splits [0, runs) into `threads` contiguous chunks (first chunks get the
// remainder) and feeds every run through `per_run`, which must be callable
// concurrently for distinct runs. Exceptions from workers are rethrown.
template <typename PerRun>
void parallel_runs(std::size_t runs, int threads, PerRun&& per_run) {
    const std::size_t t_count = static_cast<std::size_t>(threads);
    const std::size_t base = runs / t_count;
    const std::size_t rem = runs % t_count;
    std::vector<std::exception_ptr> errors(t_count);

    auto chunk = [&](std::size_t t) {
        std::size_t lo = t * base + std::min(t, rem);
        std::size_t hi = lo + base + (t < rem ? 1 : 0);
        return std::make_pair(lo, hi);
    };
    auto work = [&](std::size_t t) {
        try {
            auto [lo, hi] = chunk(t);
            for (std::size_t run = lo; run < hi; ++run) per_run(t, run);
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(t_count - 1);
    for (std::size_t t = 1; t < t_count; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

LearningCurves run_experiment(const ExperimentConfig& cfg) {
    validate_experiment(cfg);
    const std::size_t F = cfg.filters.size();
    const int threads = resolve_threads(cfg.run.threads, cfg.run.runs);

    std::vector<std::vector<FilterAccum>> partial(
        static_cast<std::size_t>(threads), std::vector<FilterAccum>(F));
    double sigma_v2_run0 = 0.0;

    parallel_runs(cfg.run.runs, threads, [&](std::size_t t, std::size_t run) {
        RunMetrics rm = simulate_run(cfg, run, nullptr);
        if (run == 0) sigma_v2_run0 = rm.sigma_v2;
        for (std::size_t f = 0; f < F; ++f) partial[t][f].add(rm.pf[f]);
    });

    LearningCurves out;
    out.runs = cfg.run.runs;
    out.samples = cfg.run.samples;
    out.threads_used = threads;
    out.sigma_v2_run0 = sigma_v2_run0;
    out.filters.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
        FilterAccum total;
        for (int t = 0; t < threads; ++t)
            total.merge(partial[static_cast<std::size_t>(t)][f]);

        FilterCurves& fc = out.filters[f];
        fc.label = cfg.filters[f].label;
        fc.kind = cfg.filters[f].kind;
        fc.diverged_runs = total.excluded;
        const double denom = static_cast<double>(total.included);
        auto scale = [&](std::vector<double>& v) {
            for (double& x : v) x /= denom;
        };
        if (total.included == 0) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            total.mse.assign(cfg.run.samples, nan);
        } else {
            scale(total.mse);
            scale(total.emse);
            scale(total.msd);
        }
        fc.has_emse = !total.emse.empty();
        fc.has_msd = !total.msd.empty();
        fc.mse_db = to_db(total.mse);
        fc.emse_db = to_db(total.emse);
        fc.msd_db = to_db(total.msd);
        fc.mse = std::move(total.mse);
        fc.emse = std::move(total.emse);
        fc.msd = std::move(total.msd);
    }
    return out;
}

SerReport symbol_error_rate(std::span<const cdouble> predictions,
                            std::span<const cdouble> truth) {
    if (predictions.size() != truth.size())
        throw std::invalid_argument("symbol_error_rate: size mismatch");
    const auto& alphabet = SignalSource::qpsk_symbols();
    SerReport rep;
    rep.count = predictions.size();
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        std::size_t best = 0;
        double best_d = std::norm(predictions[i] - alphabet[0]);
        for (std::size_t k = 1; k < alphabet.size(); ++k) {
            const double d = std::norm(predictions[i] - alphabet[k]);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        if (alphabet[best] != truth[i]) ++rep.errors;
    }
    rep.ser = rep.count == 0
                  ? 0.0
                  : static_cast<double>(rep.errors) / static_cast<double>(rep.count);
    return rep;
}

EqualizationResult run_equalization(const ExperimentConfig& cfg,
                                    std::size_t test_symbols,
                                    std::size_t eye_samples) {
    validate_experiment(cfg);
    if (cfg.scenario.plant != PlantModel::eq_channel)
        throw config_error("equalization requires the eq_channel plant");
    if (test_symbols == 0) throw config_error("test_symbols must be >= 1");

    const auto& sc = cfg.scenario;
    const std::size_t F = cfg.filters.size();
    const int threads = resolve_threads(cfg.run.threads, cfg.run.runs);

    struct TestAccum {
        std::size_t errors = 0, count = 0, excluded = 0;
    };
    std::vector<std::vector<FilterAccum>> train_partial(
        static_cast<std::size_t>(threads), std::vector<FilterAccum>(F));
    std::vector<std::vector<TestAccum>> test_partial(
        static_cast<std::size_t>(threads), std::vector<TestAccum>(F));
    std::vector<std::vector<cdouble>> eye(F);
    std::vector<std::vector<cdouble>> eye_truth(F);
    double sigma_v2_run0 = 0.0;

    const std::size_t pmem = plant_memory(PlantKind::eq_channel);
    const std::size_t warm_t = sc.m + pmem + sc.delay;
    const std::size_t total_t = warm_t + test_symbols;

    parallel_runs(cfg.run.runs, threads, [&](std::size_t t, std::size_t run) {
        std::vector<std::unique_ptr<AdaptiveFilter>> filters;
        RunMetrics rm = simulate_run(cfg, run, &filters);
        if (run == 0) sigma_v2_run0 = rm.sigma_v2;
        for (std::size_t f = 0; f < F; ++f) train_partial[t][f].add(rm.pf[f]);

        // Fresh symbol stream through the same channel; the receiver noise
        // power is the one resolved during training.
        std::vector<cdouble> symbols(total_t);
        SignalSource tsrc(sc.source,
                          experiment_seed(cfg.run.seed, SeedStream::test_source, run));
        tsrc.fill(symbols);

        const std::size_t t0 = pmem - 1;
        std::vector<cdouble> xs(total_t, cdouble{0.0, 0.0});
        std::vector<cdouble> recent(pmem);
        Rng nrng(experiment_seed(cfg.run.seed, SeedStream::test_noise, run));
        for (std::size_t n = t0; n < total_t; ++n) {
            for (std::size_t k = 0; k < pmem; ++k) recent[k] = symbols[n - k];
            xs[n] = plant_output(PlantKind::eq_channel, recent) + nrng.cnormal(rm.sigma_v2);
        }

        std::vector<cdouble> reg(sc.m);
        std::vector<cdouble> preds(test_symbols);
        std::vector<cdouble> truth(test_symbols);
        for (std::size_t f = 0; f < F; ++f) {
            if (!rm.pf[f].completed) {
                ++test_partial[t][f].excluded;
                continue;
            }
            const AdaptiveFilter& filt = *filters[f];
            for (std::size_t i = 0; i < test_symbols; ++i) {
                const std::size_t n = warm_t + i;
                for (std::size_t k = 0; k < sc.m; ++k) reg[k] = xs[n - k];
                preds[i] = filt.predict(reg);
                truth[i] = symbols[n - sc.delay];
            }
            SerReport rep = symbol_error_rate(preds, truth);
            test_partial[t][f].errors += rep.errors;
            test_partial[t][f].count += rep.count;
            if (run == 0 && eye_samples > 0) {
                const auto n_eye = static_cast<std::ptrdiff_t>(
                    std::min(eye_samples, test_symbols));
                eye[f].assign(preds.begin(), preds.begin() + n_eye);
                eye_truth[f].assign(truth.begin(), truth.begin() + n_eye);
            }
        }
    });

    EqualizationResult out;
    out.test_symbols_per_run = test_symbols;
    out.training.runs = cfg.run.runs;
    out.training.samples = cfg.run.samples;
    out.training.threads_used = threads;
    out.training.sigma_v2_run0 = sigma_v2_run0;
    out.training.filters.resize(F);
    out.filters.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
        FilterAccum total;
        TestAccum test_total;
        for (int t = 0; t < threads; ++t) {
            total.merge(train_partial[static_cast<std::size_t>(t)][f]);
            const auto& tt = test_partial[static_cast<std::size_t>(t)][f];
            test_total.errors += tt.errors;
            test_total.count += tt.count;
            test_total.excluded += tt.excluded;
        }

        FilterCurves& fc = out.training.filters[f];
        fc.label = cfg.filters[f].label;
        fc.kind = cfg.filters[f].kind;
        fc.diverged_runs = total.excluded;
        if (total.included == 0) {
            total.mse.assign(cfg.run.samples, std::numeric_limits<double>::quiet_NaN());
        } else {
            for (double& x : total.mse) x /= static_cast<double>(total.included);
        }
        fc.mse_db = to_db(total.mse);
        fc.mse = std::move(total.mse);

        auto& pf = out.filters[f];
        pf.label = cfg.filters[f].label;
        pf.diverged_runs = test_total.excluded;
        pf.ser.errors = test_total.errors;
        pf.ser.count = test_total.count;
        pf.ser.ser = test_total.count == 0
                         ? std::numeric_limits<double>::quiet_NaN()
                         : static_cast<double>(test_total.errors) /
                               static_cast<double>(test_total.count);
        pf.eye = std::move(eye[f]);
        pf.eye_truth = std::move(eye_truth[f]);
    }
    return out;
}

SweepResult run_mu_sweep(const SweepConfig& cfg) {
    if (cfg.mu_grid.empty()) throw config_error("sweep: empty mu grid");
    if (!(cfg.tail_fraction > 0.0) || cfg.tail_fraction > 1.0)
        throw config_error("sweep: tail_fraction must be in (0, 1]");
    if (cfg.base.filters.empty()) throw config_error("sweep: no filter configured");

    SweepResult out;
    out.points.reserve(cfg.mu_grid.size());
    for (double mu : cfg.mu_grid) {
        ExperimentConfig c = cfg.base;
        for (auto& fc : c.filters) fc.mu = mu;
        LearningCurves curves = run_experiment(c);
        const FilterCurves& fc = curves.filters.front();

        const std::size_t S = fc.mse.size();
        const std::size_t tail = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(cfg.tail_fraction * static_cast<double>(S))));
        double acc = 0.0;
        for (std::size_t i = S - tail; i < S; ++i) acc += fc.mse[i];

        SweepPoint pt;
        pt.mu = mu;
        pt.diverged_runs = fc.diverged_runs;
        pt.sim_mse = fc.diverged_runs > 0 ? std::numeric_limits<double>::infinity()
                                          : acc / static_cast<double>(tail);
        out.points.push_back(pt);
    }

    out.argmin = out.points.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        if (std::isfinite(out.points[i].sim_mse) && out.points[i].sim_mse < best) {
            best = out.points[i].sim_mse;
            out.argmin = i;
        }
    }
    return out;
}

std::vector<TimingResult> timing_benchmark(const ExperimentConfig& cfg,
                                           std::size_t block) {
    validate_experiment(cfg);
    if (block == 0) throw config_error("bench: block must be >= 1");

    const std::size_t samples = cfg.run.samples;
    const std::size_t warmup = std::min<std::size_t>(samples / 20, 500);
    const std::size_t timed = samples - warmup;
    const std::size_t blocks = timed / block;
    if (blocks < 2) throw config_error("bench: need at least 2 timed blocks");

    MapRegistry maps(cfg.run.seed, cfg.run.freeze_map, 0, cfg.scenario.m);
    PreparedStream ps = prepare_stream(cfg, 0, maps);
    auto filters = build_filters(cfg, maps);

    using clock = std::chrono::steady_clock;
    std::vector<TimingResult> out;
    out.reserve(filters.size());
    std::vector<cdouble> reg(ps.m);

    for (std::size_t f = 0; f < filters.size(); ++f) {
        AdaptiveFilter& filt = *filters[f];
        auto step = [&](std::size_t i) {
            std::span<const cdouble> x;
            if (ps.tapped) {
                const std::size_t n = ps.warm + i;
                for (std::size_t k = 0; k < ps.m; ++k) reg[k] = ps.xs[n - k];
                x = reg;
            } else {
                x = {ps.xs.data() + i * ps.m, ps.m};
            }
            filt.update(x, ps.targets[i]);
        };

        TimingResult tr;
        tr.label = cfg.filters[f].label;
        tr.kind = cfg.filters[f].kind;
        tr.warmup_updates = warmup;
        for (std::size_t i = 0; i < warmup; ++i) step(i);

        std::size_t next = warmup;
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto t0 = clock::now();
            for (std::size_t i = 0; i < block; ++i) step(next + i);
            const auto t1 = clock::now();
            double dt = std::chrono::duration<double>(t1 - t0).count();
            tr.block_s.push_back(std::max(dt, 1e-9));
            tr.block_center.push_back(static_cast<double>(next) +
                                      (static_cast<double>(block) + 1.0) / 2.0);
            next += block;
        }
        tr.timed_updates = blocks * block;
        tr.total_s = 0.0;
        for (double s : tr.block_s) tr.total_s += s;
        tr.per_update_us = tr.total_s / static_cast<double>(tr.timed_updates) * 1e6;

        std::vector<double> lx(blocks), ly(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            lx[b] = std::log(tr.block_center[b]);
            ly[b] = std::log(tr.block_s[b]);
        }
        tr.growth_exponent = least_squares_slope(lx, ly);
        out.push_back(std::move(tr));
    }
    return out;
}

}  // namespace recf

#include "recf/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "recf/config.hpp"
#include "recf/csv.hpp"
#include "recf/errors.hpp"
#include "recf/harness.hpp"
#include "recf/kernels.hpp"
#include "recf/theory.hpp"

namespace recf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t runs = 0;
    int threads = 0;
    std::string backend;
    bool quiet = false;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* runs_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--config", a.config_path,
                    "JSON config file (or a .meta.json replay sidecar)")
        ->required();
    sub->add_option("--out", a.out_dir, "output directory (default: out)");
    a.seed_opt = sub->add_option("--seed", a.seed, "override run.seed");
    a.runs_opt = sub->add_option("--runs", a.runs, "override run.runs");
    a.threads_opt = sub->add_option("--threads", a.threads, "override run.threads");
    sub->add_option("--backend", a.backend, "force kernel backend (scalar, avx2)");
    sub->add_flag("--quiet", a.quiet, "suppress the stdout summary");
}

CliConfig prepare(const CommonArgs& a) {
    CliConfig cfg = load_config(a.config_path);
    if (a.seed_opt->count()) cfg.experiment.run.seed = a.seed;
    if (a.runs_opt->count()) cfg.experiment.run.runs = a.runs;
    if (a.threads_opt->count()) cfg.experiment.run.threads = a.threads;
    if (!a.backend.empty()) cfg.backend = a.backend;
    finalize_config(cfg);

    auto backend = kernels::parse_backend(cfg.backend);
    if (!backend) throw config_error("unknown backend '" + cfg.backend + "'");
    if (!kernels::available(*backend))
        throw config_error("backend '" + cfg.backend + "' is not available on this machine");
    kernels::use(*backend);
    return cfg;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write to '" + p.string() + "' failed");
}

void write_meta(const fs::path& dir, const char* sub, const CliConfig& cfg,
                const std::vector<std::string>& outputs) {
    json meta{{"format", "recf-meta-v1"},
              {"subcommand", sub},
              {"config", resolved_json(cfg)},
              {"outputs", outputs}};
    write_file(dir / (std::string(sub) + ".meta.json"), meta.dump(2) + "\n");
}

std::string short4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// Reports per-filter divergence to stderr; returns 1 when a filter lost
// every run (the curves are unusable), 0 otherwise.
int divergence_status(const LearningCurves& lc) {
    int rc = 0;
    for (const auto& fc : lc.filters) {
        if (fc.diverged_runs == 0) continue;
        if (fc.diverged_runs >= lc.runs) {
            std::cerr << "filter '" << fc.label << "': all " << lc.runs
                      << " runs diverged\n";
            rc = 1;
        } else {
            std::cerr << "warning: filter '" << fc.label << "': " << fc.diverged_runs
                      << " of " << lc.runs << " runs diverged and were excluded\n";
        }
    }
    return rc;
}

void print_curve_summary(const LearningCurves& lc) {
    for (const auto& fc : lc.filters) {
        if (fc.mse_db.empty()) continue;
        std::size_t tail = std::max<std::size_t>(1, fc.mse.size() / 10);
        double acc = 0.0;
        for (std::size_t i = fc.mse.size() - tail; i < fc.mse.size(); ++i)
            acc += fc.mse[i];
        double tail_db = 10.0 * std::log10(acc / static_cast<double>(tail));
        std::cout << "  " << fc.label << ": final MSE " << short4(tail_db) << " dB";
        if (fc.diverged_runs > 0) std::cout << " (" << fc.diverged_runs << " runs excluded)";
        std::cout << "\n";
    }
}

// Frozen feature map + moment estimate for the theory/sweep subcommands.
struct TheorySetup {
    std::shared_ptr<const EulerFeatureMap> map;
    theory::Moments moments;
    SplitVec w0;
};

TheorySetup theory_setup(const CliConfig& cfg, std::size_t moment_samples,
                         std::size_t dimension_cap) {
    const auto& sc = cfg.experiment.scenario;
    if (sc.plant != PlantModel::random_walk)
        throw config_error("this subcommand needs scenario.plant == \"random_walk\"");

    TheorySetup ts;
    ts.map = std::make_shared<const EulerFeatureMap>(
        sc.m, sc.rw_feat.n_features, sc.rw_feat.sigma2,
        map_seed(cfg.experiment.run.seed, /*freeze=*/true, 0, sc.rw_feat));

    theory::MomentConfig mc;
    mc.map = ts.map;
    mc.augmented = true;
    mc.source = sc.source;
    mc.n_samples = moment_samples;
    mc.seed = experiment_seed(cfg.experiment.run.seed, SeedStream::moments, 0);
    mc.threads = cfg.experiment.run.threads;
    mc.dimension_cap = dimension_cap;
    ts.moments = theory::estimate_moments(mc);

    ts.w0 = draw_walk_w0(ts.moments.dim(),
                         experiment_seed(cfg.experiment.run.seed, SeedStream::walk_w0, 0));
    return ts;
}

int do_identify(const CommonArgs& a) {
    CliConfig cfg = prepare(a);
    LearningCurves lc = run_experiment(cfg.experiment);

    fs::create_directories(a.out_dir);
    std::ostringstream csv;
    write_curves_csv(csv, lc);
    write_file(fs::path(a.out_dir) / "identify.csv", csv.str());
    write_meta(a.out_dir, "identify", cfg, {"identify.csv"});

    if (!a.quiet) {
        std::cout << "identify: " << lc.runs << " runs x " << lc.samples
                  << " samples, backend " << cfg.backend << ", threads "
                  << lc.threads_used << "\n";
        print_curve_summary(lc);
        std::cout << "wrote " << (fs::path(a.out_dir) / "identify.csv").string() << "\n";
    }
    return divergence_status(lc);
}

int do_equalize(const CommonArgs& a) {
    CliConfig cfg = prepare(a);
    EqualizationResult eq =
        run_equalization(cfg.experiment, cfg.test_symbols, cfg.eye_samples);

    fs::create_directories(a.out_dir);
    {
        std::ostringstream s;
        write_curves_csv(s, eq.training);
        write_file(fs::path(a.out_dir) / "equalize.csv", s.str());
    }
    {
        std::ostringstream s;
        write_ser_csv(s, eq);
        write_file(fs::path(a.out_dir) / "equalize_ser.csv", s.str());
    }
    {
        std::ostringstream s;
        write_eye_csv(s, eq);
        write_file(fs::path(a.out_dir) / "equalize_eye.csv", s.str());
    }
    write_meta(a.out_dir, "equalize", cfg,
               {"equalize.csv", "equalize_ser.csv", "equalize_eye.csv"});

    if (!a.quiet) {
        std::cout << "equalize: " << eq.training.runs << " runs, "
                  << eq.test_symbols_per_run << " test symbols per run\n";
        for (const auto& pf : eq.filters) {
            std::cout << "  " << pf.label << ": SER " << short4(pf.ser.ser) << " ("
                      << pf.ser.errors << "/" << pf.ser.count << ")\n";
        }
        std::cout << "wrote " << (fs::path(a.out_dir) / "equalize_ser.csv").string()
                  << "\n";
    }
    return divergence_status(eq.training);
}

int do_theory(const CommonArgs& a) {
    CliConfig cfg = prepare(a);
    const auto& sc = cfg.experiment.scenario;
    TheorySetup ts = theory_setup(cfg, cfg.theory.moment_samples,
                                  cfg.theory.dimension_cap);
    const double bound = theory::mean_step_bound(ts.moments);
    const Eigen::MatrixXcd C0 = theory::outer(ts.w0);

    std::ostringstream csv;
    csv << "iteration,mu,sigma_v2,pred_mse_db,pred_msd_db,sim_mse_db,sim_msd_db\n";
    json cells = json::array();

    for (double mu : cfg.theory.mu) {
        for (double sv2 : cfg.theory.sigma_v2) {
            theory::TransientConfig tc;
            tc.mu = mu;
            tc.sigma_v2 = sv2;
            tc.sigma_q2 = sc.sigma_q2;
            tc.C0 = C0;
            tc.steps = cfg.theory.steps;

            auto tp = theory::transient_predict(ts.moments, tc);
            auto ss = theory::steady_state(ts.moments, mu, sv2, sc.sigma_q2);
            auto rt = theory::recursion_tail(ts.moments, tc);

            json cell{{"mu", mu},
                      {"sigma_v2", sv2},
                      {"steady_state",
                       json{{"mse", ss.mse},
                            {"emse", ss.emse},
                            {"msd", ss.msd},
                            {"spectral_radius", ss.spectral_radius},
                            {"stable", ss.stable},
                            {"cond_A", ss.cond_A},
                            {"residual", ss.residual}}},
                      {"recursion_tail",
                       json{{"mse", rt.mse},
                            {"msd", rt.msd},
                            {"doublings", rt.doublings},
                            {"converged", rt.converged}}}};
            if (sc.sigma_q2 > 0.0 && sv2 > 0.0) {
                auto opt = theory::optimal_step_size(ts.moments, sv2, sc.sigma_q2);
                cell["optimal"] = json{{"mu_opt", opt.mu_opt},
                                       {"mse_min", opt.mse_min},
                                       {"phi_mse", opt.phi_mse},
                                       {"phi_msd", opt.phi_msd}};
            }
            cells.push_back(std::move(cell));

            const FilterCurves* sim = nullptr;
            LearningCurves lc;
            if (cfg.theory.simulate) {
                ExperimentConfig e;
                e.scenario = sc;
                e.scenario.noise = NoiseSpec{false, sv2};
                FilterConfig fc;
                fc.label = "wlrecf";
                fc.kind = FilterKind::wlrecf;
                fc.mu = mu;
                fc.feat = sc.rw_feat;
                e.filters.push_back(fc);
                e.run = cfg.experiment.run;
                e.run.runs = cfg.theory.sim_runs;
                e.run.samples = cfg.theory.steps;
                e.run.freeze_map = true;  // same frozen map the prediction uses
                lc = run_experiment(e);
                sim = &lc.filters[0];
            }
            for (std::size_t i = 0; i < tp.mse_db.size(); ++i) {
                csv << i << ',' << format_g17(mu) << ',' << format_g17(sv2) << ','
                    << format_g17(tp.mse_db[i]) << ',' << format_g17(tp.msd_db[i])
                    << ',';
                if (sim) csv << format_g17(sim->mse_db[i]);
                csv << ',';
                if (sim) csv << format_g17(sim->msd_db[i]);
                csv << '\n';
            }

            if (!a.quiet) {
                std::cout << "  mu " << short4(mu) << ", sigma_v2 " << short4(sv2)
                          << ": steady MSE " << short4(10.0 * std::log10(ss.mse))
                          << " dB, radius " << short4(ss.spectral_radius)
                          << (ss.stable ? "" : " (UNSTABLE)") << "\n";
            }
        }
    }

    json report{{"dimension", ts.moments.dim()},
                {"moment_samples", ts.moments.n_samples},
                {"mean_step_bound", bound},
                {"sigma_q2", sc.sigma_q2},
                {"cells", std::move(cells)}};

    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "theory.csv", csv.str());
    write_file(fs::path(a.out_dir) / "theory_report.json", report.dump(2) + "\n");
    write_meta(a.out_dir, "theory", cfg, {"theory.csv", "theory_report.json"});

    if (!a.quiet) {
        std::cout << "theory: L = " << ts.moments.dim() << ", mean-step bound "
                  << short4(bound) << "\n";
        std::cout << "wrote " << (fs::path(a.out_dir) / "theory.csv").string() << "\n";
    }
    return 0;
}

int do_sweep(const CommonArgs& a) {
    CliConfig cfg = prepare(a);
    const auto& sc = cfg.experiment.scenario;
    if (sc.noise.is_snr)
        throw config_error("sweep needs scenario.noise.variance (a fixed noise power)");
    if (!(sc.sigma_q2 > 0.0))
        throw config_error("sweep needs scenario.random_walk.sigma_q2 > 0");
    if (cfg.sweep.grid_points < 2)
        throw config_error("sweep.grid_points must be >= 2");
    cfg.experiment.run.freeze_map = true;  // predictions are for one fixed map

    TheorySetup ts = theory_setup(cfg, cfg.sweep.moment_samples,
                                  cfg.sweep.dimension_cap);
    auto opt = theory::optimal_step_size(ts.moments, sc.noise.value, sc.sigma_q2);

    SweepConfig swc;
    swc.base = cfg.experiment;
    swc.tail_fraction = cfg.sweep.tail_fraction;
    const double lo = opt.mu_opt / cfg.sweep.grid_span;
    const double hi = opt.mu_opt * cfg.sweep.grid_span;
    const std::size_t n = cfg.sweep.grid_points;
    for (std::size_t i = 0; i < n; ++i) {
        double f = static_cast<double>(i) / static_cast<double>(n - 1);
        swc.mu_grid.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
    }

    SweepResult res = run_mu_sweep(swc);

    std::ostringstream csv;
    csv << "mu,sim_mse,pred_mse,pred_stable,diverged_runs\n";
    double pred_best = std::numeric_limits<double>::infinity();
    std::size_t pred_argmin = n;
    for (std::size_t i = 0; i < res.points.size(); ++i) {
        auto ss = theory::steady_state(ts.moments, res.points[i].mu, sc.noise.value,
                                       sc.sigma_q2);
        const double pred = ss.stable ? ss.mse : std::numeric_limits<double>::infinity();
        if (pred < pred_best) {
            pred_best = pred;
            pred_argmin = i;
        }
        csv << format_g17(res.points[i].mu) << ',' << format_g17(res.points[i].sim_mse)
            << ',' << format_g17(ss.mse) << ',' << (ss.stable ? 1 : 0) << ','
            << res.points[i].diverged_runs << '\n';
    }

    json report{{"mu_opt", opt.mu_opt},
                {"mse_min", opt.mse_min},
                {"phi_mse", opt.phi_mse},
                {"phi_msd", opt.phi_msd},
                {"mean_step_bound", theory::mean_step_bound(ts.moments)},
                {"grid", json{{"lo", lo}, {"hi", hi}, {"points", n}}},
                {"pred_argmin_mu", pred_argmin < n ? json(swc.mu_grid[pred_argmin]) : json()},
                {"sim_argmin_mu",
                 res.argmin < n ? json(res.points[res.argmin].mu) : json()},
                {"sim_min_mse",
                 res.argmin < n ? json(res.points[res.argmin].sim_mse) : json()}};

    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "sweep.csv", csv.str());
    write_file(fs::path(a.out_dir) / "sweep_report.json", report.dump(2) + "\n");
    write_meta(a.out_dir, "sweep", cfg, {"sweep.csv", "sweep_report.json"});

    if (!a.quiet) {
        std::cout << "sweep: mu_opt " << short4(opt.mu_opt) << ", predicted min MSE "
                  << short4(opt.mse_min) << "\n";
        if (res.argmin < n)
            std::cout << "  simulated argmin mu " << short4(res.points[res.argmin].mu)
                      << " with MSE " << short4(res.points[res.argmin].sim_mse) << "\n";
        std::cout << "wrote " << (fs::path(a.out_dir) / "sweep.csv").string() << "\n";
    }
    return 0;
}

int do_bench(const CommonArgs& a) {
    CliConfig cfg = prepare(a);
    auto res = timing_benchmark(cfg.experiment, cfg.bench_block);

    fs::create_directories(a.out_dir);
    {
        std::ostringstream s;
        write_bench_csv(s, res);
        write_file(fs::path(a.out_dir) / "bench.csv", s.str());
    }
    {
        std::ostringstream s;
        write_bench_blocks_csv(s, res);
        write_file(fs::path(a.out_dir) / "bench_blocks.csv", s.str());
    }
    write_meta(a.out_dir, "bench", cfg, {"bench.csv", "bench_blocks.csv"});

    if (!a.quiet) {
        std::cout << "bench: " << cfg.experiment.run.samples << " updates, backend "
                  << cfg.backend << "\n";
        for (const auto& tr : res) {
            std::cout << "  " << tr.label << ": " << short4(tr.per_update_us)
                      << " us/update, growth exponent " << short4(tr.growth_exponent)
                      << "\n";
        }
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"random-Euler-feature complex adaptive filtering toolkit"};
    app.require_subcommand(1);

    CommonArgs identify_args, equalize_args, theory_args, sweep_args, bench_args;
    auto* s_identify = app.add_subcommand(
        "identify", "ensemble learning curves on an identification scenario");
    add_common(s_identify, identify_args);
    auto* s_equalize = app.add_subcommand(
        "equalize", "train equalizers, then measure SER on a fresh stream");
    add_common(s_equalize, equalize_args);
    auto* s_theory = app.add_subcommand(
        "theory", "transient/steady-state predictions for the random-walk scenario");
    add_common(s_theory, theory_args);
    auto* s_sweep = app.add_subcommand(
        "sweep", "step-size grid: simulated steady MSE vs prediction and mu_opt");
    add_common(s_sweep, sweep_args);
    auto* s_bench = app.add_subcommand("bench", "per-update timing of the filters");
    add_common(s_bench, bench_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (s_identify->parsed()) return do_identify(identify_args);
        if (s_equalize->parsed()) return do_equalize(equalize_args);
        if (s_theory->parsed()) return do_theory(theory_args);
        if (s_sweep->parsed()) return do_sweep(sweep_args);
        if (s_bench->parsed()) return do_bench(bench_args);
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const resource_limit_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace recf

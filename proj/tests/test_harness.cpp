#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "recf/errors.hpp"
#include "recf/harness.hpp"

#include <cmath>
#include <cstring>
#include <vector>

using namespace recf;

namespace {

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() ||
            std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bits_equal(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
    return a.size() == b.size() &&
           (a.empty() ||
            std::memcmp(a.data(), b.data(), a.size() * sizeof(cdouble)) == 0);
}

ExperimentConfig identification_base() {
    ExperimentConfig cfg;
    cfg.scenario.source.kind = SourceKind::noncircular_gaussian;
    cfg.scenario.source.rho = 0.3;
    cfg.scenario.plant = PlantModel::system2;
    cfg.scenario.m = 2;
    cfg.scenario.noise = NoiseSpec{true, 20.0};
    cfg.run.runs = 3;
    cfg.run.samples = 300;
    cfg.run.seed = 42;
    cfg.run.threads = 1;
    return cfg;
}

FilterConfig lrecf16(const std::string& label) {
    FilterConfig fc;
    fc.label = label;
    fc.kind = FilterKind::lrecf;
    fc.mu = 0.01;
    fc.feat = FeatureParams{16, 1.0};
    return fc;
}

}  // namespace

TEST_CASE("seed streams are distinct and map seeds key on parameters") {
    CHECK(experiment_seed(1, SeedStream::source, 0) !=
          experiment_seed(1, SeedStream::noise, 0));
    CHECK(experiment_seed(1, SeedStream::source, 0) !=
          experiment_seed(1, SeedStream::source, 1));
    CHECK(experiment_seed(1, SeedStream::source, 0) !=
          experiment_seed(2, SeedStream::source, 0));

    FeatureParams a{64, 0.2}, b{64, 0.3}, c{128, 0.2};
    CHECK(map_seed(1, false, 0, a) != map_seed(1, false, 0, b));
    CHECK(map_seed(1, false, 0, a) != map_seed(1, false, 0, c));
    CHECK(map_seed(1, false, 0, a) != map_seed(1, false, 5, a));
    // frozen maps ignore the run index
    CHECK(map_seed(1, true, 0, a) == map_seed(1, true, 5, a));
    CHECK(map_seed(1, true, 0, a) == map_seed(1, false, 0, a));
}

TEST_CASE("resolve_threads caps by runs and floors at one") {
    CHECK(resolve_threads(4, 2) == 2);
    CHECK(resolve_threads(2, 100) == 2);
    CHECK(resolve_threads(1, 1) == 1);
    CHECK(resolve_threads(0, 3) >= 1);
    CHECK(resolve_threads(0, 3) <= 3);
}

TEST_CASE("least_squares_slope recovers an exact line and validates input") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    std::vector<double> y{1.0, 4.0, 7.0, 10.0};  // y = 3x - 2
    CHECK(least_squares_slope(x, y) == doctest::Approx(3.0).epsilon(1e-12));

    std::vector<double> one{1.0};
    CHECK_THROWS_AS(least_squares_slope(one, one), std::invalid_argument);
    CHECK_THROWS_AS(least_squares_slope(x, one), std::invalid_argument);
    std::vector<double> flat{2.0, 2.0, 2.0, 2.0};
    CHECK_THROWS_AS(least_squares_slope(flat, y), std::invalid_argument);
}

TEST_CASE("experiment validation rejects malformed configs") {
    ExperimentConfig cfg = identification_base();
    CHECK_THROWS_AS(run_experiment(cfg), config_error);  // no filters

    cfg.filters.push_back(lrecf16("a"));
    cfg.filters.push_back(lrecf16("a"));  // duplicate label
    CHECK_THROWS_AS(run_experiment(cfg), config_error);

    cfg.filters.pop_back();
    cfg.filters[0].mu = 0.0;
    CHECK_THROWS_AS(run_experiment(cfg), config_error);
    cfg.filters[0].mu = 0.01;

    cfg.filters[0].feat.n_features = 0;
    CHECK_THROWS_AS(run_experiment(cfg), config_error);
    cfg.filters[0].feat.n_features = 16;

    cfg.run.runs = 0;
    CHECK_THROWS_AS(run_experiment(cfg), config_error);
    cfg.run.runs = 1;

    cfg.scenario.plant = PlantModel::random_walk;
    cfg.scenario.rw_feat = FeatureParams{0, 1.0};
    CHECK_THROWS_AS(run_experiment(cfg), config_error);
}

TEST_CASE("curves for one filter do not depend on which other filters run") {
    ExperimentConfig solo = identification_base();
    solo.filters.push_back(lrecf16("lr"));
    LearningCurves a = run_experiment(solo);

    ExperimentConfig trio = identification_base();
    FilterConfig clms;
    clms.label = "c";
    clms.kind = FilterKind::clms;
    clms.mu = 0.01;
    trio.filters.push_back(clms);
    trio.filters.push_back(lrecf16("lr"));
    FilterConfig ck;
    ck.label = "k";
    ck.kind = FilterKind::cklms;
    ck.mu = 0.1;
    ck.feat.sigma2 = 1.0;
    trio.filters.push_back(ck);
    LearningCurves b = run_experiment(trio);

    REQUIRE(b.filters.size() == 3);
    CHECK(b.filters[1].label == "lr");
    CHECK(bits_equal(a.filters[0].mse, b.filters[1].mse));
    CHECK(bits_equal(a.filters[0].emse, b.filters[1].emse));
}

TEST_CASE("experiments replay bitwise, also with an explicit thread count") {
    ExperimentConfig cfg = identification_base();
    cfg.run.runs = 4;
    cfg.run.threads = 2;
    cfg.filters.push_back(lrecf16("lr"));

    LearningCurves a = run_experiment(cfg);
    LearningCurves b = run_experiment(cfg);
    CHECK(a.threads_used == 2);
    CHECK(a.sigma_v2_run0 == b.sigma_v2_run0);
    CHECK(bits_equal(a.filters[0].mse, b.filters[0].mse));
    CHECK(bits_equal(a.filters[0].emse, b.filters[0].emse));
    CHECK(bits_equal(a.filters[0].mse_db, b.filters[0].mse_db));
}

TEST_CASE("identification curves expose emse and the noise-floor gap") {
    ExperimentConfig cfg = identification_base();
    cfg.run.runs = 50;
    cfg.run.samples = 400;
    cfg.filters.push_back(lrecf16("lr"));
    cfg.filters[0].feat.n_features = 64;
    cfg.filters[0].mu = 0.05;

    LearningCurves lc = run_experiment(cfg);
    const FilterCurves& fc = lc.filters[0];
    REQUIRE(fc.mse.size() == 400);
    CHECK(fc.has_emse);
    CHECK_FALSE(fc.has_msd);
    CHECK(fc.diverged_runs == 0);
    for (double v : fc.mse) CHECK(std::isfinite(v));

    // ensemble MSE - EMSE approximates the noise power once converged
    double gap = 0.0;
    for (std::size_t i = 300; i < 400; ++i) gap += fc.mse[i] - fc.emse[i];
    gap /= 100.0;
    CHECK(gap == doctest::Approx(lc.sigma_v2_run0).epsilon(0.5));

    // learning happened: late EMSE well below early EMSE
    double early = fc.emse[0];
    double late = 0.0;
    for (std::size_t i = 300; i < 400; ++i) late += fc.emse[i];
    late /= 100.0;
    CHECK(late < 0.7 * early);
}

TEST_CASE("random-walk scenario reports msd only for the matched filter") {
    ExperimentConfig cfg;
    cfg.scenario.source.kind = SourceKind::noncircular_gaussian;
    cfg.scenario.source.rho = 0.1;
    cfg.scenario.plant = PlantModel::random_walk;
    cfg.scenario.m = 2;
    cfg.scenario.rw_feat = FeatureParams{4, 0.5};
    cfg.scenario.sigma_q2 = 0.0;
    cfg.scenario.noise = NoiseSpec{false, 0.0};  // noiseless, static plant
    cfg.run.runs = 1;
    cfg.run.samples = 3000;
    cfg.run.seed = 7;
    cfg.run.threads = 1;

    FilterConfig wl;
    wl.label = "wl";
    wl.kind = FilterKind::wlrecf;
    wl.mu = 0.05;
    wl.feat = cfg.scenario.rw_feat;
    cfg.filters.push_back(wl);

    FilterConfig lr = wl;
    lr.label = "lr";
    lr.kind = FilterKind::lrecf;
    cfg.filters.push_back(lr);

    LearningCurves lc = run_experiment(cfg);
    CHECK(lc.filters[0].has_msd);
    CHECK_FALSE(lc.filters[1].has_msd);
    CHECK(lc.filters[0].has_emse);

    // the plant is representable exactly, so the matched filter drives the
    // error far down from the O(1) start; full collapse would need many more
    // steps because the noncircular source leaves near-null feature modes
    const auto& wlc = lc.filters[0];
    CHECK(wlc.msd[0] > 0.05);
    CHECK(wlc.msd[0] < 5.0);
    double tail_mse = 0.0, tail_msd = 0.0;
    for (std::size_t i = 2900; i < 3000; ++i) {
        tail_mse += wlc.mse[i];
        tail_msd += wlc.msd[i];
    }
    tail_mse /= 100.0;
    tail_msd /= 100.0;
    CHECK(tail_mse < wlc.mse[0] / 50.0);
    CHECK(tail_mse < 5e-2);
    CHECK(tail_msd < wlc.msd[0] / 3.0);
}

TEST_CASE("runs that blow up or hit the dictionary cap are excluded") {
    ExperimentConfig cfg = identification_base();
    cfg.run.runs = 2;

    FilterConfig bad;
    bad.label = "bad";
    bad.kind = FilterKind::clms;
    bad.mu = 1e8;
    cfg.filters.push_back(bad);

    FilterConfig capped;
    capped.label = "capped";
    capped.kind = FilterKind::cklms;
    capped.mu = 0.1;
    capped.feat.sigma2 = 1.0;
    capped.dictionary_cap = 3;
    cfg.filters.push_back(capped);

    cfg.filters.push_back(lrecf16("ok"));

    LearningCurves lc = run_experiment(cfg);
    CHECK(lc.filters[0].diverged_runs == 2);
    CHECK(std::isnan(lc.filters[0].mse[0]));
    CHECK(lc.filters[1].diverged_runs == 2);
    CHECK(lc.filters[2].diverged_runs == 0);

    // the surviving filter's curves match a solo run exactly
    ExperimentConfig solo = identification_base();
    solo.run.runs = 2;
    solo.filters.push_back(lrecf16("ok"));
    LearningCurves ref = run_experiment(solo);
    CHECK(bits_equal(ref.filters[0].mse, lc.filters[2].mse));
}

TEST_CASE("symbol decisions pick the nearest constellation point") {
    const auto& sym = SignalSource::qpsk_symbols();
    std::vector<cdouble> truth(sym.begin(), sym.end());
    std::vector<cdouble> preds;
    for (const auto& s : sym) preds.push_back(s * 0.9 + cdouble{0.05, -0.05});
    SerReport rep = symbol_error_rate(preds, truth);
    CHECK(rep.errors == 0);
    CHECK(rep.count == 4);
    CHECK(rep.ser == 0.0);

    // a prediction at the origin ties all four symbols; the first
    // constellation entry wins
    std::vector<cdouble> zero{cdouble{0.0, 0.0}};
    std::vector<cdouble> t1{sym[0]};
    CHECK(symbol_error_rate(zero, t1).errors == 0);
    std::vector<cdouble> t2{sym[3]};
    CHECK(symbol_error_rate(zero, t2).errors == 1);

    std::vector<cdouble> shorter{sym[0]};
    CHECK_THROWS_AS(symbol_error_rate(shorter, truth), std::invalid_argument);
}

TEST_CASE("equalization trains, freezes and scores a fresh stream") {
    ExperimentConfig cfg;
    cfg.scenario.source.kind = SourceKind::qpsk;
    cfg.scenario.plant = PlantModel::eq_channel;
    cfg.scenario.m = 3;
    cfg.scenario.delay = 2;
    cfg.scenario.noise = NoiseSpec{true, 15.0};
    cfg.run.runs = 2;
    cfg.run.samples = 2000;
    cfg.run.seed = 11;
    cfg.run.threads = 1;

    FilterConfig wl;
    wl.label = "wl";
    wl.kind = FilterKind::wlrecf;
    wl.mu = 0.08;
    wl.feat = FeatureParams{64, 0.05};
    cfg.filters.push_back(wl);

    CHECK_THROWS_AS(run_equalization(cfg, 0, 10), config_error);

    EqualizationResult eq = run_equalization(cfg, 2000, 100);
    REQUIRE(eq.filters.size() == 1);
    CHECK(eq.test_symbols_per_run == 2000);
    CHECK(eq.filters[0].ser.count == 4000);
    CHECK(eq.filters[0].ser.ser < 0.5);  // far better than the 0.75 guess rate
    CHECK(eq.filters[0].eye.size() == 100);
    CHECK(eq.training.filters[0].mse.size() == 2000);
    CHECK_FALSE(eq.training.filters[0].has_emse);

    EqualizationResult eq2 = run_equalization(cfg, 2000, 100);
    CHECK(eq2.filters[0].ser.errors == eq.filters[0].ser.errors);
    CHECK(bits_equal(eq2.filters[0].eye, eq.filters[0].eye));
    CHECK(bits_equal(eq2.training.filters[0].mse, eq.training.filters[0].mse));

    ExperimentConfig wrong = identification_base();
    wrong.filters.push_back(lrecf16("lr"));
    CHECK_THROWS_AS(run_equalization(wrong, 100, 10), config_error);
}

TEST_CASE("mu sweep shares streams across the grid and skips unstable points") {
    SweepConfig sw;
    sw.base.scenario.source.kind = SourceKind::noncircular_gaussian;
    sw.base.scenario.source.rho = 0.1;
    sw.base.scenario.plant = PlantModel::random_walk;
    sw.base.scenario.m = 1;
    sw.base.scenario.rw_feat = FeatureParams{2, 0.5};
    sw.base.scenario.sigma_q2 = 1e-6;
    sw.base.scenario.noise = NoiseSpec{false, 1e-3};
    sw.base.run.runs = 2;
    sw.base.run.samples = 500;
    sw.base.run.seed = 3;
    sw.base.run.threads = 1;
    sw.base.run.freeze_map = true;

    FilterConfig wl;
    wl.label = "wl";
    wl.kind = FilterKind::wlrecf;
    wl.mu = 1.0;  // overwritten per grid point
    wl.feat = sw.base.scenario.rw_feat;
    sw.base.filters.push_back(wl);

    sw.mu_grid = {1e-4, 0.05, 1e9};
    sw.tail_fraction = 0.2;

    SweepResult res = run_mu_sweep(sw);
    REQUIRE(res.points.size() == 3);
    CHECK(res.points[0].diverged_runs == 0);
    CHECK(res.points[1].diverged_runs == 0);
    CHECK(res.points[2].diverged_runs == 2);
    CHECK(std::isinf(res.points[2].sim_mse));
    CHECK(res.argmin == 1);  // 1e-4 barely adapts in 500 steps

    SweepResult res2 = run_mu_sweep(sw);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(res2.points[i].sim_mse == res.points[i].sim_mse);
        CHECK(res2.points[i].diverged_runs == res.points[i].diverged_runs);
    }

    sw.mu_grid.clear();
    CHECK_THROWS_AS(run_mu_sweep(sw), config_error);
}

TEST_CASE("timing benchmark produces blocks and a growing-dictionary slope") {
    ExperimentConfig cfg = identification_base();
    cfg.scenario.m = 8;
    cfg.run.samples = 4000;
    cfg.run.runs = 1;

    FilterConfig c;
    c.label = "clms";
    c.kind = FilterKind::clms;
    c.mu = 0.01;
    cfg.filters.push_back(c);

    FilterConfig k;
    k.label = "cklms";
    k.kind = FilterKind::cklms;
    k.mu = 0.1;
    k.feat.sigma2 = 1.0;
    k.dictionary_cap = 1000000;
    cfg.filters.push_back(k);

    CHECK_THROWS_AS(timing_benchmark(cfg, 0), config_error);

    auto res = timing_benchmark(cfg, 400);
    REQUIRE(res.size() == 2);
    for (const auto& tr : res) {
        CHECK(tr.block_s.size() == 9);  // (4000 - 200 warmup) / 400
        CHECK(tr.warmup_updates == 200);
        CHECK(tr.timed_updates == 3600);
        CHECK(tr.total_s > 0.0);
        CHECK(tr.per_update_us > 0.0);
        CHECK(std::isfinite(tr.growth_exponent));
        for (std::size_t b = 1; b < tr.block_center.size(); ++b)
            CHECK(tr.block_center[b] > tr.block_center[b - 1]);
    }
    // per-update cost of the dictionary filter grows with the dictionary
    CHECK(res[1].growth_exponent > 0.2);
    CHECK(res[1].total_s > res[0].total_s);

    ExperimentConfig tiny = identification_base();
    tiny.filters.push_back(lrecf16("lr"));
    tiny.run.samples = 300;
    CHECK_THROWS_AS(timing_benchmark(tiny, 300), config_error);
}

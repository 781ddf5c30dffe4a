#include "recf/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string_view>

#include "recf/errors.hpp"
#include "recf/kernels.hpp"

namespace recf {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw config_error(msg); }

void check_keys(const json& j, const char* section,
                std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) fail(std::string(section) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (auto a : allowed)
            if (it.key() == a) {
                known = true;
                break;
            }
        if (!known)
            fail("unknown key '" + it.key() + "' in " + section);
    }
}

double get_double(const json& j, const char* section, const char* key, double def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) fail(std::string(section) + "." + key + " must be a number");
    return v.get<double>();
}

std::size_t get_size(const json& j, const char* section, const char* key,
                     std::size_t def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<long long>() < 0))
        fail(std::string(section) + "." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

std::uint64_t get_u64(const json& j, const char* section, const char* key,
                      std::uint64_t def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
        fail(std::string(section) + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& j, const char* section, const char* key, bool def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(std::string(section) + "." + key + " must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& j, const char* section, const char* key,
                       const std::string& def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) fail(std::string(section) + "." + key + " must be a string");
    return v.get<std::string>();
}

// a single number or an array of numbers
std::vector<double> get_double_list(const json& j, const char* section,
                                    const char* key, std::vector<double> def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty())
        fail(std::string(section) + "." + key + " must be a number or non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            fail(std::string(section) + "." + key + " entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

SourceSpec parse_source(const json& j) {
    check_keys(j, "scenario.source", {"kind", "rho", "probs"});
    SourceSpec s;
    std::string kind = get_string(j, "scenario.source", "kind",
                                  std::string(to_string(s.kind)));
    auto parsed = parse_source_kind(kind);
    if (!parsed) fail("scenario.source.kind: unknown source '" + kind + "'");
    s.kind = *parsed;
    s.rho = get_double(j, "scenario.source", "rho", s.rho);
    if (j.contains("probs")) {
        const json& p = j.at("probs");
        if (!p.is_array() || p.size() != 4)
            fail("scenario.source.probs must be an array of 4 numbers");
        for (std::size_t i = 0; i < 4; ++i) {
            if (!p[i].is_number()) fail("scenario.source.probs entries must be numbers");
            s.qpsk_probs[i] = p[i].get<double>();
        }
    }
    return s;
}

NoiseSpec parse_noise(const json& j) {
    check_keys(j, "scenario.noise", {"snr_db", "variance"});
    const bool has_snr = j.contains("snr_db");
    const bool has_var = j.contains("variance");
    if (has_snr == has_var)
        fail("scenario.noise needs exactly one of snr_db or variance");
    NoiseSpec n;
    n.is_snr = has_snr;
    n.value = get_double(j, "scenario.noise", has_snr ? "snr_db" : "variance", 0.0);
    return n;
}

ScenarioConfig parse_scenario(const json& j) {
    check_keys(j, "scenario",
               {"source", "plant", "m", "noise", "delay", "random_walk"});
    ScenarioConfig sc;
    if (j.contains("source")) sc.source = parse_source(j.at("source"));
    std::string plant = get_string(j, "scenario", "plant",
                                   std::string(to_string(sc.plant)));
    auto parsed = parse_plant_model(plant);
    if (!parsed) fail("scenario.plant: unknown plant '" + plant + "'");
    sc.plant = *parsed;
    sc.m = get_size(j, "scenario", "m", sc.m);
    if (j.contains("noise")) sc.noise = parse_noise(j.at("noise"));
    sc.delay = get_size(j, "scenario", "delay", sc.delay);
    if (j.contains("random_walk")) {
        const json& rw = j.at("random_walk");
        check_keys(rw, "scenario.random_walk", {"n_features", "sigma2", "sigma_q2"});
        sc.rw_feat.n_features =
            get_size(rw, "scenario.random_walk", "n_features", sc.rw_feat.n_features);
        sc.rw_feat.sigma2 =
            get_double(rw, "scenario.random_walk", "sigma2", sc.rw_feat.sigma2);
        sc.sigma_q2 = get_double(rw, "scenario.random_walk", "sigma_q2", sc.sigma_q2);
    }
    return sc;
}

std::vector<FilterConfig> parse_filters(const json& j) {
    if (!j.is_array() || j.empty())
        fail("filters must be a non-empty array");
    std::vector<FilterConfig> out;
    std::set<std::string> user_labels;
    for (const auto& e : j) {
        check_keys(e, "filters[]",
                   {"kind", "mu", "label", "n_features", "sigma2", "dictionary_cap"});
        FilterConfig fc;
        std::string kind = get_string(e, "filters[]", "kind", "");
        auto parsed = parse_filter_kind(kind);
        if (!parsed) fail("filters[].kind: unknown filter '" + kind + "'");
        fc.kind = *parsed;
        if (!e.contains("mu")) fail("filters[].mu is required");
        fc.mu = get_double(e, "filters[]", "mu", 0.0);
        fc.label = get_string(e, "filters[]", "label", "");
        fc.feat.n_features = get_size(e, "filters[]", "n_features", 0);
        fc.feat.sigma2 = get_double(e, "filters[]", "sigma2", 1.0);
        fc.dictionary_cap = get_size(e, "filters[]", "dictionary_cap", fc.dictionary_cap);
        if (!fc.label.empty() && !user_labels.insert(fc.label).second)
            fail("duplicate filter label '" + fc.label + "'");
        out.push_back(std::move(fc));
    }
    // default labels from the kind, suffixed when taken
    for (auto& fc : out) {
        if (!fc.label.empty()) continue;
        std::string base(to_string(fc.kind));
        std::string candidate = base;
        int k = 2;
        while (!user_labels.insert(candidate).second)
            candidate = base + "-" + std::to_string(k++);
        fc.label = candidate;
    }
    return out;
}

RunConfig parse_run(const json& j) {
    check_keys(j, "run", {"runs", "samples", "seed", "freeze_map", "threads"});
    RunConfig r;
    r.runs = get_size(j, "run", "runs", r.runs);
    r.samples = get_size(j, "run", "samples", r.samples);
    r.seed = get_u64(j, "run", "seed", r.seed);
    r.freeze_map = get_bool(j, "run", "freeze_map", r.freeze_map);
    r.threads = static_cast<int>(get_size(j, "run", "threads", 0));
    return r;
}

TheoryCliConfig parse_theory(const json& j) {
    check_keys(j, "theory",
               {"moment_samples", "mu", "sigma_v2", "steps", "simulate", "sim_runs",
                "dimension_cap"});
    TheoryCliConfig t;
    t.moment_samples = get_size(j, "theory", "moment_samples", t.moment_samples);
    t.mu = get_double_list(j, "theory", "mu", t.mu);
    t.sigma_v2 = get_double_list(j, "theory", "sigma_v2", t.sigma_v2);
    t.steps = get_size(j, "theory", "steps", t.steps);
    t.simulate = get_bool(j, "theory", "simulate", t.simulate);
    t.sim_runs = get_size(j, "theory", "sim_runs", t.sim_runs);
    t.dimension_cap = get_size(j, "theory", "dimension_cap", t.dimension_cap);
    return t;
}

SweepCliConfig parse_sweep(const json& j) {
    check_keys(j, "sweep",
               {"grid_points", "grid_span", "tail_fraction", "moment_samples",
                "dimension_cap"});
    SweepCliConfig s;
    s.grid_points = get_size(j, "sweep", "grid_points", s.grid_points);
    s.grid_span = get_double(j, "sweep", "grid_span", s.grid_span);
    s.tail_fraction = get_double(j, "sweep", "tail_fraction", s.tail_fraction);
    s.moment_samples = get_size(j, "sweep", "moment_samples", s.moment_samples);
    s.dimension_cap = get_size(j, "sweep", "dimension_cap", s.dimension_cap);
    return s;
}

}  // namespace

CliConfig parse_config(const json& j) {
    check_keys(j, "config",
               {"scenario", "filters", "run", "equalize", "theory", "sweep", "bench",
                "backend"});
    CliConfig cfg;
    if (j.contains("scenario"))
        cfg.experiment.scenario = parse_scenario(j.at("scenario"));
    if (j.contains("filters"))
        cfg.experiment.filters = parse_filters(j.at("filters"));
    if (j.contains("run")) cfg.experiment.run = parse_run(j.at("run"));
    if (j.contains("equalize")) {
        const json& e = j.at("equalize");
        check_keys(e, "equalize", {"test_symbols", "eye_samples"});
        cfg.test_symbols = get_size(e, "equalize", "test_symbols", cfg.test_symbols);
        cfg.eye_samples = get_size(e, "equalize", "eye_samples", cfg.eye_samples);
    }
    if (j.contains("theory")) cfg.theory = parse_theory(j.at("theory"));
    if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"));
    if (j.contains("bench")) {
        const json& b = j.at("bench");
        check_keys(b, "bench", {"block"});
        cfg.bench_block = get_size(b, "bench", "block", cfg.bench_block);
    }
    cfg.backend = get_string(j, "config", "backend", "");
    if (!cfg.backend.empty() && !kernels::parse_backend(cfg.backend))
        fail("backend: unknown backend '" + cfg.backend + "'");
    return cfg;
}

CliConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail("config '" + path + "': " + e.what());
    }
    if (j.is_object() && j.contains("format")) {
        // replay sidecar: the run's configuration is embedded under "config"
        if (j.at("format") != "recf-meta-v1")
            fail("config '" + path + "': unsupported sidecar format");
        if (!j.contains("config"))
            fail("config '" + path + "': sidecar has no embedded config");
        return parse_config(j.at("config"));
    }
    return parse_config(j);
}

void finalize_config(CliConfig& cfg) {
    if (cfg.backend.empty())
        cfg.backend = std::string(kernels::name(kernels::best_available()));
    cfg.experiment.run.threads =
        resolve_threads(cfg.experiment.run.threads, cfg.experiment.run.runs);
}

nlohmann::json resolved_json(const CliConfig& cfg) {
    const auto& sc = cfg.experiment.scenario;
    const auto& run = cfg.experiment.run;

    json source{{"kind", std::string(to_string(sc.source.kind))},
                {"rho", sc.source.rho},
                {"probs", sc.source.qpsk_probs}};
    json noise;
    noise[sc.noise.is_snr ? "snr_db" : "variance"] = sc.noise.value;
    json scenario{{"source", std::move(source)},
                  {"plant", std::string(to_string(sc.plant))},
                  {"m", sc.m},
                  {"noise", std::move(noise)},
                  {"delay", sc.delay}};
    if (sc.plant == PlantModel::random_walk)
        scenario["random_walk"] = json{{"n_features", sc.rw_feat.n_features},
                                       {"sigma2", sc.rw_feat.sigma2},
                                       {"sigma_q2", sc.sigma_q2}};

    json filters = json::array();
    for (const auto& fc : cfg.experiment.filters) {
        json f{{"kind", std::string(to_string(fc.kind))},
               {"mu", fc.mu},
               {"label", fc.label}};
        if (fc.kind == FilterKind::lrecf || fc.kind == FilterKind::wlrecf)
            f["n_features"] = fc.feat.n_features;
        if (fc.kind != FilterKind::clms) f["sigma2"] = fc.feat.sigma2;
        if (fc.kind == FilterKind::cklms) f["dictionary_cap"] = fc.dictionary_cap;
        filters.push_back(std::move(f));
    }

    json j{{"scenario", std::move(scenario)},
           {"filters", std::move(filters)},
           {"run",
            json{{"runs", run.runs},
                 {"samples", run.samples},
                 {"seed", run.seed},
                 {"freeze_map", run.freeze_map},
                 {"threads", run.threads < 0 ? 0 : run.threads}}},
           {"equalize",
            json{{"test_symbols", cfg.test_symbols}, {"eye_samples", cfg.eye_samples}}},
           {"theory",
            json{{"moment_samples", cfg.theory.moment_samples},
                 {"mu", cfg.theory.mu},
                 {"sigma_v2", cfg.theory.sigma_v2},
                 {"steps", cfg.theory.steps},
                 {"simulate", cfg.theory.simulate},
                 {"sim_runs", cfg.theory.sim_runs},
                 {"dimension_cap", cfg.theory.dimension_cap}}},
           {"sweep",
            json{{"grid_points", cfg.sweep.grid_points},
                 {"grid_span", cfg.sweep.grid_span},
                 {"tail_fraction", cfg.sweep.tail_fraction},
                 {"moment_samples", cfg.sweep.moment_samples},
                 {"dimension_cap", cfg.sweep.dimension_cap}}},
           {"bench", json{{"block", cfg.bench_block}}}};
    if (!cfg.backend.empty()) j["backend"] = cfg.backend;
    return j;
}

}  // namespace recf

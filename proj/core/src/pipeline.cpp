#include "spectune/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "spectune/errors.hpp"
#include "spectune/integrator.hpp"
#include "spectune/rng.hpp"

namespace spectune {

using nlohmann::json;

namespace {

constexpr const char* kPrngDoc =
    "mt19937_64; uniform01=top-53-bits/2^53; normal=box-muller; bounded-int=rejection";

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json config_echo(const ExperimentConfig& cfg) {
    if (cfg.echo_json.empty()) return json::object();
    json echo = json::parse(cfg.echo_json, nullptr, false);
    return echo.is_discarded() ? json::object() : echo;
}

// --- config parsing ---------------------------------------------------------

[[noreturn]] void bad_key(const std::string& path, const std::string& why) {
    throw ConfigError("config error at \"" + path + "\": " + why);
}

void check_known_keys(const json& j, const std::string& path,
                      std::initializer_list<const char*> known) {
    if (!j.is_object()) bad_key(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || (it.key() == k);
        if (!ok) bad_key(path + "." + it.key(), "unknown key");
    }
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad_key(path + "." + key, "wrong type");
    }
}

SystemConfig parse_system(const json& j, const std::string& path, SystemConfig base) {
    check_known_keys(j, path,
                     {"kind", "n", "graph_seed", "m", "coupling", "spread", "omega_seed",
                      "couple_interior_only", "scalar_a"});
    SystemConfig cfg = base;
    cfg.kind = get_or<std::string>(j, path, "kind", cfg.kind);
    cfg.n = get_or<int>(j, path, "n", cfg.n);
    cfg.graph_seed = get_or<std::uint64_t>(j, path, "graph_seed", cfg.graph_seed);
    cfg.m = get_or<int>(j, path, "m", cfg.m);
    cfg.coupling = get_or<double>(j, path, "coupling", cfg.coupling);
    cfg.spread = get_or<double>(j, path, "spread", cfg.spread);
    cfg.omega_seed = get_or<std::uint64_t>(j, path, "omega_seed", cfg.omega_seed);
    cfg.couple_interior_only = get_or<bool>(j, path, "couple_interior_only", cfg.couple_interior_only);
    cfg.scalar_a = get_or<double>(j, path, "scalar_a", cfg.scalar_a);
    if (cfg.kind != "diffusive" && cfg.kind != "kuramoto" && cfg.kind != "scalar-linear")
        bad_key(path + ".kind", "must be diffusive|kuramoto|scalar-linear");
    if (cfg.n < 1) bad_key(path + ".n", "must be >= 1");
    return cfg;
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");

    check_known_keys(j, "<root>",
                     {"system", "spec", "grid", "inputs", "distance", "inner", "init", "schedule",
                      "phases", "epsilons", "output_dir", "workers", "reset_moments_per_stage"});

    ExperimentConfig cfg;
    if (j.contains("system")) cfg.system = parse_system(j["system"], "system", cfg.system);
    {
        SystemConfig spec_base;
        spec_base.kind = cfg.system.kind;
        spec_base.n = cfg.system.kind == "kuramoto" ? 1 : 2;
        spec_base.coupling = cfg.system.coupling;
        cfg.spec = j.contains("spec") ? parse_system(j["spec"], "spec", spec_base) : spec_base;
    }
    if (j.contains("grid")) {
        check_known_keys(j["grid"], "grid", {"t_final", "dt"});
        cfg.grid.t_final = get_or<double>(j["grid"], "grid", "t_final", cfg.grid.t_final);
        cfg.grid.dt = get_or<double>(j["grid"], "grid", "dt", cfg.grid.dt);
        if (!(cfg.grid.t_final > 0.0) || !(cfg.grid.dt > 0.0)) bad_key("grid", "t_final and dt must be > 0");
    }
    if (j.contains("inputs")) {
        check_known_keys(j["inputs"], "inputs", {"n_modes", "amplitude_sigma", "seed", "n_samples"});
        const json& ji = j["inputs"];
        cfg.inputs.n_modes = get_or<int>(ji, "inputs", "n_modes", cfg.inputs.n_modes);
        cfg.inputs.amplitude_sigma = get_or<double>(
            ji, "inputs", "amplitude_sigma", InputEnsembleSpec::default_sigma(cfg.inputs.n_modes));
        cfg.inputs.seed = get_or<std::uint64_t>(ji, "inputs", "seed", cfg.inputs.seed);
        cfg.inputs.n_samples = get_or<int>(ji, "inputs", "n_samples", cfg.inputs.n_samples);
        if (cfg.inputs.n_modes < 0) bad_key("inputs.n_modes", "must be >= 0");
        if (!(cfg.inputs.amplitude_sigma > 0.0)) bad_key("inputs.amplitude_sigma", "must be > 0");
        if (cfg.inputs.n_samples < 1) bad_key("inputs.n_samples", "must be >= 1");
    }
    if (j.contains("distance")) {
        check_known_keys(j["distance"], "distance", {"transient_cutoff"});
        cfg.distance.transient_cutoff =
            get_or<double>(j["distance"], "distance", "transient_cutoff", cfg.distance.transient_cutoff);
        if (cfg.distance.transient_cutoff < 0.0 || cfg.distance.transient_cutoff >= cfg.grid.t_final)
            bad_key("distance.transient_cutoff", "must lie in [0, grid.t_final)");
    }
    if (j.contains("inner")) {
        check_known_keys(j["inner"], "inner", {"iterations", "grad_tolerance"});
        cfg.inner.iterations = get_or<int>(j["inner"], "inner", "iterations", cfg.inner.iterations);
        cfg.inner.grad_tolerance =
            get_or<double>(j["inner"], "inner", "grad_tolerance", cfg.inner.grad_tolerance);
        if (cfg.inner.iterations < 0) bad_key("inner.iterations", "must be >= 0");
    }
    if (j.contains("init")) {
        check_known_keys(j["init"], "init", {"p_seed"});
        cfg.init.p_seed = get_or<std::uint64_t>(j["init"], "init", "p_seed", cfg.init.p_seed);
    }
    if (j.contains("schedule")) {
        if (!j["schedule"].is_array()) bad_key("schedule", "expected an array");
        cfg.schedule.clear();
        int idx = 0;
        for (const json& je : j["schedule"]) {
            const std::string path = "schedule[" + std::to_string(idx++) + "]";
            check_known_keys(je, path, {"optimizer", "learning_rate", "iterations", "repetitions"});
            ScheduleEntryConfig entry;
            entry.optimizer = get_or<std::string>(je, path, "optimizer", entry.optimizer);
            entry.learning_rate = get_or<double>(je, path, "learning_rate", entry.learning_rate);
            entry.iterations = get_or<int>(je, path, "iterations", entry.iterations);
            entry.repetitions = get_or<int>(je, path, "repetitions", entry.repetitions);
            optimizer_kind_from_string(entry.optimizer); // validates
            if (entry.iterations < 0) bad_key(path + ".iterations", "must be >= 0");
            if (entry.repetitions < 1) bad_key(path + ".repetitions", "must be >= 1");
            cfg.schedule.push_back(entry);
        }
    } else {
        cfg.schedule = {{"adam", 0.01, 50, 1}, {"amsgrad", 0.01, 200, 1}};
    }
    if (j.contains("phases")) {
        if (!j["phases"].is_array()) bad_key("phases", "expected an array");
        cfg.phases.clear();
        int idx = 0;
        for (const json& jp : j["phases"]) {
            const std::string path = "phases[" + std::to_string(idx++) + "]";
            check_known_keys(jp, path, {"n_samples", "schedule_repetitions"});
            PhaseConfig phase;
            phase.n_samples = get_or<int>(jp, path, "n_samples", cfg.inputs.n_samples);
            phase.schedule_repetitions = get_or<int>(jp, path, "schedule_repetitions", 1);
            if (phase.n_samples < 1) bad_key(path + ".n_samples", "must be >= 1");
            if (phase.schedule_repetitions < 0) bad_key(path + ".schedule_repetitions", "must be >= 0");
            cfg.phases.push_back(phase);
        }
    }
    if (cfg.phases.empty()) cfg.phases = {{cfg.inputs.n_samples, 1}};
    if (j.contains("epsilons")) {
        check_known_keys(j["epsilons"], "epsilons", {"start", "stop", "count"});
        cfg.epsilons.start = get_or<double>(j["epsilons"], "epsilons", "start", cfg.epsilons.start);
        cfg.epsilons.stop = get_or<double>(j["epsilons"], "epsilons", "stop", cfg.epsilons.stop);
        cfg.epsilons.count = get_or<int>(j["epsilons"], "epsilons", "count", cfg.epsilons.count);
        if (cfg.epsilons.count < 1) bad_key("epsilons.count", "must be >= 1");
        if (cfg.epsilons.stop < cfg.epsilons.start) bad_key("epsilons", "stop must be >= start");
    }
    cfg.output_dir = get_or<std::string>(j, "<root>", "output_dir", cfg.output_dir);
    cfg.workers = get_or<int>(j, "<root>", "workers", cfg.workers);
    if (cfg.workers < 1) bad_key("workers", "must be >= 1");
    cfg.reset_moments_per_stage =
        get_or<bool>(j, "<root>", "reset_moments_per_stage", cfg.reset_moments_per_stage);

    // Canonical echo of the effective config.
    json echo;
    echo["system"] = {{"kind", cfg.system.kind},
                      {"n", cfg.system.n},
                      {"graph_seed", cfg.system.graph_seed},
                      {"m", cfg.system.m},
                      {"coupling", cfg.system.coupling},
                      {"spread", cfg.system.spread},
                      {"omega_seed", cfg.system.omega_seed},
                      {"couple_interior_only", cfg.system.couple_interior_only},
                      {"scalar_a", cfg.system.scalar_a}};
    echo["spec"] = {{"kind", cfg.spec.kind},
                    {"n", cfg.spec.n},
                    {"graph_seed", cfg.spec.graph_seed},
                    {"m", cfg.spec.m},
                    {"coupling", cfg.spec.coupling},
                    {"spread", cfg.spec.spread},
                    {"omega_seed", cfg.spec.omega_seed},
                    {"couple_interior_only", cfg.spec.couple_interior_only},
                    {"scalar_a", cfg.spec.scalar_a}};
    echo["grid"] = {{"t_final", cfg.grid.t_final}, {"dt", cfg.grid.dt}};
    echo["inputs"] = {{"n_modes", cfg.inputs.n_modes},
                      {"amplitude_sigma", cfg.inputs.amplitude_sigma},
                      {"seed", cfg.inputs.seed},
                      {"n_samples", cfg.inputs.n_samples}};
    echo["distance"] = {{"transient_cutoff", cfg.distance.transient_cutoff}};
    echo["inner"] = {{"iterations", cfg.inner.iterations},
                     {"grad_tolerance", cfg.inner.grad_tolerance}};
    echo["init"] = {{"p_seed", cfg.init.p_seed}};
    echo["schedule"] = json::array();
    for (const ScheduleEntryConfig& e : cfg.schedule)
        echo["schedule"].push_back({{"optimizer", e.optimizer},
                                    {"learning_rate", e.learning_rate},
                                    {"iterations", e.iterations},
                                    {"repetitions", e.repetitions}});
    echo["phases"] = json::array();
    for (const PhaseConfig& p : cfg.phases)
        echo["phases"].push_back(
            {{"n_samples", p.n_samples}, {"schedule_repetitions", p.schedule_repetitions}});
    echo["epsilons"] = {{"start", cfg.epsilons.start},
                        {"stop", cfg.epsilons.stop},
                        {"count", cfg.epsilons.count}};
    echo["output_dir"] = cfg.output_dir;
    echo["workers"] = cfg.workers;
    echo["reset_moments_per_stage"] = cfg.reset_moments_per_stage;
    cfg.echo_json = echo.dump();
    return cfg;
}

std::string apply_config_overrides(const std::string& json_text,
                                   const std::vector<std::string>& overrides) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");

    for (const std::string& entry : overrides) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override must look like key.path=value: " + entry);
        const std::string path = entry.substr(0, eq);
        const std::string value_text = entry.substr(eq + 1);

        json value = json::parse(value_text, nullptr, false);
        if (value.is_discarded()) value = value_text; // raw strings stay strings

        json* node = &j;
        std::stringstream tokens(path);
        std::string token;
        std::vector<std::string> parts;
        while (std::getline(tokens, token, '.')) parts.push_back(token);
        if (parts.empty()) throw ConfigError("override has empty key path: " + entry);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            const std::string& part = parts[i];
            const bool numeric = !part.empty() && part.find_first_not_of("0123456789") == std::string::npos;
            if (numeric && node->is_array()) {
                const std::size_t idx = std::stoul(part);
                if (idx >= node->size()) throw ConfigError("override index out of range: " + entry);
                node = &(*node)[idx];
            } else {
                node = &(*node)[part];
            }
        }
        const std::string& leaf = parts.back();
        const bool numeric = !leaf.empty() && leaf.find_first_not_of("0123456789") == std::string::npos;
        if (numeric && node->is_array()) {
            const std::size_t idx = std::stoul(leaf);
            if (idx >= node->size()) throw ConfigError("override index out of range: " + entry);
            (*node)[idx] = value;
        } else {
            (*node)[leaf] = value;
        }
    }
    return j.dump();
}

std::string default_diffusive_config_json() {
    return R"({
  "system": {"kind": "diffusive", "n": 10, "graph_seed": 1, "m": 2},
  "spec": {"kind": "diffusive", "n": 2},
  "grid": {"t_final": 10.0, "dt": 0.01},
  "inputs": {"n_modes": 10, "seed": 12345, "n_samples": 10},
  "distance": {"transient_cutoff": 0.0},
  "inner": {"iterations": 60},
  "init": {"p_seed": 7},
  "schedule": [
    {"optimizer": "adam", "learning_rate": 0.01, "iterations": 50},
    {"optimizer": "amsgrad", "learning_rate": 0.01, "iterations": 200}
  ],
  "phases": [
    {"n_samples": 10, "schedule_repetitions": 1},
    {"n_samples": 100, "schedule_repetitions": 10}
  ],
  "epsilons": {"start": 0.0, "stop": 1.0, "count": 101},
  "output_dir": "out-diffusive",
  "workers": 1
})";
}

std::string default_kuramoto_config_json() {
    return R"({
  "system": {"kind": "kuramoto", "n": 10, "coupling": 1.0, "spread": 1.2, "omega_seed": 3},
  "spec": {"kind": "kuramoto", "n": 1},
  "grid": {"t_final": 10.0, "dt": 0.01},
  "inputs": {"n_modes": 10, "seed": 12345, "n_samples": 10},
  "distance": {"transient_cutoff": 2.0},
  "inner": {"iterations": 60},
  "init": {"p_seed": 7},
  "schedule": [
    {"optimizer": "adam", "learning_rate": 0.01, "iterations": 100},
    {"optimizer": "bfgs", "iterations": 100}
  ],
  "phases": [
    {"n_samples": 10, "schedule_repetitions": 1}
  ],
  "epsilons": {"start": 0.0, "stop": 1.0, "count": 101},
  "output_dir": "out-kuramoto",
  "workers": 1
})";
}

BuiltSystem build_system(const SystemConfig& cfg) {
    BuiltSystem built;
    built.kind = cfg.kind;
    if (cfg.kind == "diffusive") {
        if (cfg.n == 1) {
            built.graph = AdjacencyMatrix::empty(1);
        } else {
            const int m_eff = std::min(cfg.m, cfg.n - 1);
            built.graph = barabasi_albert(cfg.n, m_eff, cfg.graph_seed);
        }
        built.family = make_diffusive(built.graph);
    } else if (cfg.kind == "kuramoto") {
        KuramotoConfig kc;
        kc.n = cfg.n;
        kc.omegas = draw_intrinsic_frequencies(cfg.n, cfg.omega_seed);
        kc.coupling = cfg.coupling;
        kc.spread = cfg.spread;
        kc.couple_interior_only = cfg.couple_interior_only;
        built.family = make_kuramoto(kc);
        built.omegas.resize(static_cast<std::size_t>(cfg.n));
        for (int i = 0; i < cfg.n; ++i) built.omegas[static_cast<std::size_t>(i)] = kc.omegas[static_cast<std::size_t>(i)] * cfg.spread;
    } else if (cfg.kind == "scalar-linear") {
        built.family = make_scalar_linear(cfg.scalar_a);
    } else {
        throw ConfigError("unknown system kind: " + cfg.kind);
    }
    return built;
}

namespace {

json system_meta_json(const BuiltSystem& built) {
    json meta;
    meta["kind"] = built.kind;
    if (built.kind == "diffusive") {
        json edges = json::array();
        for (const auto& [a, b] : built.graph.edges()) edges.push_back({a, b});
        meta["n"] = built.graph.n;
        meta["graph_edges"] = edges;
    } else if (built.kind == "kuramoto") {
        meta["omegas_scaled"] = built.omegas;
    }
    meta["state_dim"] = built.family.state_dim;
    meta["param_dim"] = built.family.param_dim;
    return meta;
}

json fits_json(const std::vector<InnerFitResult>& fits) {
    json arr = json::array();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const InnerFitResult& fit = fits[i];
        json entry;
        entry["index"] = i;
        entry["distance"] = std::isfinite(fit.distance) ? json(fit.distance) : json();
        entry["converged"] = fit.converged;
        entry["n_evals"] = fit.n_evals;
        std::vector<double> q_log(fit.q.data(), fit.q.data() + fit.q.size());
        entry["q_log"] = q_log;
        std::vector<double> q_nat;
        q_nat.reserve(q_log.size());
        for (double v : q_log) q_nat.push_back(std::exp(v));
        entry["q"] = q_nat;
        arr.push_back(entry);
    }
    return arr;
}

json steps_json(const std::vector<TuningStepRecord>& steps) {
    json arr = json::array();
    for (const TuningStepRecord& s : steps) {
        json row;
        row["label"] = s.label;
        row["optimizer"] = s.optimizer;
        row["loss_before"] = std::isfinite(s.loss_before) ? json(s.loss_before) : json();
        row["loss_after"] = std::isfinite(s.loss_after) ? json(s.loss_after) : json();
        row["wall_time_s"] = s.wall_time_s;
        arr.push_back(row);
    }
    return arr;
}

OptimizerConfig inner_optimizer_config(const ExperimentConfig& cfg) {
    OptimizerConfig inner;
    inner.kind = OptimizerKind::Bfgs;
    inner.iterations = cfg.inner.iterations;
    inner.grad_tolerance = cfg.inner.grad_tolerance;
    return inner;
}

OptimizerConfig stage_optimizer_config(const ScheduleEntryConfig& entry) {
    OptimizerConfig opt;
    opt.kind = optimizer_kind_from_string(entry.optimizer);
    opt.learning_rate = entry.learning_rate;
    opt.iterations = entry.iterations;
    return opt;
}

void write_report_file(const std::string& path, const json& report) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << report.dump(2) << "\n";
}

void write_first_trajectories(const ExperimentConfig& cfg, const SystemFamily& system,
                              const Vec& p, const SystemFamily& spec,
                              const std::vector<FourierSignal>& sample,
                              const std::vector<InnerFitResult>& fits, const TimeGrid& grid) {
    const int n_plot = std::min<int>(3, static_cast<int>(sample.size()));
    for (int k = 0; k < n_plot; ++k) {
        const std::size_t uk = static_cast<std::size_t>(k);
        Trajectory o_sys;
        Trajectory o_spec;
        try {
            o_sys = output_trajectory(system, p, sample[uk], grid);
            o_spec = output_trajectory(spec, fits[uk].q, sample[uk], grid);
        } catch (const NonFiniteStateError&) {
            continue; // diverged fits have no plottable trajectory
        }
        const std::string path =
            cfg.output_dir + "/trajectories_" + std::to_string(k) + ".csv";
        write_trajectories_csv(path, o_sys, o_spec);
    }
}

std::vector<double> epsilon_grid(const EpsilonGridConfig& cfg) {
    std::vector<double> eps;
    eps.reserve(static_cast<std::size_t>(cfg.count));
    if (cfg.count == 1) {
        eps.push_back(cfg.start);
        return eps;
    }
    const double step = (cfg.stop - cfg.start) / static_cast<double>(cfg.count - 1);
    for (int i = 0; i < cfg.count; ++i) eps.push_back(cfg.start + step * static_cast<double>(i));
    return eps;
}

} // namespace

EstimateOutcome run_estimate(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    const BuiltSystem system = build_system(cfg.system);
    const BuiltSystem spec = build_system(cfg.spec);
    const TimeGrid grid = TimeGrid::make(cfg.grid.t_final, cfg.grid.dt);
    const DistanceConfig dist{cfg.distance.transient_cutoff, Quadrature::Trapezoidal};
    const OptimizerConfig inner = inner_optimizer_config(cfg);

    InputEnsembleSpec ensemble{cfg.inputs.n_modes, cfg.inputs.amplitude_sigma, cfg.inputs.seed};
    const std::vector<FourierSignal> sample = sample_inputs(ensemble, cfg.inputs.n_samples);
    const Vec p_init = random_initial_log_params(system.family.param_dim, cfg.init.p_seed);

    const auto t0 = std::chrono::steady_clock::now();
    const EstimateResult est = estimate_d_rho(system.family, p_init, spec.family, sample, grid,
                                              std::nullopt, inner, dist, cfg.workers);

    json report;
    report["schema"] = 1;
    report["command"] = "estimate";
    report["config"] = config_echo(cfg);
    report["prng"] = kPrngDoc;
    report["system_meta"] = system_meta_json(system);
    report["spec_meta"] = system_meta_json(spec);
    report["seeds"] = {{"p_init", cfg.init.p_seed}, {"sample", cfg.inputs.seed}};
    report["d_rho"] = std::isfinite(est.value) ? json(est.value) : json();
    report["n_failed_fits"] = est.n_failed;
    std::vector<double> p_log(p_init.data(), p_init.data() + p_init.size());
    report["p_log"] = p_log;
    report["per_sample"] = fits_json(est.fits);
    report["wall_time_s"] = seconds_since(t0);

    EstimateOutcome outcome;
    outcome.d_rho = est.value;
    outcome.n_failed = est.n_failed;
    outcome.fits = est.fits;
    outcome.report_path = cfg.output_dir + "/report.json";
    write_report_file(outcome.report_path, report);
    write_per_sample_csv(cfg.output_dir + "/per_sample.csv", est.fits);
    write_first_trajectories(cfg, system.family, p_init, spec.family, sample, est.fits, grid);
    return outcome;
}

TuneOutcome run_tune(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    const BuiltSystem system = build_system(cfg.system);
    const BuiltSystem spec = build_system(cfg.spec);
    const TimeGrid grid = TimeGrid::make(cfg.grid.t_final, cfg.grid.dt);
    const DistanceConfig dist{cfg.distance.transient_cutoff, Quadrature::Trapezoidal};
    const OptimizerConfig inner = inner_optimizer_config(cfg);

    Vec p = random_initial_log_params(system.family.param_dim, cfg.init.p_seed);

    TuneOutcome outcome;
    std::vector<LossHistoryRow> loss_rows;
    std::vector<int> sample_sizes;
    json phase_seeds = json::array();
    std::vector<InnerFitResult> final_fits;
    double final_in_sample = std::numeric_limits<double>::quiet_NaN();
    double final_resampled = std::numeric_limits<double>::quiet_NaN();
    std::vector<FourierSignal> last_sample;

    for (std::size_t phase_idx = 0; phase_idx < cfg.phases.size(); ++phase_idx) {
        const PhaseConfig& phase = cfg.phases[phase_idx];
        const std::uint64_t sample_seed =
            phase_idx == 0 ? cfg.inputs.seed : mix_seed(cfg.inputs.seed, 1000 + phase_idx);
        const std::uint64_t resample_seed = mix_seed(cfg.inputs.seed, 2000 + phase_idx);
        phase_seeds.push_back({{"sample", sample_seed}, {"resample", resample_seed}});

        InputEnsembleSpec ensemble{cfg.inputs.n_modes, cfg.inputs.amplitude_sigma, sample_seed};
        const std::vector<FourierSignal> sample = sample_inputs(ensemble, phase.n_samples);
        sample_sizes.push_back(phase.n_samples);

        // Expand the schedule for this phase into a flat stage list.
        std::vector<ScheduleStage> stages;
        const std::string phase_tag = "phase " + std::to_string(phase_idx + 1);
        for (int rep = 0; rep < phase.schedule_repetitions; ++rep) {
            bool first_in_phase = rep == 0;
            for (const ScheduleEntryConfig& entry : cfg.schedule) {
                for (int r = 0; r < entry.repetitions; ++r) {
                    ScheduleStage stage;
                    stage.opt = stage_optimizer_config(entry);
                    std::string label = phase_tag;
                    if (phase.schedule_repetitions > 1)
                        label += " rep " + std::to_string(rep + 1) + "/" +
                                 std::to_string(phase.schedule_repetitions);
                    label += ": " + entry.optimizer +
                             " iters=" + std::to_string(entry.iterations);
                    if (entry.repetitions > 1)
                        label += " (" + std::to_string(r + 1) + "/" +
                                 std::to_string(entry.repetitions) + ")";
                    stage.label = label;
                    stage.reset_moments = cfg.reset_moments_per_stage || (first_in_phase && r == 0);
                    first_in_phase = false;
                    stages.push_back(stage);
                }
            }
        }

        TuningReport phase_report = tune(system.family, spec.family, p, sample, stages, grid,
                                         inner, dist, cfg.workers);
        p = phase_report.p_tuned;
        if (phase_idx == 0 && !phase_report.steps.empty())
            outcome.baseline_d_rho = phase_report.steps.front().loss_after;

        for (TuningStepRecord step : phase_report.steps) {
            step.label = phase_tag + ": " + step.label;
            outcome.steps.push_back(step);
        }
        for (const auto& [stage_label, history] : phase_report.loss_histories)
            for (std::size_t it = 0; it < history.size(); ++it)
                loss_rows.push_back({stage_label, static_cast<int>(it), history[it]});

        const auto t0 = std::chrono::steady_clock::now();
        InputEnsembleSpec resample_ensemble{cfg.inputs.n_modes, cfg.inputs.amplitude_sigma,
                                            resample_seed};
        const EstimateResult validation =
            resample_and_validate(system.family, p, spec.family, resample_ensemble,
                                  phase.n_samples, grid, inner, dist, cfg.workers);
        outcome.steps.push_back({phase_tag + ": resample n=" + std::to_string(phase.n_samples),
                                 "bfgs-inner", std::numeric_limits<double>::quiet_NaN(),
                                 validation.value, seconds_since(t0)});

        final_in_sample = phase_report.final_in_sample;
        final_resampled = validation.value;
        final_fits = validation.fits;
        last_sample = sample_inputs(resample_ensemble, phase.n_samples);
    }

    outcome.final_in_sample = final_in_sample;
    outcome.final_resampled = final_resampled;
    outcome.p_tuned = p;
    outcome.final_fits = final_fits;
    outcome.report_path = cfg.output_dir + "/report.json";

    json report;
    report["schema"] = 1;
    report["command"] = "tune";
    report["config"] = config_echo(cfg);
    report["prng"] = kPrngDoc;
    report["system_meta"] = system_meta_json(system);
    report["spec_meta"] = system_meta_json(spec);
    report["seeds"] = {{"p_init", cfg.init.p_seed}, {"phases", phase_seeds}};
    report["reset_moments_per_stage"] = cfg.reset_moments_per_stage;
    report["baseline_d_rho"] = outcome.baseline_d_rho;
    report["steps"] = steps_json(outcome.steps);
    std::vector<double> p_log(p.data(), p.data() + p.size());
    std::vector<double> p_nat;
    p_nat.reserve(p_log.size());
    for (double v : p_log) p_nat.push_back(std::exp(v));
    report["p_tuned_log"] = p_log;
    report["p_tuned"] = p_nat;
    report["final_in_sample"] = std::isfinite(final_in_sample) ? json(final_in_sample) : json();
    report["final_resampled"] = std::isfinite(final_resampled) ? json(final_resampled) : json();
    report["sample_sizes"] = sample_sizes;
    report["per_sample"] = fits_json(final_fits);

    write_report_file(outcome.report_path, report);
    write_per_sample_csv(cfg.output_dir + "/per_sample.csv", final_fits);
    write_loss_history_csv(cfg.output_dir + "/loss_history.csv", loss_rows);
    write_first_trajectories(cfg, system.family, p, spec.family, last_sample, final_fits, grid);
    return outcome;
}

std::vector<EpsilonCurvePoint> run_curve(const ExperimentConfig& cfg,
                                         const std::string& fits_or_report_path) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ifstream in(fits_or_report_path);
    if (!in) throw MissingDataError("cannot open " + fits_or_report_path);

    std::vector<InnerFitResult> fits;
    if (fits_or_report_path.size() >= 4 &&
        fits_or_report_path.substr(fits_or_report_path.size() - 4) == ".csv") {
        std::string line;
        bool header_seen = false;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!header_seen) { // header row
                header_seen = true;
                continue;
            }
            std::stringstream ss(line);
            std::string cell;
            InnerFitResult fit;
            if (!std::getline(ss, cell, ',')) continue; // sample_index
            if (!std::getline(ss, cell, ',')) continue; // distance
            fit.distance = std::stod(cell);
            fits.push_back(fit);
        }
    } else {
        std::stringstream buffer;
        buffer << in.rdbuf();
        json report = json::parse(buffer.str(), nullptr, false);
        if (report.is_discarded()) throw MissingDataError("report is not valid JSON");
        if (!report.contains("per_sample") || !report["per_sample"].is_array() ||
            report["per_sample"].empty())
            throw MissingDataError("report lacks per-sample distances");
        for (const json& entry : report["per_sample"]) {
            InnerFitResult fit;
            fit.distance = entry.contains("distance") && entry["distance"].is_number()
                               ? entry["distance"].get<double>()
                               : std::numeric_limits<double>::infinity();
            fits.push_back(fit);
        }
    }
    if (fits.empty()) throw MissingDataError("no per-sample distances found");

    const std::vector<EpsilonCurvePoint> curve = epsilon_curve(fits, epsilon_grid(cfg.epsilons));
    write_curve_csv(cfg.output_dir + "/curve.csv", curve);
    return curve;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& s_values) {
    if (s_values.empty()) throw ConfigError("sweep: need at least one s value");
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<SweepRow> rows;
    for (double s : s_values) {
        SweepRow row;
        row.s = s;
        ExperimentConfig sub = cfg;
        sub.system.spread = s;
        sub.phases = {{cfg.inputs.n_samples, 1}};
        char tag[32];
        std::snprintf(tag, sizeof(tag), "%g", s);
        sub.output_dir = cfg.output_dir + "/sweep_s" + tag;
        {
            // Refresh the echo so the sub-run's report shows its own spread.
            json echo = json::parse(sub.echo_json.empty() ? std::string("{}") : sub.echo_json);
            echo["system"]["spread"] = s;
            echo["output_dir"] = sub.output_dir;
            echo["phases"] = json::array();
            for (const PhaseConfig& p : sub.phases)
                echo["phases"].push_back(
                    {{"n_samples", p.n_samples}, {"schedule_repetitions", p.schedule_repetitions}});
            sub.echo_json = echo.dump();
        }
        try {
            const TuneOutcome outcome = run_tune(sub);
            row.d_rho_tuned = outcome.final_resampled;
            row.ok = std::isfinite(outcome.final_resampled);
            if (!row.ok) row.status = "non-finite estimate";
        } catch (const std::exception& e) {
            row.ok = false;
            row.status = e.what();
            for (char& c : row.status)
                if (c == ',' || c == '\n') c = ';';
        }
        rows.push_back(row);
    }
    write_sweep_csv(cfg.output_dir + "/sweep.csv", rows);
    return rows;
}

} // namespace spectune

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectune/models.hpp"
#include "spectune/reporting.hpp"
#include "spectune/tuning.hpp"

namespace spectune {

// ---------------------------------------------------------------------------
// Experiment configuration (single JSON document; CLI flags override keys
// through dotted paths, e.g. --inputs.seed=7). Every seed is explicit and the
// effective config is echoed verbatim into each report.
// ---------------------------------------------------------------------------

struct SystemConfig {
    std::string kind = "diffusive"; // diffusive | kuramoto | scalar-linear
    int n = 10;
    std::uint64_t graph_seed = 1;
    int m = 2;                       // preferential-attachment edges per node
    double coupling = 1.0;           // kuramoto K
    double spread = 1.0;             // kuramoto s
    std::uint64_t omega_seed = 3;
    bool couple_interior_only = false;
    double scalar_a = 1.0;
};

struct GridConfig {
    double t_final = 10.0;
    double dt = 0.01;
};

struct InputsConfig {
    int n_modes = 10;
    double amplitude_sigma = 0.30151134457776363;
    std::uint64_t seed = 12345;
    int n_samples = 10;
};

struct DistanceSection {
    double transient_cutoff = 0.0;
};

struct InnerConfig {
    int iterations = 60;
    double grad_tolerance = 1e-10;
};

struct InitConfig {
    std::uint64_t p_seed = 7;
};

struct ScheduleEntryConfig {
    std::string optimizer = "adam";
    double learning_rate = 0.01;
    int iterations = 50;
    int repetitions = 1; // consecutive repeats of this entry
};

/// A phase draws (or redraws) the input sample, estimates, runs the whole
/// schedule `schedule_repetitions` times, re-estimates, then validates on a
/// fresh sample of the same size.
struct PhaseConfig {
    int n_samples = 10;
    int schedule_repetitions = 1;
};

struct EpsilonGridConfig {
    double start = 0.0;
    double stop = 1.0;
    int count = 101;
};

struct ExperimentConfig {
    SystemConfig system;
    SystemConfig spec;
    GridConfig grid;
    InputsConfig inputs;
    DistanceSection distance;
    InnerConfig inner;
    InitConfig init;
    std::vector<ScheduleEntryConfig> schedule;
    std::vector<PhaseConfig> phases;
    EpsilonGridConfig epsilons;
    std::string output_dir = "out";
    int workers = 1;
    bool reset_moments_per_stage = true;

    std::string echo_json; // canonical serialization of the effective config
};

/// Parses and validates a config document. Throws ConfigError with a
/// key-path message on any problem.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Applies "key.path=value" overrides onto a JSON document and returns the
/// updated text. Values parse as JSON when possible, else as strings.
std::string apply_config_overrides(const std::string& json_text,
                                   const std::vector<std::string>& overrides);

std::string default_diffusive_config_json();
std::string default_kuramoto_config_json();

/// System/spec construction from config, plus the metadata that makes runs
/// replayable (graph edges, intrinsic frequencies).
struct BuiltSystem {
    SystemFamily family;
    AdjacencyMatrix graph;        // diffusive kinds
    std::vector<double> omegas;   // kuramoto kinds, after spread scaling
    std::string kind;
};
BuiltSystem build_system(const SystemConfig& cfg);

// ---------------------------------------------------------------------------
// Commands. Each writes its files under cfg.output_dir and returns the key
// numbers for callers (tests, the CLI, the sweep driver).
// Errors: ConfigError -> exit 2, NonFiniteStateError -> exit 3,
// MissingDataError -> exit 4 (mapping done by the CLI).
// ---------------------------------------------------------------------------

struct EstimateOutcome {
    double d_rho = 0.0;
    int n_failed = 0;
    std::vector<InnerFitResult> fits;
    std::string report_path;
};

/// Builds system/spec/sample, estimates d_rho, writes report.json,
/// per_sample.csv and output trajectories for the first three samples.
EstimateOutcome run_estimate(const ExperimentConfig& cfg);

struct TuneOutcome {
    double baseline_d_rho = 0.0;    // first estimate of phase 0
    double final_in_sample = 0.0;
    double final_resampled = 0.0;
    Vec p_tuned;                    // log-encoded
    std::vector<TuningStepRecord> steps;
    std::vector<InnerFitResult> final_fits; // fits of the last resampling validation
    std::string report_path;
};

/// Executes the phase pipeline (estimate -> schedule stages -> re-estimate ->
/// resample, per phase), writing intermediate values after every row plus
/// report.json, per_sample.csv, loss_history.csv and final trajectories.
TuneOutcome run_tune(const ExperimentConfig& cfg);

/// Reads per-sample distances from a report.json or per_sample.csv and
/// writes curve.csv over the configured epsilon grid.
std::vector<EpsilonCurvePoint> run_curve(const ExperimentConfig& cfg,
                                         const std::string& fits_or_report_path);

/// Runs the four-step schedule per spread value, writing sweep.csv. Failures
/// for individual s values keep their row with a reason instead of aborting.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& s_values);

} // namespace spectune

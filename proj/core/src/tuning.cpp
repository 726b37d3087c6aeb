#include "spectune/tuning.hpp"

#include <chrono>
#include <cmath>

#include "spectune/errors.hpp"
#include "spectune/rng.hpp"

namespace spectune {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start).count();
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

} // namespace

TuningReport tune(const SystemFamily& system, const SystemFamily& spec,
                  const Vec& initial_p, const std::vector<FourierSignal>& sample,
                  const std::vector<ScheduleStage>& schedule, const TimeGrid& grid,
                  const OptimizerConfig& inner_cfg, const DistanceConfig& cfg,
                  int workers) {
    TuningReport report;
    report.sample_sizes = {static_cast<int>(sample.size())};

    auto t0 = std::chrono::steady_clock::now();
    const EstimateResult baseline =
        estimate_d_rho(system, initial_p, spec, sample, grid, std::nullopt, inner_cfg, cfg, workers);
    report.steps.push_back({"estimate (cold fits)", "bfgs-inner", kNan, baseline.value,
                            seconds_since(t0)});

    JointParams jp;
    jp.p = initial_p;
    jp.qs.reserve(baseline.fits.size());
    for (const InnerFitResult& fit : baseline.fits) jp.qs.push_back(fit.q);

    if (schedule.empty()) { // nothing tuned: the report is the baseline estimate
        report.p_tuned = jp.p;
        report.final_in_sample = baseline.value;
        report.final_fits = baseline.fits;
        report.joint = jp;
        report.n_failed_fits = baseline.n_failed;
        return report;
    }

    const GradientMode mode =
        schedule.empty() ? GradientMode::ForwardSensitivity : schedule.front().opt.gradient_mode;
    const Objective objective =
        make_joint_objective(system, spec, sample, grid, cfg, mode, workers);

    MomentState moments;
    for (const ScheduleStage& stage : schedule) {
        if (stage.reset_moments) moments = MomentState{};
        t0 = std::chrono::steady_clock::now();
        const OptimizerResult res =
            run_optimizer(objective, jp.flatten(), stage.opt, &moments);
        jp = JointParams::unflatten(res.params, system.param_dim, spec.param_dim,
                                    static_cast<int>(sample.size()));
        report.steps.push_back({stage.label, to_string(stage.opt.kind),
                                res.history.empty() ? kNan : res.history.front(), res.best_loss,
                                seconds_since(t0)});
        report.loss_histories.emplace_back(stage.label, res.history);
    }

    t0 = std::chrono::steady_clock::now();
    const EstimateResult refit = estimate_d_rho(system, jp.p, spec, sample, grid,
                                                std::optional<std::vector<Vec>>(jp.qs), inner_cfg,
                                                cfg, workers);
    report.steps.push_back({"estimate (warm fits)", "bfgs-inner", kNan, refit.value,
                            seconds_since(t0)});

    report.p_tuned = jp.p;
    report.final_in_sample = refit.value;
    report.final_fits = refit.fits;
    report.joint = jp;
    report.n_failed_fits = refit.n_failed;
    return report;
}

EstimateResult resample_and_validate(const SystemFamily& system, const Vec& p_tuned,
                                     const SystemFamily& spec, const InputEnsembleSpec& ensemble,
                                     int n, const TimeGrid& grid,
                                     const OptimizerConfig& inner_cfg, const DistanceConfig& cfg,
                                     int workers) {
    if (n < 1) throw ConfigError("resample_and_validate: n must be >= 1");
    const std::vector<FourierSignal> fresh = sample_inputs(ensemble, n);
    return estimate_d_rho(system, p_tuned, spec, fresh, grid, std::nullopt, inner_cfg, cfg,
                          workers);
}

Vec random_initial_log_params(int dim, std::uint64_t seed) {
    Rng rng(seed);
    Vec theta(dim);
    const double lo = std::log(0.1);
    const double hi = std::log(10.0);
    for (int j = 0; j < dim; ++j) theta(j) = rng.uniform(lo, hi);
    return theta;
}

} // namespace spectune

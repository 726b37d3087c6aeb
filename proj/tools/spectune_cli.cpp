// spectune: measures probabilistic behavioral distances between a
// parametrized IO-ODE system and a simpler specification and tunes the
// system's parameters toward it.
//
// Subcommands: estimate, tune, curve, sweep-spread, demo {diffusive|kuramoto}.
// Any --key.path=value argument overrides the matching config key.
//
// Exit codes: 0 ok, 2 config error, 3 integration failure, 4 missing
// prerequisite data.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectune/errors.hpp"
#include "spectune/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spectune::ConfigError("cannot read config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Remaining CLI tokens of the form --a.b.c=value (or --a.b.c value) become
/// config overrides "a.b.c=value".
std::vector<std::string> collect_overrides(const std::vector<std::string>& extras) {
    std::vector<std::string> overrides;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string token = extras[i];
        if (token.rfind("--", 0) != 0)
            throw spectune::ConfigError("unrecognized argument: " + token);
        token = token.substr(2);
        if (token.find('=') == std::string::npos) {
            if (i + 1 >= extras.size())
                throw spectune::ConfigError("override --" + token + " needs a value");
            token += "=" + extras[++i];
        }
        overrides.push_back(token);
    }
    return overrides;
}

struct CommonArgs {
    std::string config_path;
    int workers = 0;          // 0: keep config value
    std::string output_dir;   // empty: keep config value
};

spectune::ExperimentConfig load_config(const std::string& base_json, const CommonArgs& args,
                                       const std::vector<std::string>& extras) {
    std::string text = base_json;
    if (!args.config_path.empty()) text = read_file(args.config_path);
    std::vector<std::string> overrides = collect_overrides(extras);
    if (args.workers > 0) overrides.push_back("workers=" + std::to_string(args.workers));
    if (!args.output_dir.empty()) overrides.push_back("output_dir=" + args.output_dir);
    text = spectune::apply_config_overrides(text, overrides);
    return spectune::parse_experiment_config(text);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Path to the JSON experiment config");
    cmd->add_option("--workers", args.workers, "Worker threads (1 = bit-exact reproduction)");
    cmd->add_option("--output-dir", args.output_dir, "Directory for reports and CSV files");
    cmd->allow_extras();
}

std::vector<double> parse_s_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        values.push_back(std::stod(cell));
    }
    return values;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic behavioral distance estimation and tuning"};
    app.require_subcommand(1);

    CommonArgs est_args, tune_args, curve_args, sweep_args, demo_args;
    std::string curve_source;
    std::string sweep_values = "1.0,1.5,2.0,2.5,3.0,3.5,4.0,4.5,5.0";
    std::string demo_name;

    CLI::App* cmd_estimate = app.add_subcommand("estimate", "Estimate d_rho on a fresh sample");
    add_common(cmd_estimate, est_args);

    CLI::App* cmd_tune = app.add_subcommand("tune", "Run the full tuning pipeline");
    add_common(cmd_tune, tune_args);

    CLI::App* cmd_curve =
        app.add_subcommand("curve", "Write the epsilon-exceedance curve from a prior report");
    cmd_curve->add_option("report", curve_source, "report.json or per_sample.csv with distances")
        ->required();
    add_common(cmd_curve, curve_args);

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep-spread", "Tune at several frequency spreads s");
    cmd_sweep->add_option("--s-values", sweep_values, "Comma-separated spread values");
    add_common(cmd_sweep, sweep_args);

    CLI::App* cmd_demo = app.add_subcommand("demo", "Run a built-in demo configuration");
    cmd_demo->add_option("name", demo_name, "diffusive or kuramoto")->required();
    add_common(cmd_demo, demo_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_estimate->parsed()) {
            if (est_args.config_path.empty())
                throw spectune::ConfigError("estimate requires --config");
            const auto cfg = load_config("", est_args, cmd_estimate->remaining());
            const auto outcome = spectune::run_estimate(cfg);
            std::cout << "d_rho = " << outcome.d_rho << "  (failed fits: " << outcome.n_failed
                      << ")\nreport: " << outcome.report_path << "\n";
            if (!std::isfinite(outcome.d_rho)) return 3;
        } else if (cmd_tune->parsed()) {
            if (tune_args.config_path.empty())
                throw spectune::ConfigError("tune requires --config");
            const auto cfg = load_config("", tune_args, cmd_tune->remaining());
            const auto outcome = spectune::run_tune(cfg);
            std::cout << "baseline d_rho   = " << outcome.baseline_d_rho << "\n"
                      << "final in-sample  = " << outcome.final_in_sample << "\n"
                      << "final resampled  = " << outcome.final_resampled << "\n"
                      << "report: " << outcome.report_path << "\n";
            if (!std::isfinite(outcome.final_resampled)) return 3;
        } else if (cmd_curve->parsed()) {
            const std::string base = curve_args.config_path.empty()
                                         ? spectune::default_diffusive_config_json()
                                         : "";
            const auto cfg = load_config(base, curve_args, cmd_curve->remaining());
            const auto curve = spectune::run_curve(cfg, curve_source);
            std::cout << "curve points: " << curve.size() << "\nwrote " << cfg.output_dir
                      << "/curve.csv\n";
        } else if (cmd_sweep->parsed()) {
            const std::string base = sweep_args.config_path.empty()
                                         ? spectune::default_kuramoto_config_json()
                                         : "";
            const auto cfg = load_config(base, sweep_args, cmd_sweep->remaining());
            const auto rows = spectune::run_sweep(cfg, parse_s_values(sweep_values));
            for (const auto& row : rows)
                std::cout << "s=" << row.s << "  d_rho="
                          << (row.ok ? std::to_string(row.d_rho_tuned) : row.status) << "\n";
            std::cout << "wrote " << cfg.output_dir << "/sweep.csv\n";
        } else if (cmd_demo->parsed()) {
            std::string base;
            if (demo_name == "diffusive") base = spectune::default_diffusive_config_json();
            else if (demo_name == "kuramoto") base = spectune::default_kuramoto_config_json();
            else throw spectune::ConfigError("demo name must be diffusive or kuramoto");
            if (!demo_args.config_path.empty()) base = "";
            const auto cfg = load_config(base, demo_args, cmd_demo->remaining());
            const auto outcome = spectune::run_tune(cfg);
            std::cout << "baseline d_rho   = " << outcome.baseline_d_rho << "\n"
                      << "final in-sample  = " << outcome.final_in_sample << "\n"
                      << "final resampled  = " << outcome.final_resampled << "\n";
            spectune::run_curve(cfg, outcome.report_path);
            std::cout << "report: " << outcome.report_path << "\ncurve:  " << cfg.output_dir
                      << "/curve.csv\n";
            if (!std::isfinite(outcome.final_resampled)) return 3;
        }
    } catch (const spectune::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const spectune::NonFiniteStateError& e) {
        std::cerr << "integration failure: " << e.what() << "\n";
        return 3;
    } catch (const spectune::MissingDataError& e) {
        std::cerr << "missing data: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

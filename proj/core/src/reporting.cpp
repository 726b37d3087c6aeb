#include "spectune/reporting.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "spectune/errors.hpp"

namespace spectune {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_per_sample_csv(const std::string& path, const std::vector<InnerFitResult>& fits) {
    std::ofstream out = open_out(path);
    out << "# schema=1\n";
    const int q_dim = fits.empty() ? 0 : static_cast<int>(fits.front().q.size());
    out << "sample_index,distance,converged";
    for (int j = 0; j < q_dim; ++j) out << ",q" << j;
    out << "\n";
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const InnerFitResult& fit = fits[i];
        out << i << "," << format_double(fit.distance) << "," << (fit.converged ? 1 : 0);
        for (int j = 0; j < q_dim; ++j) out << "," << format_double(std::exp(fit.q(j)));
        out << "\n";
    }
}

void write_trajectories_csv(const std::string& path, const Trajectory& o_system,
                            const Trajectory& o_spec) {
    if (!o_system.grid.same_as(o_spec.grid)) throw GridMismatchError();
    std::ofstream out = open_out(path);
    out << "# schema=1\n";
    out << "t,o_system,o_spec\n";
    for (int k = 0; k < o_system.grid.n_points; ++k) {
        out << format_double(o_system.grid.time(k)) << "," << format_double(o_system.values(0, k))
            << "," << format_double(o_spec.values(0, k)) << "\n";
    }
}

void write_curve_csv(const std::string& path, const std::vector<EpsilonCurvePoint>& curve) {
    std::ofstream out = open_out(path);
    out << "# schema=1\n";
    out << "epsilon,fraction,ci_center,ci_halfwidth\n";
    for (const EpsilonCurvePoint& p : curve) {
        out << format_double(p.epsilon) << "," << format_double(p.fraction) << ","
            << format_double(p.ci_center) << "," << format_double(p.ci_halfwidth) << "\n";
    }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out = open_out(path);
    out << "# schema=1\n";
    out << "s,d_rho_tuned,status\n";
    for (const SweepRow& row : rows) {
        out << format_double(row.s) << ",";
        if (row.ok) out << format_double(row.d_rho_tuned);
        out << "," << row.status << "\n";
    }
}

void write_loss_history_csv(const std::string& path, const std::vector<LossHistoryRow>& rows) {
    std::ofstream out = open_out(path);
    out << "# schema=1\n";
    out << "stage,iteration,loss\n";
    for (const LossHistoryRow& row : rows)
        out << row.stage << "," << row.iteration << "," << format_double(row.loss) << "\n";
}

} // namespace spectune

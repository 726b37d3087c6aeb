#include "spectune/models.hpp"

#include <cmath>
#include <memory>
#include <queue>

#include "spectune/errors.hpp"
#include "spectune/rng.hpp"

namespace spectune {

namespace {

/// exp(theta), memoized per thread. The integrator calls rhs and the two
/// Jacobians separately at every RK4 stage while theta stays fixed for the
/// whole trajectory, so this hits almost always.
const Vec& exp_cached(const Vec& theta) {
    thread_local Vec key;
    thread_local Vec value;
    if (key.size() != theta.size() || !(key.array() == theta.array()).all()) {
        key = theta;
        value = theta.array().exp();
    }
    return value;
}

} // namespace

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

AdjacencyMatrix AdjacencyMatrix::empty(int n) {
    if (n < 1) throw ConfigError("AdjacencyMatrix: n must be >= 1");
    AdjacencyMatrix a;
    a.n = n;
    a.entries = Eigen::MatrixXi::Zero(n, n);
    return a;
}

void AdjacencyMatrix::add_edge(int a, int b) {
    if (a == b || a < 0 || b < 0 || a >= n || b >= n)
        throw ConfigError("AdjacencyMatrix: invalid edge");
    entries(a, b) = 1;
    entries(b, a) = 1;
}

int AdjacencyMatrix::degree(int node) const { return entries.row(node).sum(); }

int AdjacencyMatrix::edge_count() const { return entries.sum() / 2; }

bool AdjacencyMatrix::connected() const {
    if (n == 1) return true;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int reached = 1;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int u = 0; u < n; ++u) {
            if (entries(v, u) != 0 && !seen[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = true;
                ++reached;
                frontier.push(u);
            }
        }
    }
    return reached == n;
}

std::vector<std::pair<int, int>> AdjacencyMatrix::edges() const {
    std::vector<std::pair<int, int>> list;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (entries(a, b) != 0) list.emplace_back(a, b);
    return list;
}

AdjacencyMatrix complete_graph(int n) {
    AdjacencyMatrix a = AdjacencyMatrix::empty(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a.add_edge(i, j);
    return a;
}

AdjacencyMatrix barabasi_albert(int n, int m, std::uint64_t seed) {
    if (m < 1 || m >= n) throw ConfigError("barabasi_albert: need 1 <= m < n");
    AdjacencyMatrix a = AdjacencyMatrix::empty(n);

    // Seed clique of m+1 nodes; the urn holds one entry per degree unit.
    std::vector<int> urn;
    for (int i = 0; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j) {
            a.add_edge(i, j);
            urn.push_back(i);
            urn.push_back(j);
        }

    Rng rng(seed);
    std::vector<int> targets;
    for (int v = m + 1; v < n; ++v) {
        targets.clear();
        while (static_cast<int>(targets.size()) < m) {
            const int pick = urn[static_cast<std::size_t>(rng.below(urn.size()))];
            bool duplicate = false;
            for (int t : targets) duplicate = duplicate || (t == pick);
            if (!duplicate) targets.push_back(pick);
        }
        for (int t : targets) {
            a.add_edge(v, t);
            urn.push_back(v);
            urn.push_back(t);
        }
    }
    if (!a.connected()) throw std::logic_error("barabasi_albert: generated graph not connected");
    return a;
}

// ---------------------------------------------------------------------------
// Diffusive network
// ---------------------------------------------------------------------------

namespace {

struct DiffusiveData {
    int n = 0;
    std::vector<std::vector<int>> neighbors;
    Mat linear; // constant part of df/dx: -I + degree/adjacency terms + input coupling
};

} // namespace

SystemFamily make_diffusive(const AdjacencyMatrix& adjacency) {
    const int n = adjacency.n;
    auto data = std::make_shared<DiffusiveData>();
    data->n = n;
    data->neighbors.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (adjacency.entries(a, b) != 0) data->neighbors[static_cast<std::size_t>(a)].push_back(b);

    data->linear = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        data->linear(a, a) = -1.0 + static_cast<double>(adjacency.degree(a));
        for (int b : data->neighbors[static_cast<std::size_t>(a)]) data->linear(a, b) = -1.0;
    }
    data->linear(0, 0) += 1.0; // node 1 carries the (x_1 - i) input coupling

    SystemFamily family;
    family.state_dim = n;
    family.param_dim = n;
    family.param_domain = ParamDomain::all_positive(n);

    family.rhs = [data](const Vec& x, double input, const Vec& theta, double, Vec& dxdt) {
        const Vec& p = exp_cached(theta);
        dxdt.noalias() = data->linear * x;
        dxdt.array() -= p.array() * x.array().cube();
        dxdt(0) -= input;
    };
    family.output = [](const Vec& x, double input, const Vec&) { return input - x(0); };
    family.initial_state = [n](const Vec&) { return Vec::Zero(n); };

    family.rhs_jac_state = [data](const Vec& x, double, const Vec& theta, double, Mat& jac) {
        const Vec& p = exp_cached(theta);
        jac = data->linear;
        jac.diagonal().array() -= 3.0 * p.array() * x.array().square();
    };
    family.rhs_jac_params = [n](const Vec& x, double, const Vec& theta, double, Mat& jac) {
        const Vec& p = exp_cached(theta);
        jac.setZero();
        jac.diagonal().array() = -p.array() * x.array().cube();
    };
    family.output_grad_state = [n](const Vec&, double, const Vec&, Vec& grad) {
        grad.setZero();
        grad(0) = -1.0;
    };
    family.output_grad_params = [](const Vec&, double, const Vec&, Vec& grad) { grad.setZero(); };
    family.initial_state_jac = [n](const Vec&) { return Mat::Zero(n, n); };
    return family;
}

// ---------------------------------------------------------------------------
// Kuramoto oscillators with inertia
// ---------------------------------------------------------------------------

int kuramoto_pair_index(int n, int a, int b) {
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= n || a == b) throw ConfigError("kuramoto_pair_index: invalid pair");
    return a * n - a * (a + 1) / 2 + (b - a - 1);
}

std::vector<double> draw_intrinsic_frequencies(int n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("draw_intrinsic_frequencies: n must be >= 1");
    std::vector<double> omega(static_cast<std::size_t>(n), 0.0);
    if (n == 1) return omega;

    Rng rng(seed);
    std::vector<double> draws(static_cast<std::size_t>(n - 1));
    double sum = 0.0;
    for (double& g : draws) {
        g = rng.normal();
        sum += g;
    }
    const double shift = sum / static_cast<double>(n - 1);
    // Recenter nodes 1..n-1; the last node absorbs the rounding residual so
    // the total is exactly zero in floating point.
    double partial = 0.0;
    for (int j = 1; j < n - 1; ++j) {
        omega[static_cast<std::size_t>(j)] = draws[static_cast<std::size_t>(j - 1)] - shift;
        partial += omega[static_cast<std::size_t>(j)];
    }
    omega[static_cast<std::size_t>(n - 1)] = -partial;
    return omega;
}

namespace {

struct KuramotoData {
    int n = 0;
    Vec omega_scaled;
    double coupling = 1.0;
    // One entry per unordered pair (lexicographic): the parameter index of a
    // tunable coupling, or -1 when the literal index-bound reading fixes it at 1.
    std::vector<int> pair_param;
    std::vector<std::pair<int, int>> pairs;
    int param_dim = 0;
};

} // namespace

SystemFamily make_kuramoto(const KuramotoConfig& cfg) {
    const int n = cfg.n;
    if (n < 1) throw ConfigError("make_kuramoto: n must be >= 1");
    if (static_cast<int>(cfg.omegas.size()) != n)
        throw ConfigError("make_kuramoto: omegas must have one entry per node");
    if (cfg.omegas[0] != 0.0) throw ConfigError("make_kuramoto: omegas[0] must be 0");

    auto data = std::make_shared<KuramotoData>();
    data->n = n;
    data->coupling = cfg.coupling;

    // Scale by the spread and re-normalize so the scaled mean is exactly zero.
    data->omega_scaled = Vec::Zero(n);
    if (n > 1) {
        double partial = 0.0;
        for (int j = 1; j < n - 1; ++j) {
            data->omega_scaled(j) = cfg.spread * cfg.omegas[static_cast<std::size_t>(j)];
            partial += data->omega_scaled(j);
        }
        data->omega_scaled(n - 1) = -partial;
    }

    int next_param = n; // dampings occupy parameters 0..n-1
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            data->pairs.emplace_back(a, b);
            const bool interior = (a >= 1 && a <= n - 2 && b >= 1 && b <= n - 2);
            const bool tunable = !cfg.couple_interior_only || interior;
            data->pair_param.push_back(tunable ? next_param++ : -1);
        }
    }
    data->param_dim = next_param;

    SystemFamily family;
    family.state_dim = 2 * n;
    family.param_dim = data->param_dim;
    family.param_domain = ParamDomain::all_positive(data->param_dim);

    auto pair_coupling = [](const KuramotoData& d, const Vec& p, std::size_t pair_idx) {
        const int idx = d.pair_param[pair_idx];
        return idx >= 0 ? p(idx) : 1.0;
    };

    family.rhs = [data, pair_coupling](const Vec& x, double input, const Vec& theta, double,
                                       Vec& dxdt) {
        const int n = data->n;
        const Vec& p = exp_cached(theta);
        const auto phi = x.head(n);
        const auto psi = x.tail(n);
        dxdt.head(n) = psi;
        auto accel = dxdt.tail(n);
        accel = data->omega_scaled - p.head(n).cwiseProduct(psi);
        accel(0) += input;
        for (std::size_t e = 0; e < data->pairs.size(); ++e) {
            const auto [a, b] = data->pairs[e];
            const double k = data->coupling * pair_coupling(*data, p, e);
            const double s = std::sin(phi(a) - phi(b));
            accel(a) -= k * s;
            accel(b) += k * s;
        }
    };
    family.output = [](const Vec& x, double input, const Vec&) { return input - x(0); };
    family.initial_state = [n](const Vec&) { return Vec::Zero(2 * n); };

    family.rhs_jac_state = [data, pair_coupling](const Vec& x, double, const Vec& theta, double,
                                                 Mat& jac) {
        const int n = data->n;
        const Vec& p = exp_cached(theta);
        const auto phi = x.head(n);
        jac.setZero();
        jac.topRightCorner(n, n).diagonal().setOnes(); // d phi' / d psi
        auto accel_phi = jac.bottomLeftCorner(n, n);
        for (std::size_t e = 0; e < data->pairs.size(); ++e) {
            const auto [a, b] = data->pairs[e];
            const double c = data->coupling * pair_coupling(*data, p, e) * std::cos(phi(a) - phi(b));
            accel_phi(a, a) -= c;
            accel_phi(a, b) += c;
            accel_phi(b, b) -= c;
            accel_phi(b, a) += c;
        }
        jac.bottomRightCorner(n, n).diagonal() = -p.head(n);
    };
    family.rhs_jac_params = [data](const Vec& x, double, const Vec& theta, double, Mat& jac) {
        const int n = data->n;
        const Vec& p = exp_cached(theta);
        const auto phi = x.head(n);
        const auto psi = x.tail(n);
        jac.setZero();
        for (int j = 0; j < n; ++j) jac(n + j, j) = -p(j) * psi(j); // damping, through exp
        for (std::size_t e = 0; e < data->pairs.size(); ++e) {
            const int idx = data->pair_param[e];
            if (idx < 0) continue;
            const auto [a, b] = data->pairs[e];
            const double ks = data->coupling * p(idx) * std::sin(phi(a) - phi(b));
            jac(n + a, idx) = -ks;
            jac(n + b, idx) = ks;
        }
    };
    family.output_grad_state = [](const Vec& x, double, const Vec&, Vec& grad) {
        grad.setZero();
        grad(0) = -1.0;
    };
    family.output_grad_params = [](const Vec&, double, const Vec&, Vec& grad) { grad.setZero(); };
    family.initial_state_jac = [data, n](const Vec&) { return Mat::Zero(2 * n, data->param_dim); };
    return family;
}

// ---------------------------------------------------------------------------
// Scalar linear test system
// ---------------------------------------------------------------------------

SystemFamily make_scalar_linear(double a) {
    if (!(a > 0.0)) throw ConfigError("make_scalar_linear: a must be > 0");

    SystemFamily family;
    family.state_dim = 1;
    family.param_dim = 1;
    family.param_domain = ParamDomain::all_positive(1);

    family.rhs = [a](const Vec& x, double input, const Vec& theta, double, Vec& dxdt) {
        dxdt(0) = -a * std::exp(theta(0)) * x(0) + input;
    };
    family.output = [](const Vec& x, double input, const Vec&) { return input - x(0); };
    family.initial_state = [](const Vec&) { return Vec::Zero(1); };

    family.rhs_jac_state = [a](const Vec&, double, const Vec& theta, double, Mat& jac) {
        jac(0, 0) = -a * std::exp(theta(0));
    };
    family.rhs_jac_params = [a](const Vec& x, double, const Vec& theta, double, Mat& jac) {
        jac(0, 0) = -a * std::exp(theta(0)) * x(0);
    };
    family.output_grad_state = [](const Vec&, double, const Vec&, Vec& grad) { grad(0) = -1.0; };
    family.output_grad_params = [](const Vec&, double, const Vec&, Vec& grad) { grad(0) = 0.0; };
    family.initial_state_jac = [](const Vec&) { return Mat::Zero(1, 1); };
    return family;
}

} // namespace spectune

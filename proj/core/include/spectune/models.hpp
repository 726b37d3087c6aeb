#pragma once

#include <cstdint>
#include <vector>

#include "spectune/system_family.hpp"

namespace spectune {

/// Simple undirected graph: symmetric 0/1 adjacency with zero diagonal.
struct AdjacencyMatrix {
    int n = 0;
    Eigen::MatrixXi entries;

    static AdjacencyMatrix empty(int n);
    void add_edge(int a, int b);
    bool has_edge(int a, int b) const { return entries(a, b) != 0; }
    int degree(int node) const;
    int edge_count() const;
    bool connected() const;
    std::vector<std::pair<int, int>> edges() const; // a < b
};

/// Complete graph on n nodes (n = 2 gives the two-node pair, n = 3 the triangle).
AdjacencyMatrix complete_graph(int n);

/// Preferential-attachment graph: a seed clique of m+1 nodes, then every new
/// node attaches to m distinct existing nodes with probability proportional
/// to degree. Deterministic per seed; the result is always connected.
AdjacencyMatrix barabasi_albert(int n, int m, std::uint64_t seed);

/// Diffusively coupled network with tunable cubic damping:
///   x_n' = -x_n - p_n x_n^3 + sum_m A_nm (x_n - x_m) + delta_n1 (x_n - i)
///   o    = i - x_1,   x(0) = 0,   p_n = exp(theta_n) > 0.
/// state_dim = param_dim = number of nodes. Includes analytic Jacobians.
SystemFamily make_diffusive(const AdjacencyMatrix& adjacency);

struct KuramotoConfig {
    int n = 1;
    std::vector<double> omegas; // intrinsic frequencies, mean 0 and omegas[0] == 0
    double coupling = 1.0;      // K
    double spread = 1.0;        // s: multiplicative scaling of the omegas
    bool couple_interior_only = false; // literal index-bound reading: only couplings
                                       // among nodes 2..n-1 are tunable, the rest
                                       // are fixed at 1
};

/// Second-order oscillator network in first-order form, state [phi; phi_dot]:
///   phi_n'' = Omega_n - p_n phi_n' - K sum_{m != n} p_nm sin(phi_n - phi_m)
///             + delta_n1 i
///   o = i - phi_1,   phi(0) = phi'(0) = 0.
/// Parameters: n dampings p_n then the tunable couplings p_nm (unordered
/// pairs, lexicographic), all positive via the log encoding. Intrinsic
/// frequencies are cfg.omegas scaled by cfg.spread, re-normalized so the
/// scaled mean is exactly zero. n = 1 is the single-oscillator family
/// (param_dim = 1, fixed intrinsic frequency 0 by default).
SystemFamily make_kuramoto(const KuramotoConfig& cfg);

/// Intrinsic frequencies for make_kuramoto: node 0 pinned to 0, nodes 1..n-1
/// Gaussian draws recentered so the overall mean is exactly zero.
std::vector<double> draw_intrinsic_frequencies(int n, std::uint64_t seed);

/// Index of the tunable coupling parameter for the unordered pair {a, b}
/// within the parameter vector of make_kuramoto (after the n dampings).
int kuramoto_pair_index(int n, int a, int b);

/// Scalar test system with analytic solutions:
///   x' = -d x + i,  o = i - x,  x(0) = 0,  d = a * exp(theta_1).
/// At theta = 0 the decay rate is exactly `a`.
SystemFamily make_scalar_linear(double a);

} // namespace spectune

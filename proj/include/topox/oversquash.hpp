#pragma once

#include <cstdint>
#include <vector>

#include "topox/complex.hpp"
#include "topox/mpnn.hpp"

namespace topox {

class Rng;

struct SensitivityReport {
    int v = 0, u = 0;
    int distance = 0;
    int layers = 0;
    double empirical = 0.0;
    double bound = 0.0;
    double c_sigma = 0.0, w = 0.0, p = 0.0;
    double propagation = 0.0;  // ((c_r I + c_a S)^m)_{vu}
};

// Max |entry| over the model's message weights.
double max_weight_entry(const MpnnModel& model);
// p (c_sigma w p)^m ((c_r I + c_a S)^m)_{vu}, with p = max(width, in_dim) and
// w = weight_clamp (or the model's largest entry when `model` is given).
SensitivityReport sensitivity_bound(const MpnnConfig& cfg, const Graph& g, int v, int u, int m,
                                    const MpnnModel* model = nullptr);
// L1 norm of d h_v^(m) / d h_u^(0) via reverse-mode Jacobian.
double empirical_sensitivity(const MpnnModel& model, const Graph& g, const Matrix& h0, int v, int u);

// sum_{l <= maxlen} (A^l)_{vu}, saturating at INT64_MAX.
std::int64_t count_walks(const Graph& g, int v, int u, int maxlen);
// p * gamma_{r+k} (c_sigma (c_r + c_a) w p (k+1))^k (2 c_sigma w p c_a / d_min)^r.
double distance_bound(const Graph& g, int v, int u, int r, int k, const MpnnConfig& cfg, double w);

// Spectral quantities from the normalized Laplacian; throw on disconnected graphs.
class ResistanceOracle {
public:
    explicit ResistanceOracle(const Graph& g);
    double resistance(int v, int u) const;
    double access_time(int u, int v) const;  // expected steps of a walk from u to hit v
    double commute_time(int v, int u) const { return access_time(u, v) + access_time(v, u); }
    double total_resistance() const;
    int n_edges() const { return m_; }

private:
    std::vector<double> lambda_;
    Matrix psi_;
    std::vector<double> deg_;
    int m_ = 0;
};

double effective_resistance(const Graph& g, int v, int u);
double commute_time(const Graph& g, int v, int u);
double access_time(const Graph& g, int u, int v);
double total_resistance(const Graph& g);
// All-pairs resistance from the combinatorial Laplacian pseudoinverse.
Matrix resistance_matrix(const Graph& g);
// Mean of (steps v -> u) + (steps u -> v) over simulated random walks.
double monte_carlo_commute_time(const Graph& g, int v, int u, int walks, Rng& rng);

struct ObstructionReport {
    int v = 0, u = 0;
    double obstruction = 0.0;            // O^(m)(v,u)
    double symmetric_obstruction = 0.0;  // tilde O^(m)(v,u)
    double rho = 0.0;                    // fraction of positive pre-activations
    double access = 0.0, commute = 0.0, resistance = 0.0;
};

// Ties W_a to W_r so each layer computes act(W (c_r h + c_a S h)).
void tie_weights(MpnnModel& model);
// Sum over k = 0..m of the Frobenius norms of the degree-normalized Jacobian differences.
ObstructionReport jacobian_obstruction(const MpnnModel& model, const Graph& g, const Matrix& h0, int v, int u);
// Averages over `seeds` freshly drawn tied-weight models.
ObstructionReport mean_obstruction(const MpnnConfig& cfg, const Graph& g, int v, int u, int seeds, std::uint64_t seed);

struct SignalPropagation {
    double value = 0.0;
    bool defined = true;  // false for graphs with no node other than the source
};
// Unit-mass input at v; distance-weighted mass fraction per channel, averaged over channels
// and normalized by the eccentricity of v.
SignalPropagation signal_propagation(const MpnnModel& model, const Graph& g, int v);

struct GradientProbe {
    std::vector<int> depths;
    std::vector<double> grad_norms;  // |dL/d theta^(1)|, averaged over seeds
    double slope = 0.0;              // least-squares slope of log norm vs depth
};
// Tied orthogonal weights scaled to spectral norm mu; quadratic loss against a fixed target.
GradientProbe vanishing_gradient_probe(const MpnnConfig& cfg, const Graph& g, double mu, int m_min, int m_max,
                                       int seeds, std::uint64_t seed);

double spearman(const std::vector<double>& a, const std::vector<double>& b);
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

// Common test graphs.
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph complete_graph(int n);
Graph star_graph(int n);
// Two K_k cliques joined by a single bridge edge (k-1, k).
Graph barbell_graph(int k);
// Connected G(n, p) by rejection; falls back to adding a random spanning tree.
Graph random_connected_graph(int n, double p, Rng& rng);

}  // namespace topox

#pragma once

#include <vector>

#include "topox/san.hpp"

namespace topox {

// x_e = dense2(act(dense1([x_u || x_v]))) + dense2(act(dense1([x_v || x_u]))), with
// optional edge attributes appended.
class FunctionalLift {
public:
    FunctionalLift() = default;
    FunctionalLift(std::size_t node_dim, std::size_t hidden, std::size_t edge_dim, Activation act, Rng& rng);
    Tensor forward(Tape& t, const Graph& g, const Tensor& x_nodes, const Tensor* edge_attr = nullptr) const;
    ParamList params() const;
    Dense& dense1() { return d1_; }
    Dense& dense2() { return d2_; }

private:
    Dense d1_, d2_;
    Activation act_ = Activation::relu;
};

struct PoolConfig {
    double ratio = 0.5;  // rho in (0, 1]
};
// ceil(rho |E|), at least 1 (for a nonempty edge set).
int pooled_edge_count(int n_edges, double ratio);

// Keeps the given edges (in increasing id order), drops rings touching a removed edge.
CellComplex pool_complex(const CellComplex& c, const std::vector<int>& kept_edges);
// Top-k by score, ties to the lower edge id; result sorted by edge id.
std::vector<int> top_k_edges(const std::vector<double>& scores, int k);

struct CanOutput {
    CellComplex complex;
    Tensor features;
    Tensor embedding;  // 1 x d
    std::vector<int> kept;  // original edge ids, in new edge order
};

struct CanConfig {
    SanConfig attention;  // k_up / k_down forced to 1
    PoolConfig pool;
    Readout local_readout = Readout::sum;
};

class CanLayer {
public:
    CanLayer() = default;
    CanLayer(const CanConfig& cfg, Rng& rng, const std::string& name = "can");
    CanOutput forward(Tape& t, const CellComplex& c, const Tensor& x) const;
    ParamList params() const;
    const CanConfig& config() const { return cfg_; }

private:
    CanConfig cfg_;
    SanLayer att_;
    Dense pool_;
};

// Sum over per-layer embeddings.
Tensor can_readout(const std::vector<Tensor>& layer_embeddings);

}  // namespace topox

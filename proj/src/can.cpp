#include "topox/can.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "topox/rng.hpp"

namespace topox {

FunctionalLift::FunctionalLift(std::size_t node_dim, std::size_t hidden, std::size_t edge_dim, Activation act,
                               Rng& rng)
    : act_(act) {
    d1_ = make_dense("lift.dense1", 2 * node_dim, hidden, rng);
    d2_ = make_dense("lift.dense2", hidden, edge_dim, rng);
}

Tensor FunctionalLift::forward(Tape& t, const Graph& g, const Tensor& x_nodes, const Tensor* edge_attr) const {
    std::vector<int> us, vs;
    for (auto [u, v] : g.edges()) {
        us.push_back(u);
        vs.push_back(v);
    }
    Tensor xu = ad::row_gather(x_nodes, us);
    Tensor xv = ad::row_gather(x_nodes, vs);
    auto f = [&](const Tensor& a, const Tensor& b) {
        return d2_.forward(t, activate(d1_.forward(t, ad::concat_cols({a, b})), act_));
    };
    Tensor xe = ad::add(f(xu, xv), f(xv, xu));
    if (edge_attr) xe = ad::concat_cols({xe, *edge_attr});
    return xe;
}

ParamList FunctionalLift::params() const { return {d1_.w, d1_.b, d2_.w, d2_.b}; }

int pooled_edge_count(int n_edges, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("pooling ratio must lie in (0, 1]");
    if (n_edges == 0) return 0;
    // Guard against ratio * |E| landing a hair above an integer.
    const double x = ratio * n_edges;
    int k = static_cast<int>(std::ceil(x - 1e-9));
    return std::clamp(k, 1, n_edges);
}

std::vector<int> top_k_edges(const std::vector<double>& scores, int k) {
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a] > scores[b]; });
    idx.resize(std::min<std::size_t>(k, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

CellComplex pool_complex(const CellComplex& c, const std::vector<int>& kept_edges) {
    std::vector<char> keep(c.n_edges(), 0);
    std::vector<Edge> edges;
    for (int e : kept_edges) {
        if (e < 0 || e >= c.n_edges()) throw std::out_of_range("pool_complex: edge id out of range");
        keep[e] = 1;
        edges.push_back(c.graph.edges()[e]);
    }
    Graph g = Graph::from_ordered_edges(c.n_nodes(), std::move(edges));
    std::vector<std::vector<int>> rings;
    for (int r = 0; r < c.n_rings(); ++r) {
        bool intact = true;
        for (int e : c.ring_edges[r]) intact = intact && keep[e];
        if (intact) rings.push_back(c.rings[r]);
    }
    return complex_from_vertex_cycles(g, rings);
}

CanLayer::CanLayer(const CanConfig& cfg, Rng& rng, const std::string& name) : cfg_(cfg) {
    cfg_.attention.k_up = cfg_.attention.k_down = 1;
    att_ = SanLayer(cfg_.attention, rng, name + ".att");
    pool_ = make_dense(name + ".pool", cfg_.attention.out_dim, 1, rng);
}

CanOutput CanLayer::forward(Tape& t, const CellComplex& c, const Tensor& x) const {
    const CellOperator op = make_cell_operator(c, 1);
    Tensor h = att_.forward(t, op, x);
    Tensor gamma = ad::tanh(pool_.forward(t, h));
    const int k = pooled_edge_count(c.n_edges(), cfg_.pool.ratio);
    std::vector<double> scores(c.n_edges());
    for (int e = 0; e < c.n_edges(); ++e) scores[e] = gamma.value()(e, 0);
    CanOutput out;
    out.kept = top_k_edges(scores, k);
    out.complex = pool_complex(c, out.kept);
    out.features = ad::mul_rows(ad::row_gather(h, out.kept), ad::row_gather(gamma, out.kept));
    out.embedding = readout(out.features, cfg_.local_readout);
    return out;
}

ParamList CanLayer::params() const {
    ParamList ps = att_.params();
    ps.push_back(pool_.w);
    ps.push_back(pool_.b);
    return ps;
}

Tensor can_readout(const std::vector<Tensor>& layer_embeddings) {
    if (layer_embeddings.empty()) throw std::invalid_argument("can_readout: no layer embeddings");
    Tensor s = layer_embeddings[0];
    for (std::size_t i = 1; i < layer_embeddings.size(); ++i) s = ad::add(s, layer_embeddings[i]);
    return s;
}

}  // namespace topox

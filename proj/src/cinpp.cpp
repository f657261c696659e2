#include "topox/cinpp.hpp"

#include <stdexcept>

#include "topox/rng.hpp"

namespace topox {

namespace {

struct Gathered {
    std::vector<int> receiver, sender, via;
};

Gathered flatten(const std::vector<std::vector<Neighbor>>& lists) {
    Gathered g;
    for (std::size_t s = 0; s < lists.size(); ++s)
        for (const auto& n : lists[s]) {
            g.receiver.push_back(static_cast<int>(s));
            g.sender.push_back(n.cell);
            g.via.push_back(n.via);
        }
    return g;
}

Tensor one_plus_eps(Tape& t, const Tensor& h, const ParamPtr& eps) {
    return ad::add(h, ad::scale_by(h, t.param(eps)));
}

}  // namespace

CinppLayer::CinppLayer(const CinppConfig& cfg, Rng& rng, const std::string& name) : cfg_(cfg) {
    const std::size_t d = cfg.hidden;
    for (int k = 0; k < 3; ++k) {
        const std::string tag = name + ".d" + std::to_string(k);
        auto& p = dims_[k];
        p.mlp_b = Mlp(tag + ".mlp_b", {d, d, d}, cfg.mlp_act, rng, true);
        p.mlp_up = Mlp(tag + ".mlp_up", {d, d, d}, cfg.mlp_act, rng, true);
        p.mlp_down = Mlp(tag + ".mlp_down", {d, d, d}, cfg.mlp_act, rng, true);
        p.mlp_m_up = Mlp(tag + ".mlp_m_up", {2 * d, d}, cfg.mlp_act, rng, true);
        p.mlp_m_down = Mlp(tag + ".mlp_m_down", {2 * d, d}, cfg.mlp_act, rng, true);
        p.eps_b = make_param(tag + ".eps_b", Matrix(1, 1));
        p.eps_up = make_param(tag + ".eps_up", Matrix(1, 1));
        p.eps_down = make_param(tag + ".eps_down", Matrix(1, 1));
        p.com = make_dense(tag + ".com", 4 * d, d, rng);
    }
}

FeatureStore CinppLayer::forward(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb,
                                 const FeatureStore& h) const {
    const std::size_t d = cfg_.hidden;
    FeatureStore out;
    for (int k = 0; k < 3; ++k) {
        const std::size_t n = c.n_cells(k);
        if (n == 0) {
            out[k] = t.constant(Matrix(0, d));
            continue;
        }
        if (h[k].rows() != n || h[k].cols() != d)
            throw std::invalid_argument("cinpp_layer: dimension " + std::to_string(k) + " features must be " +
                                        std::to_string(n) + " x " + std::to_string(d));
        const auto& p = dims_[k];
        const Tensor zeros = t.constant(Matrix(n, d));
        // A neighbourhood type exists only when the adjacent dimension is populated.
        const bool has_lower_dim = k > 0 && c.n_cells(k - 1) > 0;
        const bool has_upper_dim = k < 2 && c.n_cells(k + 1) > 0;

        Tensor hb = zeros;
        if (has_lower_dim) {
            std::vector<int> recv, send;
            for (std::size_t s = 0; s < n; ++s)
                for (int b : nb.boundary[k][s]) {
                    recv.push_back(static_cast<int>(s));
                    send.push_back(b);
                }
            Tensor agg = ad::scatter_add(ad::row_gather(h[k - 1], send), recv, n);
            hb = p.mlp_b.forward(t, ad::add(one_plus_eps(t, h[k], p.eps_b), agg));
        }
        Tensor hu = zeros;
        if (has_upper_dim) {
            const Gathered g = flatten(nb.upper[k]);
            Tensor agg = zeros;
            if (!g.receiver.empty()) {
                Tensor pair = ad::concat_cols({ad::row_gather(h[k], g.sender), ad::row_gather(h[k + 1], g.via)});
                agg = ad::scatter_add(p.mlp_m_up.forward(t, pair), g.receiver, n);
            }
            hu = p.mlp_up.forward(t, ad::add(one_plus_eps(t, h[k], p.eps_up), agg));
        }
        Tensor hd = zeros;
        if (cfg_.use_lower && has_lower_dim) {
            const Gathered g = flatten(nb.lower[k]);
            Tensor agg = zeros;
            if (!g.receiver.empty()) {
                Tensor pair = ad::concat_cols({ad::row_gather(h[k], g.sender), ad::row_gather(h[k - 1], g.via)});
                agg = ad::scatter_add(p.mlp_m_down.forward(t, pair), g.receiver, n);
            }
            hd = p.mlp_down.forward(t, ad::add(one_plus_eps(t, h[k], p.eps_down), agg));
        }
        out[k] = activate(p.com.forward(t, ad::concat_cols({h[k], hb, hu, hd})), cfg_.com_act);
    }
    return out;
}

ParamList CinppLayer::params() const {
    ParamList ps;
    for (const auto& p : dims_) {
        for (const Mlp* m : {&p.mlp_b, &p.mlp_up, &p.mlp_down, &p.mlp_m_up, &p.mlp_m_down}) {
            auto mp = m->params();
            ps.insert(ps.end(), mp.begin(), mp.end());
        }
        ps.insert(ps.end(), {p.eps_b, p.eps_up, p.eps_down, p.com.w, p.com.b});
    }
    return ps;
}

CinppModel::CinppModel(const CinppConfig& cfg, Rng& rng) : cfg_(cfg) {
    for (int k = 0; k < 3; ++k) encoders_[k] = make_dense("cinpp.enc" + std::to_string(k), cfg.in_dims[k], cfg.hidden, rng);
    for (int l = 0; l < cfg.layers; ++l) layers_.emplace_back(cfg, rng, "cinpp.l" + std::to_string(l));
    for (int k = 0; k < 3; ++k) readout_[k] = make_dense("cinpp.ro" + std::to_string(k), cfg.hidden, cfg.hidden, rng);
    head_ = make_dense("cinpp.head", cfg.hidden, cfg.n_classes, rng);
}

FeatureStore CinppModel::embed_cells(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb,
                                     const FeatureStore& x) const {
    FeatureStore h;
    for (int k = 0; k < 3; ++k) {
        if (c.n_cells(k) == 0)
            h[k] = t.constant(Matrix(0, cfg_.hidden));
        else
            h[k] = encoders_[k].forward(t, x[k]);
    }
    for (const auto& l : layers_) h = l.forward(t, c, nb, h);
    return h;
}

Tensor cinpp_readout(Tape& t, const FeatureStore& h, Readout pool, const std::array<Dense, 3>& mlps,
                     Activation act) {
    Tensor out;
    for (int k = 0; k < 3; ++k) {
        Tensor pooled = readout(h[k], pool);
        Tensor term = activate(mlps[k].forward(t, pooled), act);
        out = k == 0 ? term : ad::add(out, term);
    }
    return out;
}

Tensor CinppModel::embed(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb, const FeatureStore& x) const {
    return cinpp_readout(t, embed_cells(t, c, nb, x), cfg_.pool, readout_, cfg_.mlp_act);
}

Tensor CinppModel::logits(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb, const FeatureStore& x) const {
    return head_.forward(t, embed(t, c, nb, x));
}

ParamList CinppModel::params() const {
    ParamList ps;
    for (const auto& e : encoders_) ps.insert(ps.end(), {e.w, e.b});
    for (const auto& l : layers_) {
        auto lp = l.params();
        ps.insert(ps.end(), lp.begin(), lp.end());
    }
    for (const auto& r : readout_) ps.insert(ps.end(), {r.w, r.b});
    ps.insert(ps.end(), {head_.w, head_.b});
    return ps;
}

}  // namespace topox

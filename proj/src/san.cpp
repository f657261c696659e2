#include "topox/san.hpp"

#include <stdexcept>

#include "topox/rng.hpp"

namespace topox {

HeadMerge parse_head_merge(const std::string& s) {
    if (s == "concat") return HeadMerge::concat;
    if (s == "mean") return HeadMerge::mean;
    if (s == "sum") return HeadMerge::sum;
    throw std::invalid_argument("unknown head merge '" + s + "'");
}

ScoreVariant parse_score_variant(const std::string& s) {
    if (s == "static_v1" || s == "v1") return ScoreVariant::static_v1;
    if (s == "dynamic_v2" || s == "v2") return ScoreVariant::dynamic_v2;
    throw std::invalid_argument("unknown attention variant '" + s + "'");
}

Readout parse_readout(const std::string& s) {
    if (s == "sum") return Readout::sum;
    if (s == "mean") return Readout::mean;
    if (s == "max") return Readout::max;
    throw std::invalid_argument("unknown readout '" + s + "'");
}

CellOperator make_cell_operator(const CellComplex& c, int dim, const NeighborhoodIndex& nb) {
    if (dim < 0 || dim > 2) throw std::invalid_argument("make_cell_operator: dimension must be 0, 1 or 2");
    CellOperator op;
    op.n = c.n_cells(dim);
    for (std::size_t s = 0; s < op.n; ++s) {
        for (int t : distinct_cells(nb.upper[dim][s])) {
            op.up.receiver.push_back(static_cast<int>(s));
            op.up.sender.push_back(t);
        }
        for (int t : distinct_cells(nb.lower[dim][s])) {
            op.down.receiver.push_back(static_cast<int>(s));
            op.down.sender.push_back(t);
        }
    }
    return op;
}

CellOperator make_cell_operator(const CellComplex& c, int dim) { return make_cell_operator(c, dim, neighborhoods(c)); }

void attach_harmonic(CellOperator& op, const CellComplex& c, const HarmonicMode& mode) {
    if (op.n != static_cast<std::size_t>(c.n_edges()))
        throw std::invalid_argument("attach_harmonic: operator is not on the edges of this complex");
    const HodgeSpectra s = hodge_spectra(c);
    if (mode.kind == HarmonicMode::Kind::exact) {
        op.harmonic_basis = std::make_shared<Matrix>(s.harmonic_basis);
        op.harmonic_dense.reset();
    } else {
        op.harmonic_dense = std::make_shared<Matrix>(harmonic_projector(s, hodge_laplacians(c).l1, mode));
        op.harmonic_basis.reset();
    }
}

SanLayer::SanLayer(const SanConfig& cfg, Rng& rng, const std::string& name) : cfg_(cfg) {
    if (cfg.heads == 0) throw std::invalid_argument("san: at least one head");
    const double gain = 1.4142135623730951;
    for (int dir = 0; dir < 2; ++dir) {
        auto& list = dir == 0 ? up_ : down_;
        const std::string d = name + (dir == 0 ? ".up" : ".down");
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            const std::string tag = d + "." + std::to_string(h);
            AttentionHead head;
            head.w = make_param(tag + ".w", xavier_uniform(cfg.in_dim, cfg.out_dim, gain, rng));
            if (cfg.variant == ScoreVariant::dynamic_v2) {
                head.w_q = make_param(tag + ".w_q", xavier_uniform(cfg.in_dim, cfg.out_dim, gain, rng));
                head.a_dst = make_param(tag + ".a", xavier_uniform(cfg.out_dim, 1, gain, rng));
            } else {
                head.a_dst = make_param(tag + ".a_dst", xavier_uniform(cfg.out_dim, 1, gain, rng));
                head.a_src = make_param(tag + ".a_src", xavier_uniform(cfg.out_dim, 1, gain, rng));
            }
            list.push_back(head);
        }
    }
    com_ = make_dense(name + ".com", cfg.in_dim + 2 * merged_width(), cfg.out_dim, rng);
    if (cfg.harmonic) w_h_ = make_param(name + ".w_h", xavier_uniform(cfg.in_dim, cfg.out_dim, gain, rng));
}

std::size_t SanLayer::merged_width() const {
    return cfg_.merge == HeadMerge::concat ? cfg_.heads * cfg_.out_dim : cfg_.out_dim;
}

Tensor SanLayer::attention(Tape& t, const PairList& pairs, std::size_t n, const Tensor& x,
                           const AttentionHead& h) const {
    Tensor z = ad::matmul(x, t.param(h.w));
    Tensor e;
    if (cfg_.variant == ScoreVariant::static_v1) {
        Tensor sd = ad::matmul(z, t.param(h.a_dst));
        Tensor ss = ad::matmul(z, t.param(h.a_src));
        e = ad::leaky_relu(ad::add(ad::row_gather(sd, pairs.receiver), ad::row_gather(ss, pairs.sender)), 0.2);
    } else {
        Tensor q = ad::matmul(x, t.param(h.w_q));
        Tensor pre = ad::add(ad::row_gather(q, pairs.receiver), ad::row_gather(z, pairs.sender));
        e = ad::matmul(ad::leaky_relu(pre, 0.2), t.param(h.a_dst));
    }
    return ad::segment_softmax(e, pairs.receiver, n);
}

Tensor SanLayer::branch(Tape& t, const PairList& pairs, std::size_t n, const Tensor& x,
                        const std::vector<AttentionHead>& hs, int k) const {
    const int hops = cfg_.iterate ? std::max(k, 1) : 1;
    std::vector<Tensor> outs;
    for (const auto& h : hs) {
        if (pairs.size() == 0) {
            outs.push_back(t.constant(Matrix(n, cfg_.out_dim)));
            continue;
        }
        Tensor alpha = attention(t, pairs, n, x, h);
        Tensor z = ad::matmul(x, t.param(h.w));
        Tensor acc;
        for (int step = 0; step < hops; ++step) {
            z = ad::scatter_add(ad::mul_rows(ad::row_gather(z, pairs.sender), alpha), pairs.receiver, n);
            acc = step == 0 ? z : ad::add(acc, z);
        }
        outs.push_back(acc);
    }
    if (cfg_.merge == HeadMerge::concat) return outs.size() == 1 ? outs[0] : ad::concat_cols(outs);
    Tensor s = outs[0];
    for (std::size_t i = 1; i < outs.size(); ++i) s = ad::add(s, outs[i]);
    return cfg_.merge == HeadMerge::mean ? ad::scale(s, 1.0 / static_cast<double>(outs.size())) : s;
}

Tensor SanLayer::forward(Tape& t, const CellOperator& op, const Tensor& x) const {
    if (x.rows() != op.n) throw std::invalid_argument("san_forward: feature rows must equal cell count");
    if (x.cols() != cfg_.in_dim) throw std::invalid_argument("san_forward: feature width mismatch");
    Tensor hu = branch(t, op.up, op.n, x, up_, cfg_.k_up);
    Tensor hd = branch(t, op.down, op.n, x, down_, cfg_.k_down);
    Tensor pre = com_.forward(t, ad::concat_cols({x, hu, hd}));
    if (cfg_.harmonic) {
        Tensor px;
        if (op.harmonic_basis) {
            Tensor u = t.constant(*op.harmonic_basis);
            Tensor ut = t.constant(op.harmonic_basis->transpose());
            px = ad::matmul(u, ad::matmul(ut, x));
        } else if (op.harmonic_dense) {
            px = ad::matmul(t.constant(*op.harmonic_dense), x);
        } else {
            throw std::invalid_argument("san_forward: harmonic term enabled but no projector attached");
        }
        pre = ad::add(pre, ad::matmul(px, t.param(w_h_)));
    }
    return activate(pre, cfg_.act);
}

ParamList SanLayer::params() const {
    ParamList ps;
    for (const auto* list : {&up_, &down_})
        for (const auto& h : *list)
            for (const auto& p : {h.w, h.w_q, h.a_dst, h.a_src})
                if (p) ps.push_back(p);
    ps.push_back(com_.w);
    ps.push_back(com_.b);
    if (w_h_) ps.push_back(w_h_);
    return ps;
}

Tensor readout(const Tensor& h, Readout mode) {
    switch (mode) {
        case Readout::sum: return ad::sum_rows(h);
        case Readout::mean: return ad::mean_rows(h);
        case Readout::max: return ad::max_rows(h);
    }
    return ad::sum_rows(h);
}

SanModel::SanModel(const SanConfig& first, int layers, Readout ro, std::size_t n_classes, Rng& rng)
    : readout_(ro) {
    SanConfig cfg = first;
    for (int l = 0; l < layers; ++l) {
        layers_.emplace_back(cfg, rng, "san." + std::to_string(l));
        cfg.in_dim = cfg.out_dim;
    }
    head_ = make_dense("san.head", layers > 0 ? first.out_dim : first.in_dim, n_classes, rng);
}

Tensor SanModel::embed(Tape& t, const CellOperator& op, const Tensor& x) const {
    Tensor h = x;
    for (const auto& l : layers_) h = l.forward(t, op, h);
    return h;
}

Tensor SanModel::logits(Tape& t, const CellOperator& op, const Tensor& x) const {
    return head_.forward(t, readout(embed(t, op, x), readout_));
}

ParamList SanModel::params() const {
    ParamList ps;
    for (const auto& l : layers_) {
        auto lp = l.params();
        ps.insert(ps.end(), lp.begin(), lp.end());
    }
    ps.push_back(head_.w);
    ps.push_back(head_.b);
    return ps;
}

}  // namespace topox

#include "topox/mpnn.hpp"

#include <algorithm>
#include <stdexcept>

#include "topox/rng.hpp"

namespace topox {

GraphOperator::GraphOperator(const Graph& g, ShiftKind kind) : n(g.n_nodes()) {
    auto sp = std::make_shared<SparseMatrix>(shift_operator_sparse(g, kind));
    st = std::make_shared<SparseMatrix>(sp->transpose());
    s = sp;
    for (auto [u, v] : g.edges()) {
        src.push_back(u);
        dst.push_back(v);
        src.push_back(v);
        dst.push_back(u);
    }
}

MpnnModel::MpnnModel(const MpnnConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.c_r <= 0.0 && cfg.c_a <= 0.0) throw std::invalid_argument("mpnn: c_r and c_a cannot both vanish");
    if (cfg.layers < 0) throw std::invalid_argument("mpnn: negative layer count");
    const std::size_t in = cfg.in_dim ? cfg.in_dim : cfg.width;
    for (int l = 0; l < cfg.layers; ++l) {
        const std::size_t d_in = l == 0 ? in : cfg.width;
        const std::string tag = "mpnn." + std::to_string(l);
        w_r_.push_back(make_param(tag + ".w_r", xavier_uniform(d_in, cfg.width, 1.4142135623730951, rng)));
        w_a_.push_back(make_param(tag + ".w_a", xavier_uniform(d_in, cfg.width, 1.4142135623730951, rng)));
        if (cfg.bias) b_.push_back(make_param(tag + ".b", Matrix(1, cfg.width)));
        if (cfg.variant == MpnnConfig::Variant::gat) {
            att_dst_.push_back(make_param(tag + ".a_dst", xavier_uniform(cfg.width, 1, 1.4142135623730951, rng)));
            att_src_.push_back(make_param(tag + ".a_src", xavier_uniform(cfg.width, 1, 1.4142135623730951, rng)));
        }
    }
    clamp_weights();
}

void MpnnModel::clamp_weights() {
    if (cfg_.weight_clamp <= 0.0) return;
    const double w = cfg_.weight_clamp;
    for (auto* list : {&w_r_, &w_a_})
        for (auto& p : *list)
            for (double& x : p->value.values()) x = std::clamp(x, -w, w);
}

ParamList MpnnModel::params() const {
    ParamList ps;
    for (std::size_t l = 0; l < w_r_.size(); ++l) {
        ps.push_back(w_r_[l]);
        ps.push_back(w_a_[l]);
        if (!att_dst_.empty()) {
            ps.push_back(att_dst_[l]);
            ps.push_back(att_src_[l]);
        }
        if (!b_.empty()) ps.push_back(b_[l]);
    }
    return ps;
}

std::vector<Tensor> MpnnModel::forward(Tape& t, const GraphOperator& op, const Tensor& h0) const {
    if (h0.rows() != op.n) throw std::invalid_argument("mpnn_forward: H0 rows must equal node count");
    std::vector<Tensor> hs{h0};
    Tensor h = h0;
    for (std::size_t l = 0; l < w_r_.size(); ++l) {
        if (h.cols() != w_r_[l]->value.rows())
            throw std::invalid_argument("mpnn_forward: feature width does not match layer " + std::to_string(l));
        Tensor self = ad::scale(ad::matmul(h, t.param(w_r_[l])), cfg_.c_r);
        Tensor agg;
        if (cfg_.variant == MpnnConfig::Variant::gcn) {
            agg = ad::matmul(ad::spmm(op.s, op.st, h), t.param(w_a_[l]));
        } else {
            Tensor z = ad::matmul(h, t.param(w_a_[l]));
            Tensor sd = ad::matmul(z, t.param(att_dst_[l]));
            Tensor ss = ad::matmul(z, t.param(att_src_[l]));
            Tensor e = ad::leaky_relu(ad::add(ad::row_gather(sd, op.dst), ad::row_gather(ss, op.src)), 0.2);
            Tensor alpha = ad::segment_softmax(e, op.dst, op.n);
            agg = ad::scatter_add(ad::mul_rows(ad::row_gather(z, op.src), alpha), op.dst, op.n);
        }
        Tensor pre = ad::add(self, ad::scale(agg, cfg_.c_a));
        if (!b_.empty()) pre = ad::add_row(pre, t.param(b_[l]));
        h = activate(pre, cfg_.act);
        hs.push_back(h);
    }
    return hs;
}

std::vector<Tensor> mpnn_forward(Tape& t, const Graph& g, const Tensor& h0, const MpnnModel& model) {
    GraphOperator op(g, model.config().shift);
    return model.forward(t, op, h0);
}

}  // namespace topox

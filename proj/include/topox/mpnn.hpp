#pragma once

#include <memory>
#include <vector>

#include "topox/autodiff.hpp"
#include "topox/complex.hpp"

namespace topox {

struct MpnnConfig {
    enum class Variant { gcn, gat };
    int layers = 2;
    std::size_t width = 16;
    std::size_t in_dim = 0;  // 0 means width
    double c_r = 1.0;
    double c_a = 1.0;
    ShiftKind shift = ShiftKind::sym_norm;
    Activation act = Activation::relu;
    double weight_clamp = 0.0;  // max |entry|; 0 disables
    Variant variant = Variant::gcn;
    bool bias = false;  // per-layer bias inside the activation
};

// Sparse shift operator plus directed edge lists, built once per graph.
struct GraphOperator {
    std::size_t n = 0;
    std::shared_ptr<const SparseMatrix> s;
    std::shared_ptr<const SparseMatrix> st;
    std::vector<int> src, dst;  // both directions of every edge
    GraphOperator() = default;
    GraphOperator(const Graph& g, ShiftKind kind);
};

// h^{t+1} = act(c_r h W_r + c_a (S h) W_a), rows are nodes.
class MpnnModel {
public:
    MpnnModel() = default;
    MpnnModel(const MpnnConfig& cfg, Rng& rng);

    // Returns {H0, H1, ..., Hm}.
    std::vector<Tensor> forward(Tape& t, const GraphOperator& op, const Tensor& h0) const;
    ParamList params() const;
    void clamp_weights();

    const MpnnConfig& config() const { return cfg_; }
    std::vector<ParamPtr>& w_r() { return w_r_; }
    std::vector<ParamPtr>& w_a() { return w_a_; }

private:
    MpnnConfig cfg_;
    std::vector<ParamPtr> w_r_, w_a_;
    std::vector<ParamPtr> att_dst_, att_src_;  // gat variant
    std::vector<ParamPtr> b_;
};

std::vector<Tensor> mpnn_forward(Tape& t, const Graph& g, const Tensor& h0, const MpnnModel& model);

}  // namespace topox

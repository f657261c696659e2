#pragma once

#include <array>
#include <vector>

#include "topox/autodiff.hpp"
#include "topox/complex.hpp"
#include "topox/san.hpp"

namespace topox {

// Per-dimension cochain features; entry k has one row per k-cell.
using FeatureStore = std::array<Tensor, 3>;

struct CinppConfig {
    std::array<std::size_t, 3> in_dims{1, 1, 1};
    std::size_t hidden = 16;
    int layers = 3;
    Activation mlp_act = Activation::relu;
    Activation com_act = Activation::relu;
    Readout pool = Readout::sum;
    std::size_t n_classes = 2;
    bool use_lower = true;
};

struct CinppDimParams {
    Mlp mlp_b, mlp_up, mlp_down;  // 2 layers each
    Mlp mlp_m_up, mlp_m_down;     // 1 layer on [h_tau || h_delta]
    ParamPtr eps_b, eps_up, eps_down;
    Dense com;                    // [h || h_B || h_up || h_down] -> hidden
};

// Boundary, co-boundary-mediated upper and boundary-mediated lower messages
// for one layer; parameters are distinct per dimension.
class CinppLayer {
public:
    CinppLayer() = default;
    CinppLayer(const CinppConfig& cfg, Rng& rng, const std::string& name);
    FeatureStore forward(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb, const FeatureStore& h) const;
    ParamList params() const;
    std::array<CinppDimParams, 3>& dims() { return dims_; }

private:
    CinppConfig cfg_;
    std::array<CinppDimParams, 3> dims_;
};

class CinppModel {
public:
    CinppModel() = default;
    CinppModel(const CinppConfig& cfg, Rng& rng);
    // Encodes raw inputs to the hidden width, then runs all layers.
    FeatureStore embed_cells(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb, const FeatureStore& x) const;
    // h_C = MLP_V(pool h_V) + MLP_E(pool h_E) + MLP_R(pool h_R).
    Tensor embed(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb, const FeatureStore& x) const;
    Tensor logits(Tape& t, const CellComplex& c, const NeighborhoodIndex& nb, const FeatureStore& x) const;
    ParamList params() const;
    std::vector<CinppLayer>& layers() { return layers_; }

private:
    CinppConfig cfg_;
    std::array<Dense, 3> encoders_;
    std::vector<CinppLayer> layers_;
    std::array<Dense, 3> readout_;
    Dense head_;
};

Tensor cinpp_readout(Tape& t, const FeatureStore& h, Readout pool, const std::array<Dense, 3>& mlps,
                     Activation act);

}  // namespace topox

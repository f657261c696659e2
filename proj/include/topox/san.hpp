#pragma once

#include <memory>
#include <vector>

#include "topox/autodiff.hpp"
#include "topox/complex.hpp"
#include "topox/spectral.hpp"

namespace topox {

enum class HeadMerge { concat, mean, sum };
enum class ScoreVariant { static_v1, dynamic_v2 };
enum class Readout { sum, mean, max };
HeadMerge parse_head_merge(const std::string& s);
ScoreVariant parse_score_variant(const std::string& s);
Readout parse_readout(const std::string& s);

// Directed neighbor pairs (receiver <- sender) for one direction.
struct PairList {
    std::vector<int> receiver;
    std::vector<int> sender;
    std::size_t size() const { return receiver.size(); }
};

// Attention operator for cells of one dimension of a complex.
struct CellOperator {
    std::size_t n = 0;
    PairList up;
    PairList down;
    // Harmonic projector, either as a basis U (P = U U^T) or a dense matrix.
    std::shared_ptr<const Matrix> harmonic_basis;
    std::shared_ptr<const Matrix> harmonic_dense;
};
CellOperator make_cell_operator(const CellComplex& c, int dim, const NeighborhoodIndex& nb);
CellOperator make_cell_operator(const CellComplex& c, int dim);
// Attaches the exact harmonic projector of the 1-cells (computed via the Hodge spectra).
void attach_harmonic(CellOperator& op, const CellComplex& c, const HarmonicMode& mode = {});

struct SanConfig {
    std::size_t in_dim = 1;
    std::size_t out_dim = 4;
    std::size_t heads = 1;
    HeadMerge merge = HeadMerge::concat;
    ScoreVariant variant = ScoreVariant::static_v1;
    int k_down = 1;
    int k_up = 1;
    bool iterate = true;  // false: single-hop attention regardless of K
    bool harmonic = false;
    Activation act = Activation::relu;
};

struct AttentionHead {
    ParamPtr w;      // v1: message/query weight d x d'; v2: key/message weight (lower block)
    ParamPtr w_q;    // v2 only: query block of the 2d x d' weight
    ParamPtr a_dst;  // v1: receiver half of a (d' x 1); v2: a (d' x 1)
    ParamPtr a_src;  // v1 only
};

class SanLayer {
public:
    SanLayer() = default;
    SanLayer(const SanConfig& cfg, Rng& rng, const std::string& name = "san");
    Tensor forward(Tape& t, const CellOperator& op, const Tensor& x) const;
    // Attention coefficients of one head in one direction (per pair, same order as the PairList).
    Tensor attention(Tape& t, const PairList& pairs, std::size_t n, const Tensor& x, const AttentionHead& h) const;
    ParamList params() const;
    const SanConfig& config() const { return cfg_; }
    std::size_t merged_width() const;
    std::vector<AttentionHead>& heads_up() { return up_; }
    std::vector<AttentionHead>& heads_down() { return down_; }
    Dense& com() { return com_; }

private:
    Tensor branch(Tape& t, const PairList& pairs, std::size_t n, const Tensor& x, const std::vector<AttentionHead>& hs,
                  int k) const;
    SanConfig cfg_;
    std::vector<AttentionHead> up_, down_;
    Dense com_;
    ParamPtr w_h_;
};

Tensor readout(const Tensor& h, Readout mode);

// Stack of SAN layers, readout over cells, dense classification head.
class SanModel {
public:
    SanModel() = default;
    SanModel(const SanConfig& first, int layers, Readout ro, std::size_t n_classes, Rng& rng);
    Tensor embed(Tape& t, const CellOperator& op, const Tensor& x) const;  // cell features after all layers
    Tensor logits(Tape& t, const CellOperator& op, const Tensor& x) const;  // 1 x n_classes
    ParamList params() const;

private:
    std::vector<SanLayer> layers_;
    Readout readout_ = Readout::sum;
    Dense head_;
};

}  // namespace topox

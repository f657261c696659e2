#pragma once

#include <vector>

#include "topox/autodiff.hpp"
#include "topox/mpnn.hpp"

namespace topox {

struct RewiringMap {
    enum class Correction { identity, binarize, power };
    enum class RowScale { ones, inverse_degree };
    Correction correction = Correction::power;
    RowScale row_scale = RowScale::inverse_degree;
    int k0 = 2;  // powers up to k0 are used unchanged
    double theta_init = 0.5;
};

// p(H) = sum_{k=0..K} R((A+I)^k) H W_k. Powers of A+I are cached at construction;
// the correction x^theta_k (theta learnable per power) applies only for k > k0.
class RewiredDiffusion {
public:
    RewiredDiffusion() = default;
    RewiredDiffusion(const Graph& g, int max_power, const RewiringMap& map, std::size_t d_in, std::size_t d_out,
                     Rng& rng);
    Tensor forward(Tape& t, const Tensor& h) const;
    // Corrected operator R((A+I)^k) at the current theta, including the row scale.
    Matrix corrected_power(int k) const;
    const Matrix& power(int k) const { return powers_[k]; }
    ParamList params() const;
    std::vector<ParamPtr>& weights() { return w_; }
    std::vector<ParamPtr>& thetas() { return theta_; }

private:
    RewiringMap map_;
    std::vector<Matrix> powers_;
    std::vector<double> nu_;
    std::vector<ParamPtr> w_;
    std::vector<ParamPtr> theta_;  // one per power (unused for k <= k0)
    Tensor op(Tape& t, int k) const;
};

// lambda * H_loc^(m) + (1 - lambda) * p(H^(0)).
Tensor mpnn_tel(Tape& t, const MpnnModel& model, const GraphOperator& op, const Tensor& h0,
                const RewiredDiffusion& diffusion, double lambda);

}  // namespace topox

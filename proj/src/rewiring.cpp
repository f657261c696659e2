#include "topox/rewiring.hpp"

#include <stdexcept>

#include "topox/rng.hpp"

namespace topox {

RewiredDiffusion::RewiredDiffusion(const Graph& g, int max_power, const RewiringMap& map, std::size_t d_in,
                                   std::size_t d_out, Rng& rng)
    : map_(map) {
    if (max_power < 0) throw std::invalid_argument("rewired_diffusion: K must be non-negative");
    const int n = g.n_nodes();
    Matrix a = adjacency_matrix(g);
    for (int i = 0; i < n; ++i) a(i, i) += 1.0;
    powers_.push_back(Matrix::identity(n));
    for (int k = 1; k <= max_power; ++k) powers_.push_back(powers_.back() * a);
    nu_.assign(n, 1.0);
    if (map.row_scale == RewiringMap::RowScale::inverse_degree)
        for (int v = 0; v < n; ++v) nu_[v] = 1.0 / (g.degree(v) + 1.0);
    for (int k = 0; k <= max_power; ++k) {
        const std::string tag = "rewire." + std::to_string(k);
        w_.push_back(make_param(tag + ".w", xavier_uniform(d_in, d_out, 1.0, rng)));
        theta_.push_back(make_param(tag + ".theta", Matrix(1, 1, map.theta_init)));
    }
}

Tensor RewiredDiffusion::op(Tape& t, int k) const {
    if (k <= map_.k0) return t.constant(powers_[k]);
    const Matrix& base = powers_[k];
    Matrix nu(base.rows(), 1);
    for (std::size_t v = 0; v < base.rows(); ++v) nu(v, 0) = nu_[v];
    switch (map_.correction) {
        case RewiringMap::Correction::identity:
            return ad::mul_rows(t.constant(base), t.constant(nu));
        case RewiringMap::Correction::binarize: {
            Matrix b(base.rows(), base.cols());
            for (std::size_t i = 0; i < base.size(); ++i) b.data()[i] = base.data()[i] > 0.0 ? 1.0 : 0.0;
            return ad::mul_rows(t.constant(b), t.constant(nu));
        }
        case RewiringMap::Correction::power:
            return ad::mul_rows(ad::pow_exponent(base, t.param(theta_[k])), t.constant(nu));
    }
    throw std::logic_error("unknown correction");
}

Tensor RewiredDiffusion::forward(Tape& t, const Tensor& h) const {
    if (h.rows() != powers_[0].rows()) throw std::invalid_argument("rewired_diffusion: row count mismatch");
    Tensor out;
    for (std::size_t k = 0; k < powers_.size(); ++k) {
        Tensor term = ad::matmul(ad::matmul(op(t, static_cast<int>(k)), h), t.param(w_[k]));
        out = k == 0 ? term : ad::add(out, term);
    }
    return out;
}

Matrix RewiredDiffusion::corrected_power(int k) const {
    Tape t;
    return op(t, k).value();
}

ParamList RewiredDiffusion::params() const {
    ParamList ps(w_.begin(), w_.end());
    if (map_.correction == RewiringMap::Correction::power)
        for (std::size_t k = 0; k < theta_.size(); ++k)
            if (static_cast<int>(k) > map_.k0) ps.push_back(theta_[k]);
    return ps;
}

Tensor mpnn_tel(Tape& t, const MpnnModel& model, const GraphOperator& op, const Tensor& h0,
                const RewiredDiffusion& diffusion, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("mpnn_tel: lambda must lie in [0, 1]");
    Tensor local = model.forward(t, op, h0).back();
    Tensor global = diffusion.forward(t, h0);
    return ad::add(ad::scale(local, lambda), ad::scale(global, 1.0 - lambda));
}

}  // namespace topox

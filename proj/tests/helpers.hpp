#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "topox/autodiff.hpp"
#include "topox/can.hpp"
#include "topox/cinpp.hpp"
#include "topox/complex.hpp"
#include "topox/lifting.hpp"
#include "topox/mpnn.hpp"
#include "topox/oversquash.hpp"
#include "topox/rng.hpp"
#include "topox/san.hpp"
#include "topox/spectral.hpp"

namespace testing {

using namespace topox;

// Random graph on n nodes with edge probability p (may be disconnected).
inline Graph random_graph(int n, double p, Rng& rng) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) e.emplace_back(i, j);
    return build_graph(n, e);
}

// Random lifted complex with at least a few rings most of the time.
inline CellComplex random_complex(Rng& rng, int max_nodes = 12, int max_ring = 6) {
    const int n = 4 + static_cast<int>(rng.below(max_nodes - 3));
    const double p = rng.uniform(0.2, 0.5);
    return structural_lift(random_connected_graph(n, p, rng), max_ring);
}

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (double& x : m.values()) x = scale * rng.normal();
    return m;
}

// Independent induced-cycle check: the subgraph induced on `cyc` is exactly the cycle.
inline bool is_induced_cycle(const Graph& g, const std::vector<int>& cyc) {
    const int k = static_cast<int>(cyc.size());
    if (k < 3) return false;
    int induced = 0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (g.has_edge(cyc[i], cyc[j])) ++induced;
    if (induced != k) return false;
    for (int i = 0; i < k; ++i)
        if (!g.has_edge(cyc[i], cyc[(i + 1) % k])) return false;
    return true;
}

// Brute force: every vertex subset of size 3..R whose induced subgraph is a single cycle.
inline int brute_force_chordless_count(const Graph& g, int max_len) {
    const int n = g.n_nodes();
    int count = 0;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        const int k = __builtin_popcount(mask);
        if (k < 3 || k > max_len) continue;
        std::vector<int> vs;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) vs.push_back(i);
        bool ok = true;
        int edges = 0;
        for (int v : vs) {
            int d = 0;
            for (int u : vs)
                if (u != v && g.has_edge(u, v)) ++d;
            if (d != 2) ok = false;
            edges += d;
        }
        if (!ok || edges / 2 != k) continue;
        // connected?
        std::vector<int> seen{vs[0]};
        for (std::size_t i = 0; i < seen.size(); ++i)
            for (int u : vs)
                if (g.has_edge(seen[i], u) && std::find(seen.begin(), seen.end(), u) == seen.end()) seen.push_back(u);
        if (static_cast<int>(seen.size()) == k) ++count;
    }
    return count;
}

inline Matrix dense_power(const Matrix& a, int k) {
    Matrix r = Matrix::identity(a.rows());
    for (int i = 0; i < k; ++i) {
        Matrix next(a.rows(), a.cols());
        for (std::size_t x = 0; x < a.rows(); ++x)
            for (std::size_t y = 0; y < a.cols(); ++y)
                for (std::size_t z = 0; z < a.cols(); ++z) next(x, y) += r(x, z) * a(z, y);
        r = next;
    }
    return r;
}

// Effective resistance by grounding u and solving L_red x = e_v with Gaussian elimination.
inline double grounded_resistance(const Graph& g, int v, int u) {
    if (v == u) return 0.0;
    const int n = g.n_nodes();
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (i != u) idx.push_back(i);
    const int m = n - 1;
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (int r = 0; r < m; ++r) {
        const int x = idx[r];
        a[r][r] = g.degree(x);
        for (int c = 0; c < m; ++c)
            if (c != r && g.has_edge(x, idx[c])) a[r][c] = -1.0;
        a[r][m] = idx[r] == v ? 1.0 : 0.0;
    }
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (int r = 0; r < m; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k <= m; ++k) a[r][k] -= f * a[c][k];
        }
    }
    for (int r = 0; r < m; ++r)
        if (idx[r] == v) return a[r][m] / a[r][r];
    return 0.0;
}

// Expected hitting time by solving the linear system on all nodes but the target.
inline double hitting_oracle(const Graph& g, int from, int to) {
    const int n = g.n_nodes();
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (i != to) idx.push_back(i);
    const int m = n - 1;
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (int r = 0; r < m; ++r) {
        const int x = idx[r];
        a[r][r] = 1.0;
        for (int y : g.neighbors(x))
            if (y != to) a[r][std::find(idx.begin(), idx.end(), y) - idx.begin()] -= 1.0 / g.degree(x);
        a[r][m] = 1.0;
    }
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (int r = 0; r < m; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k <= m; ++k) a[r][k] -= f * a[c][k];
        }
    }
    const int r = static_cast<int>(std::find(idx.begin(), idx.end(), from) - idx.begin());
    return a[r][m] / a[r][r];
}

// Finite-difference gradient check. `f` builds an output from leaves holding
// `inputs`; the scalar probed is sum(out .* R) for a fixed random R. Returns the
// worst over inputs of |g - g_fd|_F / max(|g_fd|_F, |g|_F, 1e-6), with central
// differences of step h.
using OpBuilder = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

inline double fd_relative_error(const OpBuilder& f, const std::vector<Matrix>& inputs, Rng& rng, double h = 1e-5) {
    Matrix probe;
    auto value = [&](const std::vector<Matrix>& in) {
        Tape t;
        std::vector<Tensor> leaves;
        for (const auto& m : in) leaves.push_back(t.constant(m));
        const Matrix out = f(t, leaves).value();
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * probe.values()[i];
        return s;
    };
    Tape t;
    std::vector<Tensor> leaves;
    for (const auto& m : inputs) leaves.push_back(t.leaf(m));
    Tensor out = f(t, leaves);
    probe = random_matrix(out.rows(), out.cols(), rng);
    t.backward(ad::sum_all(ad::mul(out, t.constant(probe))));

    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Matrix g = t.grad(leaves[k]);
        Matrix fd(inputs[k].rows(), inputs[k].cols());
        for (std::size_t i = 0; i < inputs[k].size(); ++i) {
            auto plus = inputs, minus = inputs;
            plus[k].values()[i] += h;
            minus[k].values()[i] -= h;
            fd.values()[i] = (value(plus) - value(minus)) / (2 * h);
        }
        const double denom = std::max({fd.frobenius(), g.frobenius(), 1e-6});
        worst = std::max(worst, (g - fd).frobenius() / denom);
    }
    return worst;
}

struct PrimitiveCase {
    std::string name;
    OpBuilder op;
    std::vector<Matrix> inputs;
};

// One randomized instance of primitive number `which` (mod the primitive count).
inline PrimitiveCase random_primitive_case(int which, Rng& rng) {
    auto dim = [&] { return static_cast<std::size_t>(1 + rng.below(5)); };
    auto rnd = [&](std::size_t r, std::size_t c) { return random_matrix(r, c, rng); };
    // keep elementwise kinks away from zero so central differences stay valid
    auto away = [&](std::size_t r, std::size_t c) {
        Matrix m = rnd(r, c);
        for (double& x : m.values()) x = (x < 0 ? -1.0 : 1.0) * (0.05 + std::abs(x));
        return m;
    };
    const std::size_t r = dim(), c = dim(), k = dim();
    switch (which % 27) {
        case 0: return {"matmul", [](Tape&, auto& x) { return ad::matmul(x[0], x[1]); }, {rnd(r, k), rnd(k, c)}};
        case 1: return {"add", [](Tape&, auto& x) { return ad::add(x[0], x[1]); }, {rnd(r, c), rnd(r, c)}};
        case 2: return {"sub", [](Tape&, auto& x) { return ad::sub(x[0], x[1]); }, {rnd(r, c), rnd(r, c)}};
        case 3: return {"add_row", [](Tape&, auto& x) { return ad::add_row(x[0], x[1]); }, {rnd(r, c), rnd(1, c)}};
        case 4: return {"mul", [](Tape&, auto& x) { return ad::mul(x[0], x[1]); }, {rnd(r, c), rnd(r, c)}};
        case 5: return {"mul_rows", [](Tape&, auto& x) { return ad::mul_rows(x[0], x[1]); }, {rnd(r, c), rnd(r, 1)}};
        case 6: {
            const double s = rng.normal();
            return {"scale", [s](Tape&, auto& x) { return ad::scale(x[0], s); }, {rnd(r, c)}};
        }
        case 7: return {"scale_by", [](Tape&, auto& x) { return ad::scale_by(x[0], x[1]); }, {rnd(r, c), rnd(1, 1)}};
        case 8: return {"add_scalar", [](Tape&, auto& x) { return ad::add_scalar(x[0], 0.7); }, {rnd(r, c)}};
        case 9:
            return {"concat_cols", [](Tape&, auto& x) { return ad::concat_cols({x[0], x[1], x[2]}); },
                    {rnd(r, c), rnd(r, k), rnd(r, 1)}};
        case 10: {
            const std::size_t b = rng.below(c + k), e = b + 1 + rng.below(c + k - b);
            return {"slice_cols", [b, e](Tape&, auto& x) { return ad::slice_cols(x[0], b, e); }, {rnd(r, c + k)}};
        }
        case 11: {
            std::vector<int> idx(k + 2);
            for (int& i : idx) i = static_cast<int>(rng.below(r));
            return {"row_gather", [idx](Tape&, auto& x) { return ad::row_gather(x[0], idx); }, {rnd(r, c)}};
        }
        case 12: {
            std::vector<int> idx(r);
            for (int& i : idx) i = static_cast<int>(rng.below(k));
            return {"scatter_add", [idx, k](Tape&, auto& x) { return ad::scatter_add(x[0], idx, k); }, {rnd(r, c)}};
        }
        case 13: return {"relu", [](Tape&, auto& x) { return ad::relu(x[0]); }, {away(r, c)}};
        case 14: return {"leaky_relu", [](Tape&, auto& x) { return ad::leaky_relu(x[0], 0.2); }, {away(r, c)}};
        case 15: return {"tanh", [](Tape&, auto& x) { return ad::tanh(x[0]); }, {rnd(r, c)}};
        case 16: return {"sigmoid", [](Tape&, auto& x) { return ad::sigmoid(x[0]); }, {rnd(r, c)}};
        case 17: {
            const std::size_t n = r + k;
            std::vector<int> seg(n);
            for (int& s : seg) s = static_cast<int>(rng.below(c + 1));
            return {"segment_softmax", [seg, c](Tape&, auto& x) { return ad::segment_softmax(x[0], seg, c + 1); },
                    {rnd(n, 1)}};
        }
        case 18: return {"sum_rows", [](Tape&, auto& x) { return ad::sum_rows(x[0]); }, {rnd(r, c)}};
        case 19: return {"mean_rows", [](Tape&, auto& x) { return ad::mean_rows(x[0]); }, {rnd(r, c)}};
        case 20: return {"max_rows", [](Tape&, auto& x) { return ad::max_rows(x[0]); }, {rnd(r, c)}};
        case 21: return {"sum_all", [](Tape&, auto& x) { return ad::sum_all(x[0]); }, {rnd(r, c)}};
        case 22: {
            Matrix d = rnd(r, k);
            for (double& v : d.values())
                if (rng.uniform() < 0.5) v = 0.0;
            auto s = std::make_shared<const SparseMatrix>(SparseMatrix::from_dense(d));
            auto st = std::make_shared<const SparseMatrix>(s->transpose());
            return {"spmm", [s, st](Tape&, auto& x) { return ad::spmm(s, st, x[0]); }, {rnd(k, c)}};
        }
        case 23: {
            Matrix base = rnd(r, c);
            for (double& v : base.values()) v = rng.uniform() < 0.3 ? 0.0 : 0.1 + std::abs(v);
            Matrix theta(1, 1, rng.uniform(0.2, 1.0));
            return {"pow_exponent", [base](Tape&, auto& x) { return ad::pow_exponent(base, x[0]); }, {theta}};
        }
        case 24: {
            const std::size_t n_cls = c + 1;
            std::vector<int> labels(r);
            std::vector<double> w(r);
            for (std::size_t i = 0; i < r; ++i) {
                labels[i] = static_cast<int>(rng.below(n_cls));
                w[i] = rng.uniform(0.5, 2.0);
            }
            return {"cross_entropy", [labels, w](Tape&, auto& x) { return ad::cross_entropy(x[0], labels, w); },
                    {rnd(r, n_cls)}};
        }
        case 25: {
            Matrix target = rnd(r, c);
            return {"mse", [target](Tape&, auto& x) { return ad::mse(x[0], target); }, {rnd(r, c)}};
        }
        default:
            return {"mlp_chain",
                    [](Tape&, auto& x) { return ad::tanh(ad::matmul(ad::relu(ad::matmul(x[0], x[1])), x[2])); },
                    {rnd(r, k), rnd(k, c), rnd(c, k)}};
    }
}

// Permutation checks: each returns the max abs deviation between the output on the
// permuted input and the permuted output.

inline double mpnn_equivariance_error(const Graph& g, MpnnConfig::Variant variant, Rng& rng) {
    MpnnConfig cfg;
    cfg.layers = 1 + static_cast<int>(rng.below(3));
    cfg.width = 3;
    cfg.in_dim = 2;
    cfg.variant = variant;
    cfg.act = Activation::tanh;
    MpnnModel model(cfg, rng);
    const Matrix h0 = random_matrix(g.n_nodes(), 2, rng);
    const std::vector<int> perm = rng.permutation(g.n_nodes());
    std::vector<Edge> pe;
    for (auto [u, v] : g.edges()) pe.emplace_back(perm[u], perm[v]);
    const Graph pg = build_graph(g.n_nodes(), pe);
    Tape t;
    const Matrix out = model.forward(t, GraphOperator(g, cfg.shift), t.constant(h0)).back().value();
    const Matrix pout = model.forward(t, GraphOperator(pg, cfg.shift), t.constant(permute_rows(h0, perm))).back().value();
    return max_abs_diff(pout, permute_rows(out, perm));
}

inline SanConfig random_san_config(std::size_t in_dim, Rng& rng) {
    SanConfig cfg;
    cfg.in_dim = in_dim;
    cfg.out_dim = 3;
    cfg.heads = 1 + rng.below(2);
    cfg.merge = static_cast<HeadMerge>(rng.below(3));
    cfg.variant = rng.below(2) ? ScoreVariant::dynamic_v2 : ScoreVariant::static_v1;
    cfg.k_up = 1 + static_cast<int>(rng.below(3));
    cfg.k_down = 1 + static_cast<int>(rng.below(3));
    cfg.act = Activation::tanh;
    return cfg;
}

// Layer output equivariance plus readout invariance of a one-layer SAN model.
inline double san_equivariance_error(const CellComplex& c, Rng& rng) {
    int dim = static_cast<int>(rng.below(3));
    while (c.n_cells(dim) == 0) --dim;
    SanConfig cfg = random_san_config(2, rng);
    SanLayer layer(cfg, rng);
    SanModel model(cfg, 1, static_cast<Readout>(rng.below(3)), 2, rng);
    const auto p = CellPermutation::random(c, rng);
    const CellComplex pc = permute_complex(c, p);
    const Matrix x = random_matrix(c.n_cells(dim), 2, rng);
    const Matrix px = permute_rows(x, p.perm[dim]);
    Tape t;
    const CellOperator op = make_cell_operator(c, dim), pop = make_cell_operator(pc, dim);
    const Matrix out = layer.forward(t, op, t.constant(x)).value();
    const Matrix pout = layer.forward(t, pop, t.constant(px)).value();
    double err = max_abs_diff(pout, permute_rows(out, p.perm[dim]));
    const Matrix logits = model.logits(t, op, t.constant(x)).value();
    err = std::max(err, max_abs_diff(logits, model.logits(t, pop, t.constant(px)).value()));
    return err;
}

// Harmonic projector transforms as D P' P_h P'^T D, D the orientation flips.
inline double harmonic_equivariance_error(const CellComplex& c, Rng& rng) {
    const auto p = CellPermutation::random(c, rng);
    const CellComplex pc = permute_complex(c, p);
    const auto flips = orientation_flips(c, p);
    const Matrix h = harmonic_projector(c, {});
    const Matrix ph = harmonic_projector(pc, {});
    Matrix expect(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j) {
            const int ni = p.perm[1][i], nj = p.perm[1][j];
            expect(ni, nj) = flips[1][ni] * flips[1][nj] * h(i, j);
        }
    return max_abs_diff(ph, expect);
}

inline double can_equivariance_error(const CellComplex& c, Rng& rng) {
    CanConfig cfg;
    cfg.attention = random_san_config(2, rng);
    cfg.attention.k_up = cfg.attention.k_down = 1;
    cfg.pool.ratio = 0.25 + 0.25 * static_cast<double>(rng.below(4));
    CanLayer layer(cfg, rng);
    const auto p = CellPermutation::random(c, rng);
    const CellComplex pc = permute_complex(c, p);
    const Matrix x = random_matrix(c.n_edges(), 2, rng);
    Tape t;
    CanOutput a = layer.forward(t, c, t.constant(x));
    CanOutput b = layer.forward(t, pc, t.constant(permute_rows(x, p.perm[1])));
    double err = max_abs_diff(a.embedding.value(), b.embedding.value());
    if (a.kept.size() != b.kept.size()) return 1e300;
    for (std::size_t i = 0; i < a.kept.size(); ++i) {
        const int target = p.perm[1][a.kept[i]];
        const auto it = std::find(b.kept.begin(), b.kept.end(), target);
        if (it == b.kept.end()) return 1e300;
        const std::size_t j = it - b.kept.begin();
        for (std::size_t col = 0; col < a.features.cols(); ++col)
            err = std::max(err, std::abs(a.features.value()(i, col) - b.features.value()(j, col)));
    }
    if (a.complex.n_rings() != b.complex.n_rings()) return 1e300;
    return err;
}

inline double cinpp_equivariance_error(const CellComplex& c, Rng& rng) {
    CinppConfig cfg;
    cfg.in_dims = {2, 2, 2};
    cfg.hidden = 4;
    cfg.layers = 1 + static_cast<int>(rng.below(3));
    cfg.mlp_act = Activation::tanh;
    cfg.com_act = Activation::tanh;
    cfg.use_lower = rng.below(2) == 0;
    CinppModel model(cfg, rng);
    const auto p = CellPermutation::random(c, rng);
    const CellComplex pc = permute_complex(c, p);
    const auto nb = neighborhoods(c), pnb = neighborhoods(pc);
    Tape t;
    FeatureStore x, px;
    for (int k = 0; k < 3; ++k) {
        const Matrix m = random_matrix(c.n_cells(k), 2, rng);
        x[k] = t.constant(m);
        px[k] = t.constant(permute_rows(m, p.perm[k]));
    }
    const FeatureStore a = model.embed_cells(t, c, nb, x), b = model.embed_cells(t, pc, pnb, px);
    double err = 0.0;
    for (int k = 0; k < 3; ++k) err = std::max(err, max_abs_diff(b[k].value(), permute_rows(a[k].value(), p.perm[k])));
    const Matrix logits = model.logits(t, c, nb, x).value();
    err = std::max(err, max_abs_diff(logits, model.logits(t, pc, pnb, px).value()));
    return err;
}

inline double functional_lift_equivariance_error(const Graph& g, Rng& rng) {
    FunctionalLift lift(2, 4, 3, Activation::tanh, rng);
    const std::vector<int> perm = rng.permutation(g.n_nodes());
    std::vector<Edge> pe;
    for (auto [u, v] : g.edges()) pe.emplace_back(perm[u], perm[v]);
    const Graph pg = build_graph(g.n_nodes(), pe);
    const Matrix x = random_matrix(g.n_nodes(), 2, rng);
    Tape t;
    const Matrix a = lift.forward(t, g, t.constant(x)).value();
    const Matrix b = lift.forward(t, pg, t.constant(permute_rows(x, perm))).value();
    double err = 0.0;
    for (int e = 0; e < g.n_edges(); ++e) {
        auto [u, v] = g.edges()[e];
        const int ne = pg.edge_id(perm[u], perm[v]);
        for (std::size_t col = 0; col < a.cols(); ++col) err = std::max(err, std::abs(a(e, col) - b(ne, col)));
    }
    return err;
}

}  // namespace testing

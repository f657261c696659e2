#include "topox/oversquash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "topox/rng.hpp"
#include "topox/spectral.hpp"

namespace topox {

namespace {

Matrix matrix_power(const Matrix& a, int m) {
    Matrix r = Matrix::identity(a.rows());
    for (int i = 0; i < m; ++i) r = r * a;
    return r;
}

void check_pair(const Graph& g, int v, int u) {
    if (v < 0 || u < 0 || v >= g.n_nodes() || u >= g.n_nodes())
        throw std::out_of_range("node pair out of range");
}

Matrix random_orthogonal(std::size_t p, Rng& rng) {
    Matrix q(p, p);
    for (double& x : q.values()) x = rng.normal();
    // Gram-Schmidt on columns.
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double d = 0.0;
            for (std::size_t i = 0; i < p; ++i) d += q(i, j) * q(i, k);
            for (std::size_t i = 0; i < p; ++i) q(i, j) -= d * q(i, k);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < p; ++i) nrm += q(i, j) * q(i, j);
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < p; ++i) q(i, j) /= nrm;
    }
    return q;
}

Matrix random_normal(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& x : m.values()) x = rng.normal();
    return m;
}

std::vector<double> ranks(const std::vector<double>& a) {
    std::vector<std::size_t> idx(a.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return a[x] < a[y]; });
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && a[idx[j + 1]] == a[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double max_weight_entry(const MpnnModel& model) {
    double w = 0.0;
    auto& m = const_cast<MpnnModel&>(model);
    for (const auto& p : m.w_r()) w = std::max(w, p->value.max_abs());
    for (const auto& p : m.w_a()) w = std::max(w, p->value.max_abs());
    return w;
}

SensitivityReport sensitivity_bound(const MpnnConfig& cfg, const Graph& g, int v, int u, int m,
                                    const MpnnModel* model) {
    check_pair(g, v, u);
    SensitivityReport r;
    r.v = v;
    r.u = u;
    r.layers = m;
    r.distance = g.bfs_distances(u)[v];
    r.c_sigma = activation_lipschitz(cfg.act);
    r.w = model ? max_weight_entry(*model) : cfg.weight_clamp;
    if (r.w <= 0.0) throw std::invalid_argument("sensitivity_bound: weight clamp must be positive");
    r.p = static_cast<double>(std::max(cfg.width, cfg.in_dim ? cfg.in_dim : cfg.width));
    Matrix op = shift_operator(g, cfg.shift);
    op *= cfg.c_a;
    for (std::size_t i = 0; i < op.rows(); ++i) op(i, i) += cfg.c_r;
    r.propagation = matrix_power(op, m)(v, u);
    r.bound = r.p * std::pow(r.c_sigma * r.w * r.p, m) * r.propagation;
    return r;
}

double empirical_sensitivity(const MpnnModel& model, const Graph& g, const Matrix& h0, int v, int u) {
    check_pair(g, v, u);
    Tape t;
    Tensor x = t.leaf(h0);
    auto hs = mpnn_forward(t, g, x, model);
    return l1_norm(jacobian(t, hs.back(), v, x, u));
}

std::int64_t count_walks(const Graph& g, int v, int u, int maxlen) {
    check_pair(g, v, u);
    const int n = g.n_nodes();
    constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
    // walks[x] = number of walks of the current length from v to x
    std::vector<std::int64_t> walks(n, 0), next(n);
    walks[v] = 1;
    std::int64_t total = 0;
    for (int len = 1; len <= maxlen; ++len) {
        std::fill(next.begin(), next.end(), 0);
        for (int x = 0; x < n; ++x) {
            if (walks[x] == 0) continue;
            for (int y : g.neighbors(x)) next[y] = next[y] > kMax - walks[x] ? kMax : next[y] + walks[x];
        }
        walks.swap(next);
        total = total > kMax - walks[u] ? kMax : total + walks[u];
    }
    return total;
}

double distance_bound(const Graph& g, int v, int u, int r, int k, const MpnnConfig& cfg, double w) {
    check_pair(g, v, u);
    if (k < 0 || k >= r) throw std::invalid_argument("distance_bound: need 0 <= k < r");
    const int dist = g.bfs_distances(u)[v];
    if (dist != r) throw std::invalid_argument("distance_bound: nodes are not at distance r");
    const double cs = activation_lipschitz(cfg.act);
    const double p = static_cast<double>(std::max(cfg.width, cfg.in_dim ? cfg.in_dim : cfg.width));
    const double gamma = static_cast<double>(count_walks(g, v, u, r + k));
    const double ck = std::pow(cs * (cfg.c_r + cfg.c_a) * w * p * (k + 1), k);
    const double decay = std::pow(2.0 * cs * w * p * cfg.c_a / g.min_degree(), r);
    return p * gamma * ck * decay;
}

ResistanceOracle::ResistanceOracle(const Graph& g) : m_(g.n_edges()) {
    if (!g.is_connected()) throw std::invalid_argument("resistance: graph is disconnected");
    SpectralDecomposition d = eigh(normalized_laplacian(g));
    lambda_ = d.values;
    psi_ = d.vectors;
    for (int x = 0; x < g.n_nodes(); ++x) deg_.push_back(g.degree(x));
}

double ResistanceOracle::resistance(int v, int u) const {
    double s = 0.0;
    for (std::size_t l = 1; l < lambda_.size(); ++l) {
        const double d = psi_(v, l) / std::sqrt(deg_[v]) - psi_(u, l) / std::sqrt(deg_[u]);
        s += d * d / lambda_[l];
    }
    return s;
}

double ResistanceOracle::access_time(int u, int v) const {
    double s = 0.0;
    for (std::size_t l = 1; l < lambda_.size(); ++l)
        s += (psi_(v, l) * psi_(v, l) / deg_[v] - psi_(v, l) * psi_(u, l) / std::sqrt(deg_[v] * deg_[u])) /
             lambda_[l];
    return 2.0 * m_ * s;
}

double ResistanceOracle::total_resistance() const {
    double s = 0.0;
    const int n = static_cast<int>(deg_.size());
    for (int v = 0; v < n; ++v)
        for (int u = v + 1; u < n; ++u) s += resistance(v, u);
    return s;
}

double effective_resistance(const Graph& g, int v, int u) {
    check_pair(g, v, u);
    return ResistanceOracle(g).resistance(v, u);
}
double commute_time(const Graph& g, int v, int u) {
    check_pair(g, v, u);
    return ResistanceOracle(g).commute_time(v, u);
}
double access_time(const Graph& g, int u, int v) {
    check_pair(g, v, u);
    return ResistanceOracle(g).access_time(u, v);
}

Matrix resistance_matrix(const Graph& g) {
    if (!g.is_connected()) throw std::invalid_argument("resistance: graph is disconnected");
    const int n = g.n_nodes();
    Matrix l(n, n);
    for (auto [a, b] : g.edges()) {
        l(a, b) -= 1.0;
        l(b, a) -= 1.0;
        l(a, a) += 1.0;
        l(b, b) += 1.0;
    }
    SpectralDecomposition d = eigh(l);
    Matrix pinv(n, n);
    for (int k = 0; k < n; ++k) {
        if (d.values[k] <= kKernelCutoff) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pinv(i, j) += d.vectors(i, k) * d.vectors(j, k) / d.values[k];
    }
    return kernels::pairwise_resistance(pinv);
}

double total_resistance(const Graph& g) {
    const Matrix r = resistance_matrix(g);
    double s = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i)
        for (std::size_t j = i + 1; j < r.cols(); ++j) s += r(i, j);
    return s;
}

double monte_carlo_commute_time(const Graph& g, int v, int u, int walks, Rng& rng) {
    check_pair(g, v, u);
    if (!g.is_connected()) throw std::invalid_argument("random walk: graph is disconnected");
    auto hit = [&](int from, int to) {
        long steps = 0;
        int x = from;
        while (x != to) {
            const auto& nb = g.neighbors(x);
            x = nb[rng.below(nb.size())];
            ++steps;
        }
        return steps;
    };
    double total = 0.0;
    for (int i = 0; i < walks; ++i) total += static_cast<double>(hit(v, u) + hit(u, v));
    return total / walks;
}

void tie_weights(MpnnModel& model) {
    for (std::size_t l = 0; l < model.w_r().size(); ++l) model.w_a()[l] = model.w_r()[l];
}

ObstructionReport jacobian_obstruction(const MpnnModel& model, const Graph& g, const Matrix& h0, int v, int u) {
    check_pair(g, v, u);
    ObstructionReport rep;
    rep.v = v;
    rep.u = u;
    Tape t;
    Tensor x = t.leaf(h0);
    auto hs = mpnn_forward(t, g, x, model);
    const int m = static_cast<int>(hs.size()) - 1;
    const std::size_t p = hs.back().cols();
    const double dv = g.degree(v), du = g.degree(u), dvu = std::sqrt(dv * du);

    // grads[src][k](i, c) = d h_src^(m)[i] / d h_?^(k)[c] for ? in {v, u}
    auto collect = [&](int src, int other) {
        std::vector<Matrix> self(m + 1), cross(m + 1);
        for (int k = 0; k <= m; ++k) {
            self[k] = Matrix(p, hs[k].cols());
            cross[k] = Matrix(p, hs[k].cols());
        }
        for (std::size_t i = 0; i < p; ++i) {
            Matrix seed(hs.back().rows(), p);
            seed(src, i) = 1.0;
            t.vjp(hs.back(), seed);
            for (int k = 0; k <= m; ++k) {
                const Matrix gk = t.grad(hs[k]);
                for (std::size_t c = 0; c < gk.cols(); ++c) {
                    self[k](i, c) = gk(src, c);
                    cross[k](i, c) = gk(other, c);
                }
            }
        }
        return std::pair{self, cross};
    };
    auto [vv, vu] = collect(v, u);
    auto [uu, uv] = collect(u, v);
    for (int k = 0; k <= m; ++k) {
        Matrix jv = vv[k];
        jv *= 1.0 / dv;
        Matrix tmp = vu[k];
        tmp *= 1.0 / dvu;
        jv -= tmp;
        Matrix ju = uu[k];
        ju *= 1.0 / du;
        tmp = uv[k];
        tmp *= 1.0 / dvu;
        ju -= tmp;
        rep.obstruction += jv.frobenius();
        rep.symmetric_obstruction += (jv + ju).frobenius();
    }
    std::size_t pos = 0, total = 0;
    for (int k = 1; k <= m; ++k)
        for (double z : hs[k].value().values()) {
            pos += z > 0.0;
            ++total;
        }
    rep.rho = total ? static_cast<double>(pos) / static_cast<double>(total) : 0.0;
    return rep;
}

ObstructionReport mean_obstruction(const MpnnConfig& cfg, const Graph& g, int v, int u, int seeds,
                                   std::uint64_t seed) {
    ObstructionReport acc;
    acc.v = v;
    acc.u = u;
    const std::size_t in = cfg.in_dim ? cfg.in_dim : cfg.width;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(seed + 0x9e37ULL * static_cast<std::uint64_t>(s + 1));
        MpnnModel model(cfg, rng);
        tie_weights(model);
        const Matrix h0 = random_normal(g.n_nodes(), in, rng);
        ObstructionReport r = jacobian_obstruction(model, g, h0, v, u);
        acc.obstruction += r.obstruction / seeds;
        acc.symmetric_obstruction += r.symmetric_obstruction / seeds;
        acc.rho += r.rho / seeds;
    }
    if (g.is_connected() && v != u) {
        ResistanceOracle o(g);
        acc.access = o.access_time(u, v);
        acc.commute = o.commute_time(v, u);
        acc.resistance = o.resistance(v, u);
    }
    return acc;
}

SignalPropagation signal_propagation(const MpnnModel& model, const Graph& g, int v) {
    SignalPropagation out;
    if (g.n_nodes() < 2) {
        out.defined = false;
        return out;
    }
    const std::size_t in = model.config().in_dim ? model.config().in_dim : model.config().width;
    Matrix h0(g.n_nodes(), in);
    for (std::size_t c = 0; c < in; ++c) h0(v, c) = 1.0 / static_cast<double>(in);
    Tape t;
    auto hs = mpnn_forward(t, g, t.constant(h0), model);
    const Matrix& h = hs.back().value();
    const std::vector<int> dist = g.bfs_distances(v);
    const int ecc = *std::max_element(dist.begin(), dist.end());
    if (ecc <= 0) {
        out.defined = false;
        return out;
    }
    double s = 0.0;
    for (std::size_t f = 0; f < h.cols(); ++f) {
        double mass = 0.0;
        for (std::size_t x = 0; x < h.rows(); ++x) mass += std::abs(h(x, f));
        if (mass == 0.0) continue;
        for (std::size_t x = 0; x < h.rows(); ++x)
            if (static_cast<int>(x) != v && dist[x] > 0) s += std::abs(h(x, f)) / mass * dist[x];
    }
    out.value = s / (static_cast<double>(h.cols()) * ecc);
    return out;
}

GradientProbe vanishing_gradient_probe(const MpnnConfig& cfg, const Graph& g, double mu, int m_min, int m_max,
                                       int seeds, std::uint64_t seed) {
    GradientProbe probe;
    const std::size_t p = cfg.width;
    for (int m = m_min; m <= m_max; ++m) {
        double log_sum = 0.0;
        for (int s = 0; s < seeds; ++s) {
            Rng data_rng(seed + 0x51ULL * static_cast<std::uint64_t>(s + 1));
            const Matrix h0 = random_normal(g.n_nodes(), p, data_rng);
            const Matrix target = random_normal(g.n_nodes(), p, data_rng);
            MpnnConfig c = cfg;
            c.layers = m;
            c.in_dim = p;
            c.weight_clamp = 0.0;
            Rng model_rng(seed + 0x77ULL * static_cast<std::uint64_t>(s + 1) + static_cast<std::uint64_t>(m));
            MpnnModel model(c, model_rng);
            tie_weights(model);
            for (auto& w : model.w_r()) {
                w->value = random_orthogonal(p, model_rng);
                w->value *= mu;
            }
            zero_grads(model.params());
            Tape t;
            auto hs = mpnn_forward(t, g, t.constant(h0), model);
            Tensor loss = ad::scale(ad::mse(hs.back(), target), 0.5);
            t.backward(loss);
            log_sum += std::log(model.w_r()[0]->grad.frobenius());
        }
        probe.depths.push_back(m);
        probe.grad_norms.push_back(std::exp(log_sum / seeds));
    }
    std::vector<double> x(probe.depths.begin(), probe.depths.end()), y;
    for (double gn : probe.grad_norms) y.push_back(std::log(gn));
    probe.slope = least_squares_slope(x, y);
    return probe;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

Graph path_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return build_graph(n, e);
}

Graph cycle_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i) e.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
    return build_graph(n, e);
}

Graph complete_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return build_graph(n, e);
}

Graph star_graph(int n) {
    std::vector<Edge> e;
    for (int i = 1; i < n; ++i) e.emplace_back(0, i);
    return build_graph(n, e);
}

Graph barbell_graph(int k) {
    std::vector<Edge> e;
    for (int off : {0, k})
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) e.emplace_back(off + i, off + j);
    e.emplace_back(k - 1, k);
    return build_graph(2 * k, e);
}

Graph random_connected_graph(int n, double p, Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Edge> e;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < p) e.emplace_back(i, j);
        Graph g = build_graph(n, e);
        if (g.is_connected()) return g;
    }
    std::vector<Edge> e;
    for (int i = 1; i < n; ++i) e.emplace_back(static_cast<int>(rng.below(i)), i);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) e.emplace_back(i, j);
    return build_graph(n, e);
}

}  // namespace topox

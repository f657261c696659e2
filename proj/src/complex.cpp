#include "topox/complex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

#include "topox/rng.hpp"

namespace topox {

Graph Graph::from_ordered_edges(int n_nodes, std::vector<Edge> edges) {
    if (n_nodes < 0) throw std::invalid_argument("graph: negative node count");
    Graph g;
    g.n_nodes_ = n_nodes;
    g.adj_.assign(n_nodes, {});
    g.inc_.assign(n_nodes, {});
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
            throw std::invalid_argument("graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                                        ") out of range for " + std::to_string(n_nodes) + " nodes");
        if (u == v) throw std::invalid_argument("graph: self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
        edges[i] = {u, v};
        g.adj_[u].push_back(v);
        g.adj_[v].push_back(u);
        g.inc_[u].push_back(static_cast<int>(i));
        g.inc_[v].push_back(static_cast<int>(i));
    }
    for (int v = 0; v < n_nodes; ++v) {
        auto& nb = g.adj_[v];
        auto& ie = g.inc_[v];
        std::vector<int> order(nb.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return nb[a] < nb[b]; });
        std::vector<int> nb2, ie2;
        for (int o : order) {
            nb2.push_back(nb[o]);
            ie2.push_back(ie[o]);
        }
        for (std::size_t i = 1; i < nb2.size(); ++i)
            if (nb2[i] == nb2[i - 1])
                throw std::invalid_argument("graph: duplicate edge (" + std::to_string(v) + "," +
                                            std::to_string(nb2[i]) + ")");
        nb = std::move(nb2);
        ie = std::move(ie2);
    }
    g.edges_ = std::move(edges);
    return g;
}

int Graph::edge_id(int u, int v) const {
    if (u < 0 || v < 0 || u >= n_nodes_ || v >= n_nodes_) return -1;
    const auto& nb = adj_[u];
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return -1;
    return inc_[u][it - nb.begin()];
}

int Graph::min_degree() const {
    int m = n_nodes_ ? degree(0) : 0;
    for (int v = 1; v < n_nodes_; ++v) m = std::min(m, degree(v));
    return m;
}

std::vector<int> Graph::bfs_distances(int src) const {
    std::vector<int> dist(n_nodes_, -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        int x = q.front();
        q.pop();
        for (int y : adj_[x])
            if (dist[y] < 0) {
                dist[y] = dist[x] + 1;
                q.push(y);
            }
    }
    return dist;
}

int Graph::n_components() const {
    std::vector<int> comp(n_nodes_, -1);
    int count = 0;
    for (int s = 0; s < n_nodes_; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = count;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int y : adj_[x])
                if (comp[y] < 0) {
                    comp[y] = count;
                    stack.push_back(y);
                }
        }
        ++count;
    }
    return count;
}

Graph build_graph(int n_nodes, std::vector<Edge> edges) {
    for (auto& [u, v] : edges) {
        if (u == v) throw std::invalid_argument("graph: self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Graph::from_ordered_edges(n_nodes, std::move(edges));
}

Graph disjoint_union(const std::vector<const Graph*>& parts) {
    std::vector<Edge> edges;
    int offset = 0;
    for (const Graph* g : parts) {
        for (auto [u, v] : g->edges()) edges.emplace_back(u + offset, v + offset);
        offset += g->n_nodes();
    }
    return Graph::from_ordered_edges(offset, std::move(edges));
}

ShiftKind parse_shift_kind(const std::string& s) {
    if (s == "adjacency") return ShiftKind::adjacency;
    if (s == "sym_norm") return ShiftKind::sym_norm;
    if (s == "rw_norm") return ShiftKind::rw_norm;
    if (s == "laplacian") return ShiftKind::laplacian;
    if (s == "sym_norm_laplacian") return ShiftKind::sym_norm_laplacian;
    throw std::invalid_argument("unknown shift operator '" + s + "'");
}

std::string to_string(ShiftKind k) {
    switch (k) {
        case ShiftKind::adjacency: return "adjacency";
        case ShiftKind::sym_norm: return "sym_norm";
        case ShiftKind::rw_norm: return "rw_norm";
        case ShiftKind::laplacian: return "laplacian";
        case ShiftKind::sym_norm_laplacian: return "sym_norm_laplacian";
    }
    return "?";
}

Matrix adjacency_matrix(const Graph& g) {
    Matrix a(g.n_nodes(), g.n_nodes());
    for (auto [u, v] : g.edges()) a(u, v) = a(v, u) = 1.0;
    return a;
}

SparseMatrix shift_operator_sparse(const Graph& g, ShiftKind kind) {
    const int n = g.n_nodes();
    const bool normalized = kind == ShiftKind::sym_norm || kind == ShiftKind::rw_norm ||
                            kind == ShiftKind::sym_norm_laplacian;
    if (normalized)
        for (int v = 0; v < n; ++v)
            if (g.degree(v) == 0)
                throw std::invalid_argument("shift_operator: node " + std::to_string(v) +
                                            " is isolated; normalized operator undefined");
    std::vector<SparseMatrix::Entry> e;
    for (int v = 0; v < n; ++v) {
        const double dv = g.degree(v);
        if (kind == ShiftKind::laplacian) e.push_back({std::size_t(v), std::size_t(v), dv});
        if (kind == ShiftKind::sym_norm_laplacian) e.push_back({std::size_t(v), std::size_t(v), 1.0});
        for (int u : g.neighbors(v)) {
            const double du = g.degree(u);
            double w = 1.0;
            switch (kind) {
                case ShiftKind::adjacency: w = 1.0; break;
                case ShiftKind::sym_norm: w = 1.0 / std::sqrt(dv * du); break;
                case ShiftKind::rw_norm: w = 1.0 / dv; break;
                case ShiftKind::laplacian: w = -1.0; break;
                case ShiftKind::sym_norm_laplacian: w = -1.0 / std::sqrt(dv * du); break;
            }
            e.push_back({std::size_t(v), std::size_t(u), w});
        }
    }
    return SparseMatrix::from_entries(n, n, std::move(e));
}

Matrix shift_operator(const Graph& g, ShiftKind kind) { return shift_operator_sparse(g, kind).dense(); }

SignedIncidence::SignedIncidence(int n_rows, int n_cols, std::vector<IncidenceEntry> entries)
    : n_rows_(n_rows), n_cols_(n_cols), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const IncidenceEntry& a, const IncidenceEntry& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    col_ptr_.assign(n_cols_ + 1, 0);
    for (const auto& e : entries_) {
        if (e.row < 0 || e.row >= n_rows_ || e.col < 0 || e.col >= n_cols_)
            throw std::invalid_argument("incidence: entry out of range");
        if (e.sign != 1 && e.sign != -1) throw std::invalid_argument("incidence: sign must be +-1");
        col_ptr_[e.col + 1]++;
    }
    for (int c = 0; c < n_cols_; ++c) col_ptr_[c + 1] += col_ptr_[c];
}

std::pair<const IncidenceEntry*, const IncidenceEntry*> SignedIncidence::column(int c) const {
    const IncidenceEntry* base = entries_.data();
    return {base + col_ptr_[c], base + col_ptr_[c + 1]};
}

Matrix SignedIncidence::dense() const {
    Matrix m(n_rows_, n_cols_);
    for (const auto& e : entries_) m(e.row, e.col) = e.sign;
    return m;
}

SparseMatrix SignedIncidence::sparse() const {
    std::vector<SparseMatrix::Entry> e;
    for (const auto& x : entries_) e.push_back({std::size_t(x.row), std::size_t(x.col), double(x.sign)});
    return SparseMatrix::from_entries(n_rows_, n_cols_, std::move(e));
}

SignedIncidence graph_incidence(const Graph& g) {
    std::vector<IncidenceEntry> e;
    for (int i = 0; i < g.n_edges(); ++i) {
        auto [u, v] = g.edges()[i];
        e.push_back({u, i, -1});
        e.push_back({v, i, +1});
    }
    return SignedIncidence(g.n_nodes(), g.n_edges(), std::move(e));
}

std::vector<int> canonical_cycle(const std::vector<int>& vertices) {
    const std::size_t n = vertices.size();
    if (n == 0) return {};
    std::vector<int> best;
    for (int dir = 0; dir < 2; ++dir) {
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<int> cand(n);
            for (std::size_t i = 0; i < n; ++i)
                cand[i] = dir == 0 ? vertices[(s + i) % n] : vertices[(s + n - i) % n];
            if (best.empty() || cand < best) best = std::move(cand);
        }
    }
    return best;
}

int CellComplex::dim() const {
    if (!rings.empty()) return 2;
    if (graph.n_edges() > 0) return 1;
    return graph.n_nodes() > 0 ? 0 : -1;
}

int CellComplex::n_cells(int k) const {
    switch (k) {
        case 0: return graph.n_nodes();
        case 1: return graph.n_edges();
        case 2: return static_cast<int>(rings.size());
        default: return 0;
    }
}

namespace {

void fill_ring_incidence(CellComplex& c) {
    std::vector<IncidenceEntry> e;
    c.ring_edges.clear();
    for (std::size_t r = 0; r < c.rings.size(); ++r) {
        const auto& cyc = c.rings[r];
        std::vector<int> ids;
        for (std::size_t i = 0; i < cyc.size(); ++i) {
            const int a = cyc[i], b = cyc[(i + 1) % cyc.size()];
            const int id = c.graph.edge_id(a, b);
            if (id < 0)
                throw std::invalid_argument("complex: ring uses missing edge (" + std::to_string(a) + "," +
                                            std::to_string(b) + ")");
            ids.push_back(id);
            e.push_back({id, static_cast<int>(r), a < b ? +1 : -1});
        }
        c.ring_edges.push_back(std::move(ids));
    }
    c.b2 = SignedIncidence(c.graph.n_edges(), static_cast<int>(c.rings.size()), std::move(e));
}

std::vector<int> edge_cycle_to_vertices(const Graph& g, const std::vector<int>& cyc) {
    const int n = static_cast<int>(cyc.size());
    if (n < 3) throw std::invalid_argument("complex: ring must have at least 3 edges");
    for (int id : cyc)
        if (id < 0 || id >= g.n_edges())
            throw std::invalid_argument("complex: ring references missing edge index " + std::to_string(id));
    auto [a0, b0] = g.edges()[cyc[0]];
    auto [a1, b1] = g.edges()[cyc[1]];
    int start;
    if (a0 != a1 && a0 != b1)
        start = a0;
    else if (b0 != a1 && b0 != b1)
        start = b0;
    else
        throw std::invalid_argument("complex: ring edges do not form a cycle");
    std::vector<int> verts{start};
    int cur = start;
    for (int i = 0; i < n; ++i) {
        auto [a, b] = g.edges()[cyc[i]];
        if (a == cur)
            cur = b;
        else if (b == cur)
            cur = a;
        else
            throw std::invalid_argument("complex: ring edges are not consecutive");
        if (i + 1 < n) verts.push_back(cur);
    }
    if (cur != start) throw std::invalid_argument("complex: ring is not closed");
    return verts;
}

}  // namespace

CellComplex complex_from_vertex_cycles(const Graph& graph, const std::vector<std::vector<int>>& cycles) {
    CellComplex c;
    c.graph = graph;
    c.b1 = graph_incidence(graph);
    for (const auto& cyc : cycles) {
        if (cyc.size() < 3) throw std::invalid_argument("complex: ring must have at least 3 vertices");
        std::vector<int> sorted = cyc;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("complex: ring repeats a vertex");
        c.rings.push_back(canonical_cycle(cyc));
    }
    fill_ring_incidence(c);
    validate_complex(c);
    return c;
}

CellComplex build_complex(const Graph& graph, const std::vector<std::vector<int>>& edge_cycles) {
    std::vector<std::vector<int>> cycles;
    for (const auto& ec : edge_cycles) cycles.push_back(edge_cycle_to_vertices(graph, ec));
    return complex_from_vertex_cycles(graph, cycles);
}

std::vector<std::int64_t> boundary_product(const SignedIncidence& b1, const SignedIncidence& b2) {
    if (b1.n_cols() != b2.n_rows()) throw std::invalid_argument("boundary_product: shape mismatch");
    std::vector<std::int64_t> out(std::size_t(b1.n_rows()) * b2.n_cols(), 0);
    for (int r = 0; r < b2.n_cols(); ++r) {
        auto [beg, end] = b2.column(r);
        for (auto it = beg; it != end; ++it) {
            auto [b, e] = b1.column(it->row);
            for (auto jt = b; jt != e; ++jt)
                out[std::size_t(jt->row) * b2.n_cols() + r] += std::int64_t(it->sign) * jt->sign;
        }
    }
    return out;
}

void validate_complex(const CellComplex& c) {
    const Graph& g = c.graph;
    if (c.b1.n_rows() != g.n_nodes() || c.b1.n_cols() != g.n_edges())
        throw std::invalid_argument("complex: B1 shape does not match cells");
    for (int e = 0; e < g.n_edges(); ++e) {
        auto [beg, end] = c.b1.column(e);
        if (end - beg != 2 || beg[0].sign + beg[1].sign != 0)
            throw std::invalid_argument("complex: edge column must hold one +1 and one -1");
    }
    if (c.ring_edges.size() != c.rings.size() || c.b2.n_cols() != c.n_rings() || c.b2.n_rows() != g.n_edges())
        throw std::invalid_argument("complex: B2 shape does not match cells");
    for (int r = 0; r < c.n_rings(); ++r) {
        const auto& cyc = c.rings[r];
        if (cyc.size() < 3 || cyc.size() != c.ring_edges[r].size())
            throw std::invalid_argument("complex: malformed ring " + std::to_string(r));
        for (std::size_t i = 0; i < cyc.size(); ++i) {
            const int id = c.ring_edges[r][i];
            if (id < 0 || id >= g.n_edges())
                throw std::invalid_argument("complex: ring " + std::to_string(r) + " boundary edge missing");
            auto [a, b] = g.edges()[id];
            const int x = cyc[i], y = cyc[(i + 1) % cyc.size()];
            if (!((a == x && b == y) || (a == y && b == x)))
                throw std::invalid_argument("complex: ring " + std::to_string(r) + " boundary edge mismatch");
        }
        auto [beg, end] = c.b2.column(r);
        if (end - beg != static_cast<std::ptrdiff_t>(cyc.size()))
            throw std::invalid_argument("complex: ring column nonzero count differs from ring size");
    }
    for (std::int64_t x : boundary_product(c.b1, c.b2))
        if (x != 0) throw std::invalid_argument("complex: B1 B2 != 0");
}

NeighborhoodIndex neighborhoods(const CellComplex& c) {
    NeighborhoodIndex nb;
    const Graph& g = c.graph;
    const int n0 = g.n_nodes(), n1 = g.n_edges(), n2 = c.n_rings();
    for (int k = 0; k < 3; ++k) {
        const int n = c.n_cells(k);
        nb.boundary[k].assign(n, {});
        nb.coboundary[k].assign(n, {});
        nb.upper[k].assign(n, {});
        nb.lower[k].assign(n, {});
    }
    // Boundary / co-boundary read straight off B1 and B2.
    for (const auto& e : c.b1.entries()) {
        nb.boundary[1][e.col].push_back(e.row);
        nb.coboundary[0][e.row].push_back(e.col);
    }
    for (const auto& e : c.b2.entries()) {
        nb.boundary[2][e.col].push_back(e.row);
        nb.coboundary[1][e.row].push_back(e.col);
    }
    for (int k = 0; k < 3; ++k) {
        for (auto& v : nb.boundary[k]) std::sort(v.begin(), v.end());
        for (auto& v : nb.coboundary[k]) std::sort(v.begin(), v.end());
    }
    // Upper: share a co-boundary cell. Lower: share a boundary cell.
    auto build = [&](int k, int n_k, std::array<std::vector<std::vector<int>>, 3>& via_of,
                     std::array<std::vector<std::vector<int>>, 3>& members_of, int k_via,
                     std::vector<std::vector<Neighbor>>& out) {
        for (int s = 0; s < n_k; ++s) {
            for (int d : via_of[k][s])
                for (int t : members_of[k_via][d])
                    if (t != s) out[s].push_back({t, d});
            std::sort(out[s].begin(), out[s].end());
        }
    };
    build(0, n0, nb.coboundary, nb.boundary, 1, nb.upper[0]);
    build(1, n1, nb.coboundary, nb.boundary, 2, nb.upper[1]);
    build(1, n1, nb.boundary, nb.coboundary, 0, nb.lower[1]);
    build(2, n2, nb.boundary, nb.coboundary, 1, nb.lower[2]);
    return nb;
}

std::vector<int> distinct_cells(const std::vector<Neighbor>& ns) {
    std::vector<int> out;
    for (const auto& n : ns) out.push_back(n.cell);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CellPermutation CellPermutation::identity(const CellComplex& c) {
    CellPermutation p;
    for (int k = 0; k < 3; ++k) {
        p.perm[k].resize(c.n_cells(k));
        std::iota(p.perm[k].begin(), p.perm[k].end(), 0);
    }
    return p;
}

CellPermutation CellPermutation::random(const CellComplex& c, Rng& rng) {
    CellPermutation p;
    for (int k = 0; k < 3; ++k) p.perm[k] = rng.permutation(c.n_cells(k));
    return p;
}

CellPermutation CellPermutation::inverse() const {
    CellPermutation q;
    for (int k = 0; k < 3; ++k) {
        q.perm[k].resize(perm[k].size());
        for (std::size_t i = 0; i < perm[k].size(); ++i) q.perm[k][perm[k][i]] = static_cast<int>(i);
    }
    return q;
}

CellPermutation compose(const CellPermutation& p, const CellPermutation& q) {
    CellPermutation r;
    for (int k = 0; k < 3; ++k) {
        if (p.perm[k].size() != q.perm[k].size()) throw std::invalid_argument("compose: size mismatch");
        r.perm[k].resize(q.perm[k].size());
        for (std::size_t i = 0; i < q.perm[k].size(); ++i) r.perm[k][i] = p.perm[k][q.perm[k][i]];
    }
    return r;
}

namespace {

void check_perm(const std::vector<int>& p, int n, int k) {
    if (static_cast<int>(p.size()) != n)
        throw std::invalid_argument("permute_complex: dimension " + std::to_string(k) + " permutation has size " +
                                    std::to_string(p.size()) + ", expected " + std::to_string(n));
    std::vector<char> seen(n, 0);
    for (int x : p) {
        if (x < 0 || x >= n || seen[x]) throw std::invalid_argument("permute_complex: not a bijection");
        seen[x] = 1;
    }
}

}  // namespace

CellComplex permute_complex(const CellComplex& c, const CellPermutation& p) {
    for (int k = 0; k < 3; ++k) check_perm(p.perm[k], c.n_cells(k), k);
    const auto& pv = p.perm[0];
    std::vector<Edge> edges(c.n_edges());
    for (int e = 0; e < c.n_edges(); ++e) {
        auto [u, v] = c.graph.edges()[e];
        int a = pv[u], b = pv[v];
        if (a > b) std::swap(a, b);
        edges[p.perm[1][e]] = {a, b};
    }
    Graph g = Graph::from_ordered_edges(c.n_nodes(), std::move(edges));
    std::vector<std::vector<int>> rings(c.n_rings());
    for (int r = 0; r < c.n_rings(); ++r) {
        std::vector<int> cyc;
        for (int v : c.rings[r]) cyc.push_back(pv[v]);
        rings[p.perm[2][r]] = std::move(cyc);
    }
    return complex_from_vertex_cycles(g, rings);
}

std::array<std::vector<int>, 3> orientation_flips(const CellComplex& c, const CellPermutation& p) {
    std::array<std::vector<int>, 3> flips;
    flips[0].assign(c.n_nodes(), 1);
    flips[1].assign(c.n_edges(), 1);
    flips[2].assign(c.n_rings(), 1);
    const auto& pv = p.perm[0];
    for (int e = 0; e < c.n_edges(); ++e) {
        auto [u, v] = c.graph.edges()[e];
        if (pv[u] > pv[v]) flips[1][p.perm[1][e]] = -1;
    }
    for (int r = 0; r < c.n_rings(); ++r) {
        std::vector<int> cyc;
        for (int v : c.rings[r]) cyc.push_back(pv[v]);
        const auto canon = canonical_cycle(cyc);
        // Same direction iff canon is a rotation of cyc.
        const std::size_t n = cyc.size();
        const auto start = std::find(cyc.begin(), cyc.end(), canon[0]) - cyc.begin();
        const bool same = cyc[(start + 1) % n] == canon[1];
        if (!same) flips[2][p.perm[2][r]] = -1;
    }
    return flips;
}

Matrix permute_rows(const Matrix& m, const std::vector<int>& perm) {
    if (perm.size() != m.rows()) throw std::invalid_argument("permute_rows: size mismatch");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto src = m.row_span(i);
        std::copy(src.begin(), src.end(), out.row_span(perm[i]).begin());
    }
    return out;
}

}  // namespace topox

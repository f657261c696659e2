#include "topox/lifting.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace topox {

namespace {

// DFS over paths start = s < p1 < ... constrained to vertices > s. A vertex can
// extend the path only if it touches no path vertex besides the tail (and s,
// which closes the cycle).
struct CycleSearch {
    const Graph& g;
    int max_len;
    int s = 0;
    std::vector<int> path;
    std::vector<int> blocked;  // number of path vertices (excluding tail) adjacent to v
    std::vector<char> on_path;
    std::vector<std::vector<int>> out;

    CycleSearch(const Graph& graph, int r) : g(graph), max_len(r), blocked(graph.n_nodes(), 0), on_path(graph.n_nodes(), 0) {}

    bool adjacent_to_s(int v) const { return g.has_edge(s, v); }

    void extend() {
        const int tail = path.back();
        for (int w : g.neighbors(tail)) {
            if (w <= s || on_path[w]) continue;
            // w may touch only the tail, and s when it closes the cycle.
            const int touches_inner = blocked[w] - (adjacent_to_s(w) ? 1 : 0);
            if (touches_inner > 0) continue;
            if (adjacent_to_s(w)) {
                if (path.size() >= 2 && path[1] < w) {
                    std::vector<int> cyc = path;
                    cyc.push_back(w);
                    out.push_back(cyc);
                }
                continue;
            }
            if (static_cast<int>(path.size()) + 1 >= max_len) continue;
            push(w);
            extend();
            pop();
        }
    }

    // The previous tail becomes an inner vertex once w is appended.
    void push(int w) {
        const int prev = path.back();
        for (int x : g.neighbors(prev)) blocked[x]++;
        path.push_back(w);
        on_path[w] = 1;
    }
    void pop() {
        const int w = path.back();
        path.pop_back();
        on_path[w] = 0;
        const int prev = path.back();
        for (int x : g.neighbors(prev)) blocked[x]--;
    }
};

}  // namespace

std::vector<std::vector<int>> chordless_cycles(const Graph& g, int max_len) {
    if (max_len < 3) throw std::invalid_argument("chordless_cycles: R must be >= 3");
    if (max_len > kMaxRingSize)
        throw std::invalid_argument("chordless_cycles: R must be <= " + std::to_string(kMaxRingSize));
    CycleSearch cs(g, max_len);
    for (int s = 0; s < g.n_nodes(); ++s) {
        cs.s = s;
        for (int p1 : g.neighbors(s)) {
            if (p1 <= s) continue;
            cs.path = {s, p1};
            cs.on_path[s] = cs.on_path[p1] = 1;
            // s itself is an inner vertex: its neighbours may only close the cycle,
            // which extend() accounts for by discounting adjacency to s.
            for (int x : g.neighbors(s)) cs.blocked[x]++;
            cs.extend();
            for (int x : g.neighbors(s)) cs.blocked[x]--;
            cs.on_path[s] = cs.on_path[p1] = 0;
        }
    }
    std::vector<std::vector<int>> res;
    for (auto& c : cs.out) res.push_back(canonical_cycle(c));
    std::sort(res.begin(), res.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    res.erase(std::unique(res.begin(), res.end()), res.end());
    return res;
}

std::vector<std::vector<int>> chordless_edge_cycles(const Graph& g, int max_len) {
    std::vector<std::vector<int>> out;
    for (const auto& cyc : chordless_cycles(g, max_len)) {
        std::vector<int> ids;
        for (std::size_t i = 0; i < cyc.size(); ++i) ids.push_back(g.edge_id(cyc[i], cyc[(i + 1) % cyc.size()]));
        out.push_back(std::move(ids));
    }
    return out;
}

CellComplex structural_lift(const Graph& g, int max_len) {
    return complex_from_vertex_cycles(g, chordless_cycles(g, max_len));
}

CellComplex clique_lift(const Graph& g, int max_dim) {
    if (max_dim != 2) throw std::invalid_argument("clique_lift: only K = 2 (triangles) is supported");
    std::vector<std::vector<int>> tris;
    for (auto [u, v] : g.edges())
        for (int w : g.neighbors(v))
            if (w > v && g.has_edge(u, w)) tris.push_back({u, v, w});
    std::sort(tris.begin(), tris.end());
    return complex_from_vertex_cycles(g, tris);
}

CellComplex lift(const Graph& g, const LiftConfig& cfg) {
    if (cfg.mode == LiftConfig::Mode::cliques) return clique_lift(g, cfg.max_clique_dim);
    return structural_lift(g, cfg.max_ring_size);
}

}  // namespace topox

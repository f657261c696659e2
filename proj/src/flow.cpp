#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "topox/complex_io.hpp"
#include "topox/errors.hpp"
#include "topox/rng.hpp"
#include "topox/synth.hpp"

namespace topox {

std::vector<double> path_cochain(const Graph& g, const std::vector<int>& path) {
    std::vector<double> x(g.n_edges(), 0.0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const int a = path[i], b = path[i + 1];
        const int e = g.edge_id(a, b);
        if (e < 0) throw std::invalid_argument("path_cochain: consecutive vertices are not adjacent");
        x[e] += a < b ? 1.0 : -1.0;
    }
    return x;
}

std::vector<int> shortest_path(const Graph& g, const std::vector<Point>& pts, int from, int to) {
    const int n = g.n_nodes();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> prev(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[from] = 0.0;
    pq.emplace(0.0, from);
    while (!pq.empty()) {
        auto [d, x] = pq.top();
        pq.pop();
        if (d > dist[x]) continue;
        if (x == to) break;
        for (int y : g.neighbors(x)) {
            const double nd = d + std::hypot(pts[x].x - pts[y].x, pts[x].y - pts[y].y);
            if (nd < dist[y]) {
                dist[y] = nd;
                prev[y] = x;
                pq.emplace(nd, y);
            }
        }
    }
    if (from != to && prev[to] < 0) return {};
    std::vector<int> path;
    for (int x = to; x != -1; x = prev[x]) path.push_back(x);
    std::reverse(path.begin(), path.end());
    return path;
}

namespace {

std::vector<int> loop_erase(const std::vector<int>& walk) {
    std::vector<int> out;
    for (int x : walk) {
        auto it = std::find(out.begin(), out.end(), x);
        if (it != out.end())
            out.erase(it + 1, out.end());
        else
            out.push_back(x);
    }
    return out;
}

int nearest_node(const std::vector<Point>& pts, const Graph& g, Point q) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n_nodes(); ++i) {
        if (g.degree(i) == 0) continue;
        const double d = std::hypot(pts[i].x - q.x, pts[i].y - q.y);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

bool active_part_connected(const Graph& g) {
    int isolated = 0;
    for (int i = 0; i < g.n_nodes(); ++i) isolated += g.degree(i) == 0;
    return g.n_components() - isolated == 1;
}

}  // namespace

FlowDataset make_flow_dataset(const FlowConfig& cfg, int n_train, int n_test, Rng& rng) {
    if (cfg.n_points < 50) throw ConfigError("flow: n_points must be at least 50");
    if (cfg.holes.size() != 2) throw ConfigError("flow: exactly two holes are required");
    FlowDataset ds;
    ds.config = cfg;
    std::vector<int> starts, ends;
    for (int attempt = 0;; ++attempt) {
        if (attempt >= cfg.max_retries) throw NumericError("flow: could not generate a usable complex");
        std::vector<Point> pts(cfg.n_points);
        for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
        DelaunayComplex dc;
        try {
            dc = delaunay_complex(pts, cfg.holes);
        } catch (const std::invalid_argument&) {
            continue;
        }
        const Graph& g = dc.complex.graph;
        if (!active_part_connected(g)) continue;
        starts.clear();
        ends.clear();
        for (int i = 0; i < g.n_nodes(); ++i) {
            if (g.degree(i) == 0) continue;
            if (pts[i].x <= cfg.corner && pts[i].y >= 1.0 - cfg.corner) starts.push_back(i);
            if (pts[i].x >= 1.0 - cfg.corner && pts[i].y <= cfg.corner) ends.push_back(i);
        }
        if (starts.empty() || ends.empty()) continue;
        ds.points = std::move(dc.points);
        ds.complex = std::make_shared<const CellComplex>(std::move(dc.complex));
        break;
    }
    const Graph& g = ds.complex->graph;
    constexpr double kPi = std::numbers::pi;
    for (int i = 0; i < n_train + n_test; ++i) {
        FlowInstance inst;
        inst.label = static_cast<int>(rng.below(2));
        const Disc& hole = cfg.holes[inst.label];
        // Far side of the hole: bottom-left quadrant for the first, top-right for the second.
        const double angle = (inst.label == 0 ? kPi : 0.0) + rng.uniform(0.0, kPi / 2.0);
        const double rad = hole.radius + cfg.waypoint_margin;
        const int way =
            nearest_node(ds.points, g, {hole.center.x + rad * std::cos(angle), hole.center.y + rad * std::sin(angle)});
        const int s = starts[rng.below(starts.size())];
        const int t = ends[rng.below(ends.size())];
        std::vector<int> walk = shortest_path(g, ds.points, s, way);
        std::vector<int> tail = shortest_path(g, ds.points, way, t);
        walk.insert(walk.end(), tail.begin() + 1, tail.end());
        inst.path = loop_erase(walk);
        inst.flow = path_cochain(g, inst.path);
        (i < n_train ? ds.train : ds.test).push_back(std::move(inst));
    }
    return ds;
}

std::string flow_dataset_json(const FlowDataset& d) {
    nlohmann::json j;
    j["reconstructed"] = "waypoint sampler: Dijkstra start->waypoint->end, waypoint on the far side of one hole";
    j["complex"] = complex_to_json(*d.complex);
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : d.points) pts.push_back({p.x, p.y});
    j["points"] = pts;
    nlohmann::json holes = nlohmann::json::array();
    for (const auto& h : d.config.holes) holes.push_back({{"x", h.center.x}, {"y", h.center.y}, {"radius", h.radius}});
    j["holes"] = holes;
    auto dump = [](const std::vector<FlowInstance>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& x : v) a.push_back({{"label", x.label}, {"path", x.path}});
        return a;
    };
    j["train"] = dump(d.train);
    j["test"] = dump(d.test);
    return j.dump(1);
}

}  // namespace topox

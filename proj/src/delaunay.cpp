#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "topox/lifting.hpp"

namespace topox {

double orient(const Point& a, const Point& b, const Point& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double in_circle(const Point& a, const Point& b, const Point& c, const Point& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Point circumcenter(const Point& a, const Point& b, const Point& c) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (d == 0.0) throw std::invalid_argument("circumcenter: degenerate triangle");
    const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
    return {(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
            (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
}

std::vector<std::vector<int>> delaunay_triangles(const std::vector<Point>& input) {
    const int n = static_cast<int>(input.size());
    if (n < 3) throw std::invalid_argument("delaunay: need at least 3 points");
    double minx = input[0].x, maxx = minx, miny = input[0].y, maxy = miny;
    for (const auto& p : input) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double extent = std::max(maxx - minx, maxy - miny);
    bool collinear = true;
    for (int i = 2; i < n && collinear; ++i)
        if (std::abs(orient(input[0], input[1], input[i])) > kInCircleTol * std::max(1.0, extent * extent))
            collinear = false;
    if (collinear || extent == 0.0) throw std::invalid_argument("delaunay: points are collinear");

    // Insert in lexicographic order so cocircular ties resolve deterministically.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return input[a].x != input[b].x ? input[a].x < input[b].x : input[a].y < input[b].y;
    });
    for (int i = 1; i < n; ++i)
        if (input[order[i]].x == input[order[i - 1]].x && input[order[i]].y == input[order[i - 1]].y)
            throw std::invalid_argument("delaunay: duplicate points");

    std::vector<Point> pts = input;
    const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy), big = 64.0 * extent;
    pts.push_back({cx - 2 * big, cy - big});
    pts.push_back({cx + 2 * big, cy - big});
    pts.push_back({cx, cy + 2 * big});

    using Tri = std::array<int, 3>;  // counter-clockwise
    std::vector<Tri> tris{{n, n + 1, n + 2}};
    for (int idx : order) {
        const Point& p = pts[idx];
        std::vector<Tri> keep;
        std::map<std::pair<int, int>, int> boundary;  // directed edge -> count
        for (const Tri& t : tris) {
            if (in_circle(pts[t[0]], pts[t[1]], pts[t[2]], p) > kInCircleTol) {
                for (int e = 0; e < 3; ++e) boundary[{t[e], t[(e + 1) % 3]}]++;
            } else {
                keep.push_back(t);
            }
        }
        if (boundary.empty()) throw std::runtime_error("delaunay: point not inside any circumcircle");
        for (const auto& [edge, count] : boundary) {
            // Interior edges of the cavity appear in both directions.
            if (boundary.count({edge.second, edge.first})) continue;
            keep.push_back({edge.first, edge.second, idx});
        }
        tris = std::move(keep);
    }
    std::vector<std::vector<int>> out;
    for (const Tri& t : tris) {
        if (t[0] >= n || t[1] >= n || t[2] >= n) continue;
        std::vector<int> v{t[0], t[1], t[2]};
        std::sort(v.begin(), v.end());
        out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

DelaunayComplex delaunay_complex(const std::vector<Point>& pts, const std::vector<Disc>& holes) {
    DelaunayComplex dc;
    dc.points = pts;
    dc.triangles = delaunay_triangles(pts);
    std::vector<std::vector<int>> kept;
    for (const auto& t : dc.triangles) {
        const Point cc = circumcenter(pts[t[0]], pts[t[1]], pts[t[2]]);
        bool in_hole = false;
        for (const auto& h : holes)
            if (std::hypot(cc.x - h.center.x, cc.y - h.center.y) < h.radius) in_hole = true;
        if (!in_hole) kept.push_back(t);
    }
    std::vector<Edge> edges;
    for (const auto& t : kept) {
        edges.emplace_back(t[0], t[1]);
        edges.emplace_back(t[1], t[2]);
        edges.emplace_back(t[0], t[2]);
    }
    Graph g = build_graph(static_cast<int>(pts.size()), edges);
    dc.complex = complex_from_vertex_cycles(g, kept);
    return dc;
}

}  // namespace topox

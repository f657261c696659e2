#pragma once

#include <vector>

#include "topox/complex.hpp"
#include "topox/complex_io.hpp"

namespace topox {

constexpr int kMaxRingSize = 12;

struct LiftConfig {
    enum class Mode { rings, cliques } mode = Mode::rings;
    int max_ring_size = 6;
    int max_clique_dim = 2;
};

// Induced cycles of length 3..R as canonical vertex cycles, sorted by length then lexicographically.
std::vector<std::vector<int>> chordless_cycles(const Graph& g, int max_len);
// The same cycles as ordered edge-index cycles.
std::vector<std::vector<int>> chordless_edge_cycles(const Graph& g, int max_len);

CellComplex structural_lift(const Graph& g, int max_len);
CellComplex clique_lift(const Graph& g, int max_dim = 2);
CellComplex lift(const Graph& g, const LiftConfig& cfg);

struct Disc {
    Point center;
    double radius;
};

struct DelaunayComplex {
    CellComplex complex;
    std::vector<Point> points;
    std::vector<std::vector<int>> triangles;  // vertex triples (sorted) before hole punching
};

constexpr double kInCircleTol = 1e-12;

// Bowyer-Watson triangulation; throws on fewer than 3 or all-collinear points.
std::vector<std::vector<int>> delaunay_triangles(const std::vector<Point>& pts);
// Triangulates, then drops triangles whose circumcenter lies in a hole disc and
// edges left without any remaining triangle. Nodes are kept.
DelaunayComplex delaunay_complex(const std::vector<Point>& pts, const std::vector<Disc>& holes = {});

Point circumcenter(const Point& a, const Point& b, const Point& c);
// > 0 when d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
double in_circle(const Point& a, const Point& b, const Point& c, const Point& d);
double orient(const Point& a, const Point& b, const Point& c);

}  // namespace topox

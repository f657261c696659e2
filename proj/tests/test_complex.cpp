#include <doctest.h>

#include "helpers.hpp"
#include "topox/complex_io.hpp"

using namespace topox;

namespace {

Graph p3() { return build_graph(3, {{0, 1}, {1, 2}}); }

CellComplex filled_triangle() { return structural_lift(cycle_graph(3), 3); }

CellComplex two_triangles() { return structural_lift(build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}), 4); }

}  // namespace

TEST_CASE("build_graph dedups and rejects bad input") {
    Graph g = p3();
    CHECK(g.n_nodes() == 3);
    CHECK(g.n_edges() == 2);
    CHECK(complete_graph(4).n_edges() == 6);
    CHECK(build_graph(3, {{1, 0}, {0, 1}}).n_edges() == 1);
    CHECK_THROWS_AS(build_graph(3, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(3, {{0, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(Graph::from_ordered_edges(3, {{0, 1}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("shift operators") {
    const Matrix l = shift_operator(p3(), ShiftKind::laplacian);
    CHECK(max_abs_diff(l, Matrix{{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}}) == 0.0);
    const Matrix s = shift_operator(build_graph(2, {{0, 1}}), ShiftKind::sym_norm);
    CHECK(max_abs_diff(s, Matrix{{0, 1}, {1, 0}}) == 0.0);
    CHECK_THROWS_AS(shift_operator(build_graph(3, {{0, 1}}), ShiftKind::sym_norm), std::invalid_argument);
    const Matrix rw = shift_operator(p3(), ShiftKind::rw_norm);
    CHECK(rw(1, 0) == doctest::Approx(0.5));
    CHECK(max_abs_diff(shift_operator_sparse(p3(), ShiftKind::sym_norm).dense(), shift_operator(p3(), ShiftKind::sym_norm)) <
          1e-15);
}

TEST_CASE("graph incidence convention and B B^T = L") {
    const SignedIncidence b = graph_incidence(build_graph(2, {{0, 1}}));
    CHECK(b.dense()(0, 0) == -1.0);
    CHECK(b.dense()(1, 0) == 1.0);
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        Graph g = testing::random_graph(8, 0.4, rng);
        const Matrix bd = graph_incidence(g).dense();
        CHECK(max_abs_diff(bd * bd.transpose(), shift_operator(g, ShiftKind::laplacian)) == 0.0);
    }
    const Matrix c3 = graph_incidence(cycle_graph(3)).dense();
    CHECK(c3.rows() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        int plus = 0, minus = 0;
        for (std::size_t r = 0; r < 3; ++r) {
            plus += c3(r, c) == 1.0;
            minus += c3(r, c) == -1.0;
        }
        CHECK(plus == 1);
        CHECK(minus == 1);
    }
}

TEST_CASE("build_complex examples") {
    CellComplex t = filled_triangle();
    CHECK(t.n_nodes() == 3);
    CHECK(t.n_edges() == 3);
    CHECK(t.n_rings() == 1);
    for (auto x : boundary_product(t.b1, t.b2)) CHECK(x == 0);
    CellComplex c4 = build_complex(cycle_graph(4), {});
    CHECK(c4.dim() == 1);
    CellComplex k4 = structural_lift(complete_graph(4), 6);
    CHECK(k4.n_rings() == 4);
    auto nb = neighborhoods(k4);
    for (int e = 0; e < 6; ++e) CHECK(nb.coboundary[1][e].size() == 2);
}

TEST_CASE("build_complex rejects malformed rings") {
    Graph c4 = cycle_graph(4);
    CHECK_THROWS_AS(build_complex(c4, {{0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(build_complex(c4, {{0, 1, 9}}), std::invalid_argument);
    CHECK_THROWS_AS(complex_from_vertex_cycles(c4, {{0, 1, 2}}), std::invalid_argument);
}

TEST_CASE("ring orientation follows traversal") {
    CellComplex t = filled_triangle();
    const Matrix b2 = t.b2.dense();
    // canonical cycle (0,1,2): edges 0-1 and 1-2 traversed low->high, 2-0 high->low
    const int e01 = t.graph.edge_id(0, 1), e12 = t.graph.edge_id(1, 2), e02 = t.graph.edge_id(0, 2);
    CHECK(b2(e01, 0) == 1.0);
    CHECK(b2(e12, 0) == 1.0);
    CHECK(b2(e02, 0) == -1.0);
    CHECK(canonical_cycle({2, 0, 1}) == std::vector<int>{0, 1, 2});
    CHECK(canonical_cycle({0, 3, 2, 1}) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("neighborhood examples") {
    CellComplex t = filled_triangle();
    auto nb = neighborhoods(t);
    for (int e = 0; e < 3; ++e) {
        CHECK(nb.boundary[1][e].size() == 2);
        CHECK(nb.coboundary[1][e] == std::vector<int>{0});
        CHECK(distinct_cells(nb.upper[1][e]).size() == 2);
        CHECK(distinct_cells(nb.lower[1][e]).size() == 2);
    }
    CellComplex iso = build_complex(build_graph(3, {{0, 1}}), {});
    auto ni = neighborhoods(iso);
    CHECK(ni.coboundary[0][2].empty());
    CHECK(ni.upper[0][2].empty());

    CellComplex sq = two_triangles();
    auto ns = neighborhoods(sq);
    const int diag = sq.graph.edge_id(0, 2);
    CHECK(ns.coboundary[1][diag].size() == 2);
    CHECK(distinct_cells(ns.lower[1][diag]).size() == 4);
    // each ring has exactly one lower neighbour, mediated by the diagonal
    for (int r = 0; r < 2; ++r) {
        REQUIRE(ns.lower[2][r].size() == 1);
        CHECK(ns.lower[2][r][0].cell == 1 - r);
        CHECK(ns.lower[2][r][0].via == diag);
    }
}

TEST_CASE("neighborhood relations are symmetric and dual") {
    Rng rng(21);
    for (int t = 0; t < 30; ++t) {
        CellComplex c = testing::random_complex(rng);
        auto nb = neighborhoods(c);
        for (int k = 0; k < 3; ++k)
            for (int s = 0; s < c.n_cells(k); ++s) {
                for (const auto& n : nb.upper[k][s]) {
                    Neighbor back{s, n.via};
                    auto& list = nb.upper[k][n.cell];
                    CHECK(std::find(list.begin(), list.end(), back) != list.end());
                }
                for (const auto& n : nb.lower[k][s]) {
                    Neighbor back{s, n.via};
                    auto& list = nb.lower[k][n.cell];
                    CHECK(std::find(list.begin(), list.end(), back) != list.end());
                }
                if (k > 0)
                    for (int b : nb.boundary[k][s]) {
                        auto& co = nb.coboundary[k - 1][b];
                        CHECK(std::find(co.begin(), co.end(), s) != co.end());
                    }
            }
    }
}

TEST_CASE("removing a face breaks validation") {
    CellComplex t = filled_triangle();
    CellComplex broken = t;
    std::vector<IncidenceEntry> entries;
    for (const auto& e : t.b2.entries())
        if (e.row != 0) entries.push_back(e);
    broken.b2 = SignedIncidence(t.b2.n_rows(), t.b2.n_cols(), entries);
    CHECK_THROWS_AS(validate_complex(broken), std::invalid_argument);
    CHECK_NOTHROW(validate_complex(t));
}

TEST_CASE("permutations form a group action") {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        CellComplex c = testing::random_complex(rng);
        CHECK(permute_complex(c, CellPermutation::identity(c)) == c);
        auto p = CellPermutation::random(c, rng);
        auto q = CellPermutation::random(c, rng);
        CHECK(permute_complex(permute_complex(c, p), p.inverse()) == c);
        CellComplex pq = permute_complex(permute_complex(c, q), p);
        CHECK(permute_complex(c, compose(p, q)) == pq);
        CHECK_NOTHROW(validate_complex(pq));
    }
}

TEST_CASE("swapping P3 endpoints swaps incidence rows") {
    CellComplex c = build_complex(p3(), {});
    CellPermutation p = CellPermutation::identity(c);
    p.perm[0] = {2, 1, 0};
    CellComplex q = permute_complex(c, p);
    const Matrix b = c.b1.dense(), bq = q.b1.dense();
    auto flips = orientation_flips(c, p);
    for (int e = 0; e < 2; ++e) {
        const int ne = p.perm[1][e];
        for (int v = 0; v < 3; ++v) CHECK(bq(p.perm[0][v], ne) == b(v, e) * flips[1][ne]);
    }
}

TEST_CASE("complex JSON round trip") {
    CellComplex k4 = structural_lift(complete_graph(4), 4);
    auto j = complex_to_json(k4);
    CellComplex back = complex_from_json(j);
    CHECK(back == k4);
    CHECK(parse_edge_list("# c\n0 1\n1 2\n").n_edges() == 2);
}

TEST_CASE("disjoint union offsets nodes") {
    Graph a = p3(), b = cycle_graph(3);
    Graph u = disjoint_union({&a, &b});
    CHECK(u.n_nodes() == 6);
    CHECK(u.n_edges() == 5);
    CHECK(u.has_edge(3, 4));
    CHECK(u.n_components() == 2);
}

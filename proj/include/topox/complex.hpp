#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "topox/kernels.hpp"
#include "topox/matrix.hpp"

namespace topox {

class Rng;

using Edge = std::pair<int, int>;

// Simple undirected graph. Edges are stored with u < v; edge index = position.
class Graph {
public:
    Graph() = default;
    // Keeps the given edge order (used by permutations); validates everything else.
    static Graph from_ordered_edges(int n_nodes, std::vector<Edge> edges);

    int n_nodes() const { return n_nodes_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    const std::vector<int>& incident_edges(int v) const { return inc_[v]; }
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }
    int min_degree() const;
    bool has_edge(int u, int v) const { return edge_id(u, v) >= 0; }
    int edge_id(int u, int v) const;

    std::vector<int> bfs_distances(int src) const;  // -1 when unreachable
    int n_components() const;
    bool is_connected() const { return n_nodes_ > 0 && n_components() == 1; }

    bool operator==(const Graph& o) const { return n_nodes_ == o.n_nodes_ && edges_ == o.edges_; }

private:
    int n_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;  // sorted neighbor lists
    std::vector<std::vector<int>> inc_;  // incident edge ids, sorted by neighbor
};

// Deduplicates and sorts the edge list.
Graph build_graph(int n_nodes, std::vector<Edge> edges);
Graph disjoint_union(const std::vector<const Graph*>& parts);

enum class ShiftKind { adjacency, sym_norm, rw_norm, laplacian, sym_norm_laplacian };
ShiftKind parse_shift_kind(const std::string& s);
std::string to_string(ShiftKind k);

Matrix adjacency_matrix(const Graph& g);
Matrix shift_operator(const Graph& g, ShiftKind kind);
SparseMatrix shift_operator_sparse(const Graph& g, ShiftKind kind);

struct IncidenceEntry {
    int row;
    int col;
    int sign;  // -1 or +1
    bool operator==(const IncidenceEntry&) const = default;
};

// Sparse signed boundary matrix, canonical order: by column, then row.
class SignedIncidence {
public:
    SignedIncidence() = default;
    SignedIncidence(int n_rows, int n_cols, std::vector<IncidenceEntry> entries);

    int n_rows() const { return n_rows_; }
    int n_cols() const { return n_cols_; }
    const std::vector<IncidenceEntry>& entries() const { return entries_; }
    // Entries of column c as a contiguous range.
    std::pair<const IncidenceEntry*, const IncidenceEntry*> column(int c) const;

    Matrix dense() const;
    SparseMatrix sparse() const;
    bool operator==(const SignedIncidence& o) const = default;

private:
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<IncidenceEntry> entries_;
    std::vector<std::size_t> col_ptr_;
};

SignedIncidence graph_incidence(const Graph& g);

// Lexicographically smallest rotation of the cycle in either direction.
std::vector<int> canonical_cycle(const std::vector<int>& vertices);

// 2-dimensional regular cell complex. Rings are canonical vertex cycles; their
// orientation is the stored traversal order.
struct CellComplex {
    Graph graph;
    std::vector<std::vector<int>> rings;       // vertex cycles
    std::vector<std::vector<int>> ring_edges;  // edge ids along the traversal
    SignedIncidence b1;
    SignedIncidence b2;

    int dim() const;
    int n_cells(int k) const;
    int n_nodes() const { return graph.n_nodes(); }
    int n_edges() const { return graph.n_edges(); }
    int n_rings() const { return static_cast<int>(rings.size()); }
    bool operator==(const CellComplex& o) const { return graph == o.graph && rings == o.rings; }
};

// Rings are given as ordered cycles of edge indices into graph.edges().
CellComplex build_complex(const Graph& graph, const std::vector<std::vector<int>>& edge_cycles);
// Rings given as vertex cycles (consecutive vertices adjacent, closing edge implied).
CellComplex complex_from_vertex_cycles(const Graph& graph, const std::vector<std::vector<int>>& cycles);
// Throws std::invalid_argument if closure, ring shape, incidence signs or B1 B2 = 0 fail.
void validate_complex(const CellComplex& c);
// Integer product B1 * B2 as dense counts (all zero on a valid complex).
std::vector<std::int64_t> boundary_product(const SignedIncidence& b1, const SignedIncidence& b2);

struct Neighbor {
    int cell;
    int via;  // mediating co-boundary (upper) or boundary (lower) cell
    auto operator<=>(const Neighbor&) const = default;
};

struct NeighborhoodIndex {
    std::array<std::vector<std::vector<int>>, 3> boundary;
    std::array<std::vector<std::vector<int>>, 3> coboundary;
    std::array<std::vector<std::vector<Neighbor>>, 3> upper;
    std::array<std::vector<std::vector<Neighbor>>, 3> lower;
};

NeighborhoodIndex neighborhoods(const CellComplex& c);
// Distinct neighbor cells, dropping mediator multiplicity.
std::vector<int> distinct_cells(const std::vector<Neighbor>& ns);

// perm[k][old index] = new index.
struct CellPermutation {
    std::array<std::vector<int>, 3> perm;
    static CellPermutation identity(const CellComplex& c);
    static CellPermutation random(const CellComplex& c, Rng& rng);
    CellPermutation inverse() const;
};
// (p after q): apply q first, then p.
CellPermutation compose(const CellPermutation& p, const CellPermutation& q);
CellComplex permute_complex(const CellComplex& c, const CellPermutation& p);
// Per-cell sign (indexed by new position) recording orientation flips caused by
// re-canonicalization: B_k(permuted) = P B_k P^T diag(flips[k]) up to row flips of dim k-1.
std::array<std::vector<int>, 3> orientation_flips(const CellComplex& c, const CellPermutation& p);
// Rows of m moved to new positions: out[perm[i]] = m[i].
Matrix permute_rows(const Matrix& m, const std::vector<int>& perm);

}  // namespace topox

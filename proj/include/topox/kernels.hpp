#pragma once

#include <cstddef>
#include <vector>

#include "topox/matrix.hpp"

namespace topox {

// Compressed sparse row matrix; built once, then read-only.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> vals;

    struct Entry {
        std::size_t row, col;
        double val;
    };
    // Duplicate (row, col) entries are summed.
    static SparseMatrix from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries);
    static SparseMatrix from_dense(const Matrix& m, double drop_tol = 0.0);
    SparseMatrix transpose() const;
    Matrix dense() const;
    std::size_t nnz() const { return vals.size(); }
};

namespace kernels {

// Thread count used by the parallel kernels; TOPOX_THREADS caps it when set.
int max_threads();
void set_max_threads(int n);

// Keeps freed matrix buffers in the heap instead of returning them to the OS
// (glibc only; no-op elsewhere). Training loops allocate the same shapes every step.
void retain_heap();

Matrix matmul(const Matrix& a, const Matrix& b);     // A B
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // A^T B
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // A B^T
Matrix spmm(const SparseMatrix& s, const Matrix& h);  // S H
// R_ij = P_ii + P_jj - 2 P_ij for a symmetric P (resistance from a Laplacian pseudoinverse).
Matrix pairwise_resistance(const Matrix& pinv);

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix spmm(const SparseMatrix& s, const Matrix& h);
Matrix pairwise_resistance(const Matrix& pinv);
}  // namespace serial

}  // namespace kernels
}  // namespace topox

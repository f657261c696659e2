#include "topox/kernels.hpp"

#include <omp.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace topox {

SparseMatrix SparseMatrix::from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix s;
    s.rows = rows;
    s.cols = cols;
    s.row_ptr.assign(rows + 1, 0);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& e = entries[i];
        if (e.row >= rows || e.col >= cols) throw std::out_of_range("SparseMatrix: entry out of range");
        if (!s.col_idx.empty() && i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
            s.vals.back() += e.val;
            continue;
        }
        s.col_idx.push_back(e.col);
        s.vals.push_back(e.val);
        s.row_ptr[e.row + 1]++;
    }
    for (std::size_t r = 0; r < rows; ++r) s.row_ptr[r + 1] += s.row_ptr[r];
    return s;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& m, double drop_tol) {
    std::vector<Entry> e;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (std::abs(m(r, c)) > drop_tol) e.push_back({r, c, m(r, c)});
    return from_entries(m.rows(), m.cols(), std::move(e));
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<Entry> e;
    e.reserve(nnz());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) e.push_back({col_idx[k], r, vals[k]});
    return from_entries(cols, rows, std::move(e));
}

Matrix SparseMatrix::dense() const {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) m(r, col_idx[k]) += vals[k];
    return m;
}

namespace kernels {

namespace {

int g_threads = -1;

int threads_from_env() {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("TOPOX_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(n, 1);
}

// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = 1u << 15;

void check(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok) throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

int max_threads() {
    if (g_threads < 0) g_threads = threads_from_env();
    return g_threads;
}

void set_max_threads(int n) { g_threads = std::max(1, n); }

void retain_heap() {
#if defined(__GLIBC__)
    static const bool once = [] {
        mallopt(M_MMAP_THRESHOLD, 256 << 20);
        mallopt(M_TRIM_THRESHOLD, 512 << 20);
        return true;
    }();
    (void)once;
#endif
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.rows(), "matmul", a, b);
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Matrix c(n, m);
    const double* A = a.data();
    const double* B = b.data();
    double* C = c.data();
    const bool par = n * k * m >= kParallelWork && max_threads() > 1;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = C + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = A[i * k + p];
            if (aip == 0.0) continue;
            const double* bp = B + p * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check(a.rows() == b.rows(), "matmul_tn", a, b);
    const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
    Matrix c(n, m);
    const double* A = a.data();
    const double* B = b.data();
    double* C = c.data();
    const bool par = n * k * m >= kParallelWork && max_threads() > 1;
    // Each thread owns a block of output rows, so the p-loop stays outside without races.
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = C + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double api = A[p * n + i];
            if (api == 0.0) continue;
            const double* bp = B + p * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.cols(), "matmul_nt", a, b);
    // Row-streaming over an explicit transpose vectorizes; a per-entry dot product does not.
    return matmul(a, b.transpose());
}

Matrix spmm(const SparseMatrix& s, const Matrix& h) {
    if (s.cols != h.rows()) throw std::invalid_argument("spmm: shape mismatch");
    const std::size_t m = h.cols();
    Matrix out(s.rows, m);
    const bool par = s.nnz() * m >= kParallelWork && max_threads() > 1;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
    for (std::size_t r = 0; r < s.rows; ++r) {
        double* o = out.data() + r * m;
        for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
            const double v = s.vals[k];
            const double* hr = h.data() + s.col_idx[k] * m;
            for (std::size_t j = 0; j < m; ++j) o[j] += v * hr[j];
        }
    }
    return out;
}

Matrix pairwise_resistance(const Matrix& pinv) {
    if (pinv.rows() != pinv.cols()) throw std::invalid_argument("pairwise_resistance: not square");
    const std::size_t n = pinv.rows();
    Matrix r(n, n);
    const bool par = n * n >= kParallelWork && max_threads() > 1;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
    return r;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.rows(), "matmul", a, b);
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
            c(i, j) = s;
        }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) { return matmul(a.transpose(), b); }
Matrix matmul_nt(const Matrix& a, const Matrix& b) { return matmul(a, b.transpose()); }

Matrix spmm(const SparseMatrix& s, const Matrix& h) { return matmul(s.dense(), h); }

Matrix pairwise_resistance(const Matrix& pinv) {
    const std::size_t n = pinv.rows();
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
    return r;
}

}  // namespace serial
}  // namespace kernels
}  // namespace topox

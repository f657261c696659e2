#include "topox/spectral.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "topox/errors.hpp"
#include "topox/kernels.hpp"

#include <Eigen/Eigenvalues>

namespace topox {

int SpectralDecomposition::kernel_dim(double cutoff) const {
    int k = 0;
    for (double v : values)
        if (std::abs(v) < cutoff) ++k;
    return k;
}

SpectralDecomposition eigh_jacobi(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eigh: matrix is not square " + m.shape_str());
    if (!is_symmetric(m, 1e-10)) throw std::invalid_argument("eigh: matrix is not symmetric (tol 1e-10)");
    const std::size_t n = m.rows();
    Matrix a = m;
    // Symmetrize exactly so row and column updates stay consistent.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
    Matrix vt = Matrix::identity(n);  // rows are eigenvectors

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    // Entries below this cannot push the off-diagonal norm above tol.
    const double skip = n > 1 ? tol / static_cast<double>(n) : tol;
    int sweep = 0;
    double* A = a.data();
    double* V = vt.data();
    while (off_norm() > tol) {
        if (++sweep > kEighMaxSweeps)
            throw NumericError("eigh: no convergence after " + std::to_string(kEighMaxSweeps) + " sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = A[p * n + q];
                if (std::abs(apq) < skip) continue;
                const double app = A[p * n + p], aqq = A[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                double* rp = A + p * n;
                double* rq = A + q * n;
                // Off-block entries of rows p, q are final after the left rotation;
                // mirror them into columns p, q, then set the 2x2 block directly.
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = rp[k], akq = rq[k];
                    rp[k] = c * akp - s * akq;
                    rq[k] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    A[k * n + p] = rp[k];
                    A[k * n + q] = rq[k];
                }
                rp[p] = app - t * apq;
                rq[q] = aqq + t * apq;
                rp[q] = rq[p] = 0.0;
                double* vp = V + p * n;
                double* vq = V + q * n;
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = vp[k], y = vq[k];
                    vp[k] = c * x - s * y;
                    vq[k] = s * x + c * y;
                }
            }
        }
    }
    SpectralDecomposition d;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    d.values.resize(n);
    d.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        d.values[c] = a(order[c], order[c]);
        for (std::size_t r = 0; r < n; ++r) d.vectors(r, c) = vt(order[c], r);
    }
    return d;
}

}  // namespace topox

namespace topox {

SpectralDecomposition eigh_tridiagonal(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eigh: matrix is not square " + m.shape_str());
    if (!is_symmetric(m, 1e-10)) throw std::invalid_argument("eigh: matrix is not symmetric (tol 1e-10)");
    const Eigen::Index n = static_cast<Eigen::Index>(m.rows());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) throw NumericError("eigh: tridiagonal QR did not converge");
    SpectralDecomposition d;
    d.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    d.vectors = Matrix(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) d.vectors(i, j) = solver.eigenvectors()(i, j);
    return d;
}

SpectralDecomposition eigh(const Matrix& m, double tol) {
    if (m.rows() > kJacobiMaxDim) return eigh_tridiagonal(m);
    return eigh_jacobi(m, tol);
}

Matrix normalized_laplacian(const Graph& g) { return shift_operator(g, ShiftKind::sym_norm_laplacian); }

SpectralGap spectral_gap(const Graph& g) {
    if (g.n_nodes() < 2) throw std::invalid_argument("spectral_gap: need at least 2 nodes");
    const auto d = eigh(normalized_laplacian(g));
    SpectralGap gap;
    gap.lambda1 = d.values[1];
    gap.disconnected = std::abs(d.values[1]) < kKernelCutoff;
    return gap;
}

std::pair<double, double> cheeger_bounds(const Graph& g) {
    const SpectralGap gap = spectral_gap(g);
    if (gap.disconnected) throw std::invalid_argument("cheeger_bounds: graph is disconnected");
    return {gap.lambda1 / 2.0, std::sqrt(2.0 * gap.lambda1)};
}

double cheeger_constant_exact(const Graph& g) {
    const int n = g.n_nodes();
    if (n > kCheegerMaxNodes)
        throw std::invalid_argument("cheeger_constant_exact: at most " + std::to_string(kCheegerMaxNodes) + " nodes");
    if (n < 2) throw std::invalid_argument("cheeger_constant_exact: need at least 2 nodes");
    double total = 0.0;
    for (int v = 0; v < n; ++v) total += g.degree(v);
    double best = std::numeric_limits<double>::infinity();
    // Node n-1 fixed outside U: each cut is visited once.
    const std::uint32_t limit = 1u << (n - 1);
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
        double vol = 0.0, cut = 0.0;
        for (int v = 0; v < n; ++v)
            if (mask >> v & 1u) vol += g.degree(v);
        for (auto [u, v] : g.edges())
            if (((mask >> u) & 1u) != ((mask >> v) & 1u)) cut += 1.0;
        const double denom = std::min(vol, total - vol);
        if (denom <= 0.0) {
            if (cut == 0.0) continue;
        }
        best = std::min(best, denom > 0.0 ? cut / denom : std::numeric_limits<double>::infinity());
    }
    return best;
}

std::vector<double> gft(const std::vector<double>& x, const SpectralDecomposition& d) {
    if (x.size() != d.vectors.rows()) throw std::invalid_argument("gft: dimension mismatch");
    const std::size_t n = d.vectors.cols();
    std::vector<double> out(n, 0.0);
    for (std::size_t r = 0; r < x.size(); ++r)
        for (std::size_t c = 0; c < n; ++c) out[c] += d.vectors(r, c) * x[r];
    return out;
}

std::vector<double> igft(const std::vector<double>& xhat, const SpectralDecomposition& d) {
    if (xhat.size() != d.vectors.cols()) throw std::invalid_argument("igft: dimension mismatch");
    return d.vectors * xhat;
}

Matrix polynomial_filter(const Matrix& x, const Matrix& s, const std::vector<double>& coeffs) {
    if (s.rows() != s.cols() || s.cols() != x.rows()) throw std::invalid_argument("polynomial_filter: shape mismatch");
    Matrix out(x.rows(), x.cols());
    Matrix power = x;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        if (t > 0) power = kernels::matmul(s, power);
        out += power * coeffs[t];
    }
    return out;
}

Matrix polynomial_filter(const Matrix& x, const SparseMatrix& s, const std::vector<double>& coeffs) {
    if (s.rows != s.cols || s.cols != x.rows()) throw std::invalid_argument("polynomial_filter: shape mismatch");
    Matrix out(x.rows(), x.cols());
    Matrix power = x;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
        if (t > 0) power = kernels::spmm(s, power);
        out += power * coeffs[t];
    }
    return out;
}

HodgeLaplacians hodge_laplacians(const CellComplex& c) {
    HodgeLaplacians h;
    const Matrix b1 = c.b1.dense();
    const Matrix b2 = c.b2.dense();
    h.l0 = kernels::matmul_nt(b1, b1);
    h.l1_down = kernels::matmul_tn(b1, b1);
    h.l1_up = kernels::matmul_nt(b2, b2);
    h.l1 = h.l1_down + h.l1_up;
    h.l2 = kernels::matmul_tn(b2, b2);
    return h;
}

SparseMatrix hodge_l1_sparse(const CellComplex& c) {
    std::vector<SparseMatrix::Entry> e;
    // L1_down: edges sharing a node; L1_up: edges sharing a ring.
    for (int v = 0; v < c.n_nodes(); ++v) {
        std::vector<std::pair<int, int>> col;  // (edge, sign)
        for (int id : c.graph.incident_edges(v)) col.emplace_back(id, c.graph.edges()[id].first == v ? -1 : 1);
        for (auto [a, sa] : col)
            for (auto [b, sb] : col) e.push_back({std::size_t(a), std::size_t(b), double(sa * sb)});
    }
    for (int r = 0; r < c.n_rings(); ++r) {
        auto [beg, end] = c.b2.column(r);
        for (auto i = beg; i != end; ++i)
            for (auto j = beg; j != end; ++j) e.push_back({std::size_t(i->row), std::size_t(j->row), double(i->sign * j->sign)});
    }
    return SparseMatrix::from_entries(c.n_edges(), c.n_edges(), std::move(e));
}

namespace {

Matrix select_columns(const SpectralDecomposition& d, bool above, std::vector<double>* vals) {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < d.values.size(); ++i)
        if ((std::abs(d.values[i]) >= kKernelCutoff) == above) cols.push_back(i);
    Matrix out(d.vectors.rows(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t r = 0; r < out.rows(); ++r) out(r, j) = d.vectors(r, cols[j]);
        if (vals) vals->push_back(d.values[cols[j]]);
    }
    return out;
}

std::vector<double> project(const Matrix& basis, const std::vector<double>& x) {
    std::vector<double> coef(basis.cols(), 0.0);
    for (std::size_t r = 0; r < basis.rows(); ++r)
        for (std::size_t c = 0; c < basis.cols(); ++c) coef[c] += basis(r, c) * x[r];
    return basis * coef;
}

}  // namespace

HodgeSpectra hodge_spectra(const CellComplex& c) {
    const HodgeLaplacians h = hodge_laplacians(c);
    HodgeSpectra s;
    s.down = eigh(h.l1_down);
    s.up = eigh(h.l1_up);
    s.full = eigh(h.l1);
    s.irrotational_basis = select_columns(s.down, true, &s.irrotational_values);
    s.solenoidal_basis = select_columns(s.up, true, &s.solenoidal_values);
    s.harmonic_basis = select_columns(s.full, false, nullptr);
    s.lambda_max = s.full.values.empty() ? 0.0 : s.full.values.back();
    return s;
}

const HodgeSpectra& HodgeCache::get() const {
    std::call_once(once_, [this] { data_ = hodge_spectra(*c_); });
    return data_;
}

HodgeSplit hodge_decompose(const std::vector<double>& x, const HodgeSpectra& s) {
    if (x.size() != s.full.vectors.rows()) throw std::invalid_argument("hodge_decompose: cochain size mismatch");
    HodgeSplit out;
    out.irrotational = project(s.irrotational_basis, x);
    out.solenoidal = project(s.solenoidal_basis, x);
    out.harmonic = project(s.harmonic_basis, x);
    return out;
}

HodgeSplit hodge_decompose(const std::vector<double>& x, const CellComplex& c) {
    return hodge_decompose(x, hodge_spectra(c));
}

Matrix harmonic_projector(const HodgeSpectra& s, const Matrix& l1, const HarmonicMode& mode) {
    const std::size_t n = l1.rows();
    if (mode.kind == HarmonicMode::Kind::exact)
        return kernels::matmul_nt(s.harmonic_basis, s.harmonic_basis);
    if (mode.k_h < 0) throw std::invalid_argument("harmonic_projector: K_h must be >= 0");
    double eps = mode.eps;
    if (eps <= 0.0) {
        if (s.lambda_max <= 0.0) return Matrix::identity(n);
        eps = 1.0 / s.lambda_max;
    }
    if (s.lambda_max > 0.0 && eps > 2.0 / s.lambda_max * (1.0 + 1e-12))
        throw std::invalid_argument("harmonic_projector: eps outside (0, 2/lambda_max]");
    Matrix base = Matrix::identity(n) - l1 * eps;
    Matrix result = Matrix::identity(n);
    for (int k = mode.k_h; k > 0; k >>= 1) {
        if (k & 1) result = kernels::matmul(result, base);
        if (k > 1) base = kernels::matmul(base, base);
    }
    return result;
}

Matrix harmonic_projector(const CellComplex& c, const HarmonicMode& mode) {
    return harmonic_projector(hodge_spectra(c), hodge_laplacians(c).l1, mode);
}

Matrix apply_harmonic_approx(const SparseMatrix& l1, const Matrix& x, double eps, int k_h) {
    Matrix y = x;
    for (int k = 0; k < k_h; ++k) {
        Matrix ly = kernels::spmm(l1, y);
        y -= ly * eps;
    }
    return y;
}

std::vector<double> simplicial_filter(const std::vector<double>& x, const SimplicialFilterWeights& w,
                                      const CellComplex& c) {
    if (static_cast<int>(x.size()) != c.n_edges()) throw std::invalid_argument("simplicial_filter: size mismatch");
    const HodgeLaplacians h = hodge_laplacians(c);
    const Matrix xv = Matrix::column(x);
    std::vector<double> down{0.0}, up{0.0};
    down.insert(down.end(), w.down.begin(), w.down.end());
    up.insert(up.end(), w.up.begin(), w.up.end());
    Matrix out = polynomial_filter(xv, h.l1_down, down) + polynomial_filter(xv, h.l1_up, up);
    if (w.harmonic != 0.0) {
        const HodgeSpectra s = hodge_spectra(c);
        const auto harm = project(s.harmonic_basis, x);
        for (std::size_t i = 0; i < x.size(); ++i) out(i, 0) += w.harmonic * harm[i];
    }
    return out.col_vector(0);
}

namespace {

double response(const std::vector<double>& w, double lambda) {
    double r = 0.0, pw = 1.0;
    for (double wk : w) {
        pw *= lambda;
        r += wk * pw;
    }
    return r;
}

}  // namespace

std::vector<double> simplicial_filter_spectral(const std::vector<double>& x, const SimplicialFilterWeights& w,
                                               const HodgeSpectra& s) {
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    auto accumulate = [&](const Matrix& basis, const std::vector<double>* vals, const std::vector<double>* wts,
                          double flat) {
        for (std::size_t j = 0; j < basis.cols(); ++j) {
            double coef = 0.0;
            for (std::size_t r = 0; r < n; ++r) coef += basis(r, j) * x[r];
            const double gain = vals ? response(*wts, (*vals)[j]) : flat;
            for (std::size_t r = 0; r < n; ++r) out[r] += gain * coef * basis(r, j);
        }
    };
    accumulate(s.irrotational_basis, &s.irrotational_values, &w.down, 0.0);
    accumulate(s.solenoidal_basis, &s.solenoidal_values, &w.up, 0.0);
    accumulate(s.harmonic_basis, nullptr, nullptr, w.harmonic);
    return out;
}

Matrix hodge_eigenbasis(const HodgeSpectra& s) {
    const std::size_t n = s.full.vectors.rows();
    Matrix u(n, n);
    std::size_t col = 0;
    for (const Matrix* b : {&s.irrotational_basis, &s.solenoidal_basis, &s.harmonic_basis})
        for (std::size_t j = 0; j < b->cols(); ++j, ++col) {
            if (col >= n) throw NumericError("hodge_eigenbasis: subspace dimensions exceed edge count");
            for (std::size_t r = 0; r < n; ++r) u(r, col) = (*b)(r, j);
        }
    if (col != n) throw NumericError("hodge_eigenbasis: subspaces do not span the edge space");
    return u;
}

Matrix simplicial_filter_matrix(const SimplicialFilterWeights& w, const CellComplex& c) {
    const HodgeLaplacians h = hodge_laplacians(c);
    const std::size_t n = h.l1.rows();
    Matrix out(n, n);
    auto add_powers = [&](const Matrix& l, const std::vector<double>& wts) {
        Matrix pw = Matrix::identity(n);
        for (double wk : wts) {
            pw = kernels::matmul(pw, l);
            out += pw * wk;
        }
    };
    add_powers(h.l1_down, w.down);
    add_powers(h.l1_up, w.up);
    if (w.harmonic != 0.0) {
        const HodgeSpectra s = hodge_spectra(c);
        out += kernels::matmul_nt(s.harmonic_basis, s.harmonic_basis) * w.harmonic;
    }
    return out;
}

}  // namespace topox

#pragma once

#include <mutex>
#include <utility>
#include <vector>

#include "topox/complex.hpp"
#include "topox/matrix.hpp"

namespace topox {

constexpr double kEighTol = 1e-10;
constexpr int kEighMaxSweeps = 100;
constexpr double kKernelCutoff = 1e-9;

struct SpectralDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // orthonormal columns
    int kernel_dim(double cutoff = kKernelCutoff) const;
};

// Cyclic Jacobi up to kJacobiMaxDim rows, Eigen's tridiagonal QR above.
// Throws std::invalid_argument on asymmetric input and NumericError when 100
// Jacobi sweeps do not reach the tolerance.
constexpr std::size_t kJacobiMaxDim = 256;
SpectralDecomposition eigh(const Matrix& m, double tol = kEighTol);
SpectralDecomposition eigh_jacobi(const Matrix& m, double tol = kEighTol);
SpectralDecomposition eigh_tridiagonal(const Matrix& m);

Matrix normalized_laplacian(const Graph& g);

struct SpectralGap {
    double lambda1 = 0.0;
    bool disconnected = false;  // second-smallest eigenvalue is numerically zero
};
SpectralGap spectral_gap(const Graph& g);
std::pair<double, double> cheeger_bounds(const Graph& g);  // (lambda1/2, sqrt(2 lambda1))
constexpr int kCheegerMaxNodes = 16;
double cheeger_constant_exact(const Graph& g);

std::vector<double> gft(const std::vector<double>& x, const SpectralDecomposition& d);
std::vector<double> igft(const std::vector<double>& xhat, const SpectralDecomposition& d);

Matrix polynomial_filter(const Matrix& x, const Matrix& s, const std::vector<double>& coeffs);
Matrix polynomial_filter(const Matrix& x, const SparseMatrix& s, const std::vector<double>& coeffs);

struct HodgeLaplacians {
    Matrix l0;
    Matrix l1_down;  // B1^T B1
    Matrix l1_up;    // B2 B2^T
    Matrix l1;
    Matrix l2;       // B2^T B2
};
HodgeLaplacians hodge_laplacians(const CellComplex& c);
// Sparse L1 = B1^T B1 + B2 B2^T.
SparseMatrix hodge_l1_sparse(const CellComplex& c);

struct HodgeSplit {
    std::vector<double> irrotational;
    std::vector<double> solenoidal;
    std::vector<double> harmonic;
};

// Eigendecompositions of L1_down, L1_up and L1 for one complex.
struct HodgeSpectra {
    SpectralDecomposition down;
    SpectralDecomposition up;
    SpectralDecomposition full;
    Matrix irrotational_basis;  // eigenvectors of L1_down above the cutoff
    Matrix solenoidal_basis;    // eigenvectors of L1_up above the cutoff
    Matrix harmonic_basis;      // eigenvectors of L1 below the cutoff
    std::vector<double> irrotational_values;
    std::vector<double> solenoidal_values;
    double lambda_max = 0.0;    // of L1
};
HodgeSpectra hodge_spectra(const CellComplex& c);

// Computes the spectra on first use; later reads are lock-free and safe from any thread.
class HodgeCache {
public:
    explicit HodgeCache(const CellComplex& c) : c_(&c) {}
    const HodgeSpectra& get() const;

private:
    const CellComplex* c_;
    mutable std::once_flag once_;
    mutable HodgeSpectra data_;
};

HodgeSplit hodge_decompose(const std::vector<double>& x, const CellComplex& c);
HodgeSplit hodge_decompose(const std::vector<double>& x, const HodgeSpectra& s);

struct HarmonicMode {
    enum class Kind { exact, approx } kind = Kind::exact;
    double eps = 0.0;  // <= 0 selects 1 / lambda_max
    int k_h = 200;
};
// Exact: U_h U_h^T. Approx: (I - eps L1)^{K_h} via repeated squaring.
Matrix harmonic_projector(const CellComplex& c, const HarmonicMode& mode);
Matrix harmonic_projector(const HodgeSpectra& s, const Matrix& l1, const HarmonicMode& mode);
// K_h sparse mat-vecs of (I - eps L1) applied to the columns of x.
Matrix apply_harmonic_approx(const SparseMatrix& l1, const Matrix& x, double eps, int k_h);

struct SimplicialFilterWeights {
    std::vector<double> down;  // w_down[k-1] multiplies L_down^k
    std::vector<double> up;
    double harmonic = 0.0;
};
// Vertex-domain evaluation with the exact harmonic projector.
std::vector<double> simplicial_filter(const std::vector<double>& x, const SimplicialFilterWeights& w,
                                      const CellComplex& c);
// Same filter evaluated through the frequency responses on the Hodge eigenbasis.
std::vector<double> simplicial_filter_spectral(const std::vector<double>& x, const SimplicialFilterWeights& w,
                                               const HodgeSpectra& s);
// Orthonormal basis [irrotational | solenoidal | harmonic] diagonalizing every filter.
Matrix hodge_eigenbasis(const HodgeSpectra& s);
Matrix simplicial_filter_matrix(const SimplicialFilterWeights& w, const CellComplex& c);

}  // namespace topox

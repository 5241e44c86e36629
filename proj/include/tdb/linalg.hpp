#pragma once

#include <span>
#include <vector>

#include "tdb/matrix.hpp"

namespace tdb {

// Diagonal quadrature weights: wx carries cell measures over the spatial
// grid, wxi carries probability mass over the samples (Monte Carlo: 1/s each,
// summing to one).
struct QuadratureWeights {
    std::vector<double> wx;
    std::vector<double> wxi;

    void validate() const;

    static QuadratureWeights monte_carlo(std::vector<double> wx, std::size_t samples);
};

namespace linalg {

// ---- products -------------------------------------------------------------

// A^T diag(w) B, shapes (n x a, n x b, n) -> a x b
Matrix weighted_inner(const Matrix& a, const Matrix& b, std::span<const double> w);

// sqrt( sum_ij wx_i wxi_j V_ij^2 )
double weighted_frobenius(const Matrix& v, std::span<const double> wx, std::span<const double> wxi);
inline double weighted_frobenius(const Matrix& v, const QuadratureWeights& w) { return weighted_frobenius(v, w.wx, w.wxi); }

Matrix matmul(const Matrix& a, const Matrix& b);       // A B
Matrix matmul_bt(const Matrix& a, const Matrix& b);    // A B^T
Matrix transpose(const Matrix& a);
Matrix scale_rows(const Matrix& a, std::span<const double> d);  // diag(d) A
double frobenius(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

// ---- factorizations (all direct; shapes are at most a few hundred) --------

struct PivotedQR {
    Matrix q;                         // m x min(m,k), orthonormal columns
    Matrix r;                         // min(m,k) x k, upper triangular
    std::vector<std::size_t> pivot;   // original column indices in pivot order (all k)
};
// Householder QR with column pivoting; |diag(R)| is non-increasing.
PivotedQR pivoted_qr(const Matrix& m);

struct EigResult {
    Matrix vectors;               // orthonormal columns
    std::vector<double> values;   // descending
};
// Cyclic Jacobi for symmetric matrices. Eigenvectors are sign-normalized so
// the largest-magnitude entry is positive.
EigResult sym_eig(const Matrix& c);

struct WeightedSVD {
    Matrix u;                         // n x r, W_x-orthonormal
    Matrix y;                         // s x r, W_xi-orthonormal
    std::vector<double> sigma;        // r kept values, descending
    std::vector<double> sigma_full;   // all min(n,s) values, descending
    double truncation_error() const;  // sqrt(sum of squared dropped values)
};
// Best weighted rank-r approximation via the smaller-side correlation matrix
// (method of snapshots).
WeightedSVD truncated_svd_weighted(const Matrix& v, std::span<const double> wx, std::span<const double> wxi, std::size_t rank);
WeightedSVD truncated_svd_weighted(const Matrix& v, const QuadratureWeights& w, std::size_t rank);

struct Reorth {
    Matrix q;   // orthonormal under diag(w)
    Matrix t;   // upper triangular, input = q * t
};
// Two-pass weighted modified Gram-Schmidt; reports the defective column on
// rank collapse (relative tolerance 1e-12).
Reorth reorthonormalize(const Matrix& u, std::span<const double> w);

struct LUFactors {
    Matrix lu;
    std::vector<std::size_t> perm;
};
LUFactors lu_factor(Matrix a);
Matrix lu_solve(const LUFactors& f, const Matrix& b);        // A X = B
Matrix lu_solve_transposed(const LUFactors& f, const Matrix& b);  // A^T X = B

// Singular values by one-sided Jacobi (descending). Accurate for small
// singular values, unlike the Gram route.
std::vector<double> singular_values(const Matrix& a);

// ||A||_2 via the smaller-side Gram eigenproblem; diagnostics-scale only.
double spectral_norm(const Matrix& a);

// Leading eigenpairs of a symmetric PSD matrix by blocked subspace iteration;
// used where the full Jacobi sweep would be wasteful (kernel matrices at
// bench sizes, where only a handful of modes are needed).
EigResult sym_eig_leading(const Matrix& c, std::size_t count, std::uint64_t seed = 977);

}  // namespace linalg
}  // namespace tdb

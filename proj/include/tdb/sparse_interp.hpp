#pragma once

#include <optional>
#include <vector>

#include "tdb/dbo.hpp"
#include "tdb/model.hpp"
#include "tdb/sampling.hpp"

namespace tdb::sparse {

// Low-rank factorization of the right-hand-side matrix: F ~ UF ZF^T, built
// from p sampled columns and p sampled rows.
struct LowRankRHS {
    Matrix uf;                        // n x p, W_x-orthonormal
    Matrix zf;                        // s x p random coefficients
    std::vector<std::size_t> cols;    // sampled column indices (q)
    std::vector<std::size_t> rows;    // sampled row indices (p)
    std::vector<double> lambda_f;     // eigenvalues of the column correlation, descending
};

// Buffered error interval driving interpolation-rank changes.
struct RankController {
    std::size_t p = 8;
    double eps_lower = 1e-5;
    double eps_upper = 1e-4;
    std::size_t p_min = 1;
    std::size_t p_max = 64;

    void validate() const;
};

// Z_F accepted at the previous step (Y bootstraps it at t=0).
struct RHSBasisCarry {
    Matrix zf_prev;
};

struct YFResult {
    Matrix yf;                    // s x k, W_xi-orthonormal
    std::vector<double> sigma_z;  // singular values of UF ZF^T, descending
};
// Right singular vectors of UF ZF^T through the small correlation
// C_Z = ZF^T W_xi ZF. Strict about rank: a deficient ZF raises, naming the
// deficient count.
YFResult compute_YF(const Matrix& zf, std::span<const double> wxi);

struct UFResult {
    Matrix uf;                     // n x k, W_x-orthonormal
    std::vector<double> lambda_f;  // descending
};
// Left singular vectors of the sampled columns through C_F = Fq^T W_x Fq.
UFResult compute_UF(const Matrix& fq, std::span<const double> wx);

// ZF^T = UF(rows,:)^-1 F(rows,:), solved by LU.
Matrix compute_ZF(const Matrix& fp, const Matrix& uf, std::span<const std::size_t> rows);

struct SparseRhsOptions {
    sampling::Sampler sampler = sampling::Sampler::deim;
    std::size_t target_p = 8;
    // reuse of the previous stage's selections (per-step reuse mode)
    const std::vector<std::size_t>* fixed_cols = nullptr;
    const std::vector<std::size_t>* fixed_rows = nullptr;
    // correlation eigen-directions below rel_tol * lambda_max are dropped;
    // keeps the pipeline alive when rank(F) < p (the saturating-p regime)
    double gram_truncation_rel = 1e-15;
    bool diagnostics = false;
};

struct SparseRhsResult {
    DBODerivative deriv;
    LowRankRHS lowrank;
    Matrix yf;                    // basis used for the column selection
    std::vector<double> sigma_z;  // singular values of the carried-in approximation
    // diagnostics (when enabled): interpolation defect at sampled rows/columns
    // and the max |F| seen over the sampled entries
    double interp_defect = 0.0;
    double sampled_abs_max = 0.0;
};

// One evaluation of the compressed evolution equations: column selection from
// the carried coefficients, p sampled columns -> UF, row selection, p sampled
// rows (plus stencil adjacency) -> ZF, then the three derivative blocks. No
// n x s matrix is ever formed; the peak temporary is O((n+s) p).
SparseRhsResult sparse_rhs(const DBOState& state, const Model& model, double t, const Matrix& carry_zf,
                           const SparseRhsOptions& opts, const QuadratureWeights& w);

// First Z_F before any step is taken: Y seeds the column selection, then the
// sampling pipeline runs once.
Matrix bootstrap_carry(const DBOState& state, const Model& model, double t, std::size_t p, sampling::Sampler sampler,
                       const QuadratureWeights& w, double gram_truncation_rel = 1e-15);

// sigma_p^2 / sum_i sigma_i^2
double error_indicator(std::span<const double> sigma_z);

struct RankPlan {
    std::size_t new_p;
    std::vector<std::size_t> columns;  // leverage-extended plan on addition, else empty
};
// Buffered rank update: +1 above the upper bound (columns picked by the
// leverage-extended selector), -1 below the lower bound, clamped to
// [p_min, p_max], at most one unit per call.
RankPlan adapt_rank(const RankController& controller, double eps, const Matrix& yf);

struct CurDiagnostics {
    double err2;        // ||F - UF ZF^T||_2
    double bound;       // (eta_rows + eta_cols) * sigma_{p+1}
    double sigma_next;  // sigma_{p+1} of F from the dense route
    double eta_rows;
    double eta_cols;
};
// Test-scale diagnostics against a materialized F; asserts nothing, returns
// the pieces of the spectral error bound.
CurDiagnostics cur_diagnostics(const LowRankRHS& lr, const Matrix& yf, const Matrix& f_oracle);

}  // namespace tdb::sparse

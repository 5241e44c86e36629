#include "tdb/dbo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdb/parallel.hpp"

namespace tdb {

DBOState init_from_samples(const Matrix& v0, std::size_t rank, const QuadratureWeights& w, double* residual) {
    if (rank > std::min(v0.rows(), v0.cols()))
        throw DimensionError("init_from_samples: rank exceeds min(n,s)");
    linalg::WeightedSVD svd;
    try {
        svd = linalg::truncated_svd_weighted(v0, w, rank);
    } catch (const RankDeficiencyError& e) {
        throw RankDeficiencyError("init_from_samples: sampled initial conditions support rank " +
                                      std::to_string(e.achievable) + ", requested " + std::to_string(rank),
                                  e.achievable);
    }
    if (residual) *residual = svd.truncation_error();
    DBOState state;
    state.u = std::move(svd.u);
    state.y = std::move(svd.y);
    state.sigma = Matrix(rank, rank);
    for (std::size_t i = 0; i < rank; ++i) state.sigma(i, i) = svd.sigma[i];
    state.t = 0.0;
    return state;
}

linalg::LUFactors factor_sigma(const Matrix& sigma) {
    const std::vector<double> sv = linalg::singular_values(sigma);
    if (sv.back() < 1e-12 * sv.front() || sv.back() == 0.0)
        throw SingularSigmaError("Sigma is numerically singular at rank " + std::to_string(sigma.rows()) +
                                     " (sigma_min/sigma_max = " + std::to_string(sv.back() / sv.front()) + ")",
                                 sigma.rows());
    return linalg::lu_factor(sigma);
}

DBODerivative dbo_rhs_decompressed(const DBOState& state, const Matrix& f, const QuadratureWeights& w) {
    const std::size_t n = state.space_dim(), s = state.sample_dim(), r = state.rank();
    if (f.rows() != n || f.cols() != s) throw DimensionError("dbo_rhs_decompressed: F shape mismatch");

    const linalg::LUFactors sig = factor_sigma(state.sigma);

    // FY = F W_xi Y (n x r), parallel over row blocks
    Matrix fy(n, r);
    parallel_for(n, [&](std::size_t ib, std::size_t ie) {
        for (std::size_t j = 0; j < s; ++j) {
            const double* fj = f.col(j);
            const double wj = w.wxi[j];
            for (std::size_t k = 0; k < r; ++k) {
                const double c = wj * state.y(j, k);
                double* out = fy.col(k);
                for (std::size_t i = ib; i < ie; ++i) out[i] += fj[i] * c;
            }
        }
    });

    DBODerivative d;
    d.dsigma = linalg::weighted_inner(state.u, fy, w.wx);  // r x r

    // dU = (FY - U dSigma) Sigma^-1
    Matrix proj_u = fy - linalg::matmul(state.u, d.dsigma);
    // X Sigma = proj_u  =>  Sigma^T X^T = proj_u^T
    d.du = linalg::transpose(linalg::lu_solve_transposed(sig, linalg::transpose(proj_u)));

    // FtU = F^T W_x U (s x r); then dY = (FtU - Y dSigma^T) Sigma^-T
    Matrix wu = linalg::scale_rows(state.u, w.wx);
    Matrix ftu(s, r);
    parallel_for(s, [&](std::size_t jb, std::size_t je) {
        for (std::size_t j = jb; j < je; ++j) {
            const double* fj = f.col(j);
            for (std::size_t k = 0; k < r; ++k) {
                const double* uk = wu.col(k);
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += fj[i] * uk[i];
                ftu(j, k) = acc;
            }
        }
    });
    Matrix proj_y = ftu - linalg::matmul_bt(state.y, d.dsigma);
    // X Sigma^T = proj_y  =>  Sigma X^T = proj_y^T
    d.dy = linalg::transpose(linalg::lu_solve(sig, linalg::transpose(proj_y)));
    return d;
}

Matrix reduced_linear_matrix(const Model& linear_model, const Matrix& u, const QuadratureWeights& w) {
    const Matrix lu_cols = linear_model.rhs_columns(0.0, u);
    return linalg::weighted_inner(u, lu_cols, w.wx);
}

double total_error(const DBOState& state, const Matrix& v_fom, const QuadratureWeights& w, std::size_t row_block) {
    const std::size_t n = state.space_dim(), s = state.sample_dim(), r = state.rank();
    if (v_fom.rows() != n || v_fom.cols() != s) throw DimensionError("total_error: snapshot shape mismatch");
    if (row_block == 0) row_block = 1;

    // Sigma Y^T once (r x s); reconstruction streamed over row blocks
    Matrix syt = linalg::matmul_bt(state.sigma, state.y);

    const std::size_t nblocks = (n + row_block - 1) / row_block;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t bb, std::size_t be) {
        for (std::size_t blk = bb; blk < be; ++blk) {
            const std::size_t i0 = blk * row_block, i1 = std::min(n, i0 + row_block);
            double acc = 0.0;
            for (std::size_t j = 0; j < s; ++j) {
                const double* vj = v_fom.col(j);
                const double* sy = syt.col(j);
                double colacc = 0.0;
                for (std::size_t i = i0; i < i1; ++i) {
                    double rec = 0.0;
                    for (std::size_t k = 0; k < r; ++k) rec += state.u(i, k) * sy[k];
                    const double diff = rec - vj[i];
                    colacc += w.wx[i] * diff * diff;
                }
                acc += w.wxi[j] * colacc;
            }
            partial[blk] = acc;
        }
    });
    // fixed-order reduction over blocks keeps the result thread-count independent
    double total = 0.0;
    for (double p : partial) total += p;
    return std::sqrt(total);
}

std::vector<double> state_singular_values(const DBOState& state) { return linalg::singular_values(state.sigma); }

std::pair<double, double> orthonormality_defect(const DBOState& state, const QuadratureWeights& w) {
    const Matrix gu = linalg::weighted_inner(state.u, state.u, w.wx);
    const Matrix gy = linalg::weighted_inner(state.y, state.y, w.wxi);
    const std::size_t r = state.rank();
    return {linalg::max_abs_diff(gu, Matrix::identity(r)), linalg::max_abs_diff(gy, Matrix::identity(r))};
}

}  // namespace tdb

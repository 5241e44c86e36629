#pragma once

#include <utility>

#include "tdb/linalg.hpp"
#include "tdb/model.hpp"

namespace tdb {

// Rank-r factorization V ~ U Sigma Y^T with U weighted-orthonormal in space
// and Y in the sample dimension. The mean is not subtracted.
struct DBOState {
    Matrix u;       // n x r
    Matrix sigma;   // r x r
    Matrix y;       // s x r
    double t = 0.0;

    std::size_t rank() const { return sigma.rows(); }
    std::size_t space_dim() const { return u.rows(); }
    std::size_t sample_dim() const { return y.rows(); }
};

struct DBODerivative {
    Matrix du;
    Matrix dsigma;
    Matrix dy;
};

// Rank-r weighted truncated SVD of the sampled initial conditions. Reports
// the dropped weighted-Frobenius mass through *residual when given.
DBOState init_from_samples(const Matrix& v0, std::size_t rank, const QuadratureWeights& w, double* residual = nullptr);

// Evolution equations applied to a fully assembled F = model(U Sigma Y^T).
// Projector applications stay two-stage; nothing n x n or s x s is formed.
DBODerivative dbo_rhs_decompressed(const DBOState& state, const Matrix& f, const QuadratureWeights& w);

// U^T W_x (L U) for a linear model exposing its action columnwise; the test
// oracle of the homogeneous-linear property suite.
Matrix reduced_linear_matrix(const Model& linear_model, const Matrix& u, const QuadratureWeights& w);

// Weighted Frobenius distance between the reconstruction and a full-order
// snapshot, streamed over row blocks.
double total_error(const DBOState& state, const Matrix& v_fom, const QuadratureWeights& w, std::size_t row_block = 256);

// Singular values of the small Sigma factor, descending.
std::vector<double> state_singular_values(const DBOState& state);

// (max |U^T W_x U - I|, max |Y^T W_xi Y - I|)
std::pair<double, double> orthonormality_defect(const DBOState& state, const QuadratureWeights& w);

// guard shared by the evolution paths: throws SingularSigmaError when
// sigma_min/sigma_max drops below 1e-12
linalg::LUFactors factor_sigma(const Matrix& sigma);

}  // namespace tdb

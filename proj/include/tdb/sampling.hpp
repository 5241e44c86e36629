#pragma once

#include <span>
#include <vector>

#include "tdb/matrix.hpp"

namespace tdb::sampling {

enum class Sampler { deim, qdeim };

struct SelectionResult {
    std::vector<std::size_t> indices;  // distinct, selection order preserved
    double eta;                        // ||Psi(indices,:)^-1||_2, +inf when singular
};

// Greedy residual-maximizing interpolation points. Ties break to the lowest
// index; interpolation systems are solved by dense LU.
SelectionResult deim_select(const Matrix& psi);

// First p pivots of the column-pivoted QR of Psi^T.
SelectionResult qdeim_select(const Matrix& psi);

// Greedy points for the p columns, then the target-p extra indices with the
// largest row norms of the deflated basis (descending, ties to lower index).
SelectionResult ldeim_select(const Matrix& psi, std::size_t target);

SelectionResult select(Sampler s, const Matrix& psi);

// Spectral norm of the inverse of the square submatrix Psi(rows,:), computed
// from its Gram matrix. Returns +inf and sets *singular on a singular
// submatrix.
double selection_eta(const Matrix& psi, std::span<const std::size_t> rows, bool* singular = nullptr);

}  // namespace tdb::sampling

#include "tdb/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tdb/linalg.hpp"

namespace tdb::sampling {

namespace {

// argmax of |v|, already-selected indices excluded, ties to the lowest index
std::size_t argmax_abs(std::span<const double> v, std::span<const std::size_t> taken) {
    std::size_t best = static_cast<std::size_t>(-1);
    double bestval = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (std::find(taken.begin(), taken.end(), i) != taken.end()) continue;
        const double m = std::abs(v[i]);
        if (m > bestval) {
            bestval = m;
            best = i;
        }
    }
    if (best == static_cast<std::size_t>(-1) || bestval == 0.0)
        throw SelectionError("deim_select: zero residual, columns are exactly collinear at the selected rows");
    return best;
}

// greedy loop shared by deim_select and ldeim_select; residuals holds the
// deflated column i at exit
std::vector<std::size_t> deim_indices(const Matrix& psi, Matrix& residuals) {
    const std::size_t m = psi.rows(), p = psi.cols();
    if (p == 0 || p > m) throw DimensionError("deim_select: need 1 <= p <= m");
    residuals = psi;
    std::vector<std::size_t> idx;
    idx.reserve(p);
    idx.push_back(argmax_abs(residuals.col_span(0), idx));
    for (std::size_t i = 1; i < p; ++i) {
        // c solves Psi(idx, 0:i) c = psi_i(idx); residual = psi_i - Psi(:,0:i) c
        Matrix sys(i, i), rhs(i, 1);
        for (std::size_t a = 0; a < i; ++a) {
            for (std::size_t b = 0; b < i; ++b) sys(a, b) = psi(idx[a], b);
            rhs(a, 0) = psi(idx[a], i);
        }
        Matrix c;
        try {
            c = linalg::lu_solve(linalg::lu_factor(std::move(sys)), rhs);
        } catch (const SingularMatrixError&) {
            throw SelectionError("deim_select: singular interpolation system at step " + std::to_string(i));
        }
        for (std::size_t row = 0; row < m; ++row) {
            double acc = psi(row, i);
            for (std::size_t b = 0; b < i; ++b) acc -= psi(row, b) * c(b, 0);
            residuals(row, i) = acc;
        }
        idx.push_back(argmax_abs(residuals.col_span(i), idx));
    }
    return idx;
}

}  // namespace

double selection_eta(const Matrix& psi, std::span<const std::size_t> rows, bool* singular) {
    if (rows.size() != psi.cols()) throw DimensionError("selection_eta: submatrix is not square");
    if (singular) *singular = false;
    const std::size_t p = rows.size();
    Matrix sub(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < p; ++i) {
            if (rows[i] >= psi.rows()) throw DimensionError("selection_eta: row index out of range");
            sub(i, j) = psi(rows[i], j);
        }
    // eta = 1/sigma_min via the Gram matrix eigenvalues
    Matrix gram(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i <= j; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < p; ++k) acc += sub(k, i) * sub(k, j);
            gram(i, j) = acc;
            gram(j, i) = acc;
        }
    const linalg::EigResult e = linalg::sym_eig(gram);
    const double lmin = e.values.back(), lmax = e.values.front();
    if (lmin <= 0.0 || lmin <= 1e-28 * lmax) {
        if (singular) *singular = true;
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / std::sqrt(lmin);
}

SelectionResult deim_select(const Matrix& psi) {
    Matrix residuals;
    SelectionResult out;
    out.indices = deim_indices(psi, residuals);
    out.eta = selection_eta(psi, out.indices);
    return out;
}

SelectionResult qdeim_select(const Matrix& psi) {
    const std::size_t m = psi.rows(), p = psi.cols();
    if (p == 0 || p > m) throw DimensionError("qdeim_select: need 1 <= p <= m");
    const linalg::PivotedQR qr = linalg::pivoted_qr(linalg::transpose(psi));
    SelectionResult out;
    out.indices.assign(qr.pivot.begin(), qr.pivot.begin() + p);
    out.eta = selection_eta(psi, out.indices);
    return out;
}

SelectionResult ldeim_select(const Matrix& psi, std::size_t target) {
    const std::size_t m = psi.rows(), p = psi.cols();
    if (target < p) throw DimensionError("ldeim_select: target below basis width");
    if (target > m) throw DimensionError("ldeim_select: target exceeds row count");

    Matrix residuals;
    std::vector<std::size_t> idx = deim_indices(psi, residuals);

    if (target > p) {
        // leverage scores: row norms of the deflated basis
        std::vector<double> ell(m, 0.0);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t i = 0; i < m; ++i) ell[i] += residuals(i, j) * residuals(i, j);
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ell[a] > ell[b]; });
        for (std::size_t i : order) {
            if (idx.size() == target) break;
            if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
        }
        if (idx.size() != target) throw SelectionError("ldeim_select: not enough rows to reach target");
    }

    SelectionResult out;
    out.indices = std::move(idx);
    // eta is defined for the square case only; for target > p report the
    // conditioning of the first-p block
    std::vector<std::size_t> head(out.indices.begin(), out.indices.begin() + p);
    out.eta = selection_eta(psi, head);
    return out;
}

SelectionResult select(Sampler s, const Matrix& psi) {
    return s == Sampler::deim ? deim_select(psi) : qdeim_select(psi);
}

}  // namespace tdb::sampling

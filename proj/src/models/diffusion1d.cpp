#include "tdb/models/diffusion1d.hpp"

#include <cmath>
#include <set>

#include "tdb/rng.hpp"

namespace tdb::models {

Diffusion1D::Diffusion1D(const DiffusionConfig& cfg) : cfg_(cfg) {
    const double dx = cfg_.length / static_cast<double>(cfg_.n);
    inv_dx2_ = 1.0 / (dx * dx);
}

std::vector<std::size_t> Diffusion1D::adjacency(std::span<const std::size_t> rows) const {
    std::set<std::size_t> need;
    const std::size_t n = cfg_.n;
    for (std::size_t r : rows) {
        need.insert((r + n - 1) % n);
        need.insert((r + 1) % n);
    }
    for (std::size_t r : rows) need.erase(r);
    return {need.begin(), need.end()};
}

Matrix Diffusion1D::rhs_columns(double, const Matrix& v, std::span<const std::size_t>) const {
    const std::size_t n = cfg_.n;
    if (v.rows() != n) throw DimensionError("diffusion rhs: state rows mismatch");
    Matrix out(n, v.cols());
    for (std::size_t j = 0; j < v.cols(); ++j) {
        const double* c = v.col(j);
        double* o = out.col(j);
        for (std::size_t i = 0; i < n; ++i) {
            const double vm = c[(i + n - 1) % n];
            const double vp = c[(i + 1) % n];
            o[i] = cfg_.nu * (vp - 2.0 * c[i] + vm) * inv_dx2_;
        }
    }
    return out;
}

Matrix Diffusion1D::rhs_rows(double, std::span<const std::size_t> rows, std::span<const std::size_t> adj,
                             const Matrix& vsub) const {
    const std::size_t n = cfg_.n;
    if (vsub.rows() != rows.size() + adj.size()) throw ModelError("diffusion rhs_rows: vsub rows mismatch");
    std::vector<std::size_t> where(n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < rows.size(); ++i) where[rows[i]] = i;
    for (std::size_t i = 0; i < adj.size(); ++i) where[adj[i]] = rows.size() + i;
    auto at = [&](std::size_t g, std::size_t col) {
        if (where[g] == static_cast<std::size_t>(-1))
            throw ModelError("diffusion rhs_rows: missing adjacency row " + std::to_string(g));
        return vsub(where[g], col);
    };
    Matrix out(rows.size(), vsub.cols());
    for (std::size_t j = 0; j < vsub.cols(); ++j)
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const std::size_t i = rows[k];
            const double vm = at((i + n - 1) % n, j);
            const double vp = at((i + 1) % n, j);
            out(k, j) = cfg_.nu * (vp - 2.0 * at(i, j) + vm) * inv_dx2_;
        }
    return out;
}

Matrix Diffusion1D::initial_ensemble(std::uint64_t seed) const {
    const std::size_t n = cfg_.n, s = cfg_.samples, m = cfg_.modes;
    Philox gen(seed);
    Matrix v(n, s);
    const double dx = cfg_.length / static_cast<double>(n);
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
            const double xi = gen.normal(rng_stream::initial_condition, j * m + k);
            const double wavenumber = 2.0 * M_PI * static_cast<double>(k / 2 + 1) / cfg_.length;
            const double amp = xi / static_cast<double>(k / 2 + 1);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = static_cast<double>(i) * dx;
                v(i, j) += amp * ((k % 2 == 0) ? std::sin(wavenumber * x) : std::cos(wavenumber * x));
            }
        }
    }
    return v;
}

QuadratureWeights Diffusion1D::weights() const {
    const double dx = cfg_.length / static_cast<double>(cfg_.n);
    return QuadratureWeights::monte_carlo(std::vector<double>(cfg_.n, dx), cfg_.samples);
}

}  // namespace tdb::models

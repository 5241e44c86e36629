#include "tdb/models/burgers1d.hpp"

#include <cmath>
#include <set>
#include <string>

#include "tdb/parallel.hpp"
#include "tdb/rng.hpp"

namespace tdb::models {

Matrix Burgers1D::kernel_matrix() const {
    Matrix k(cfg_.n, cfg_.n);
    for (std::size_t b = 0; b < cfg_.n; ++b)
        for (std::size_t a = 0; a < cfg_.n; ++a) {
            const double d = (grid_point(a) - grid_point(b)) / cfg_.kernel_length;
            k(a, b) = std::exp(-0.5 * d * d);
        }
    return k;
}

Burgers1D::Burgers1D(const BurgersConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg_.n < 5) throw ModelError("burgers: need at least 5 grid points");
    if (cfg_.d > cfg_.samples) throw ModelError("burgers: random dimension exceeds sample count");
    dx_ = 1.0 / static_cast<double>(cfg_.n - 1);
    inv_2dx_ = 1.0 / (2.0 * dx_);
    inv_dx2_ = 1.0 / (dx_ * dx_);

    // leading eigenpairs of the squared-exponential kernel matrix; full Jacobi
    // below 512 points, subspace iteration above (bench sweeps)
    const Matrix k = kernel_matrix();
    linalg::EigResult eig = (cfg_.n <= 512) ? linalg::sym_eig(k) : linalg::sym_eig_leading(k, cfg_.d);
    kernel_lambda_.assign(eig.values.begin(), eig.values.begin() + cfg_.d);
    for (double& l : kernel_lambda_) l = std::max(l, 0.0);
    kernel_psi_ = Matrix(cfg_.n, cfg_.d);
    for (std::size_t c = 0; c < cfg_.d; ++c)
        for (std::size_t i = 0; i < cfg_.n; ++i) kernel_psi_(i, c) = eig.vectors(i, c);

    Philox gen(seed);
    xi_ = Matrix(cfg_.d, cfg_.samples);
    for (std::size_t j = 0; j < cfg_.samples; ++j)
        for (std::size_t i = 0; i < cfg_.d; ++i) xi_(i, j) = gen.normal(rng_stream::initial_condition, j * cfg_.d + i);
}

double Burgers1D::boundary_value(double t, std::size_t sample) const {
    double g = cfg_.bc_sin_amplitude * (-std::sin(2.0 * M_PI * t));
    double noise = 0.0;
    for (std::size_t i = 1; i <= cfg_.d; ++i) {
        const double lambda_t = 0.01 / (static_cast<double>(i) * static_cast<double>(i));
        noise += lambda_t * std::sin(static_cast<double>(i) * M_PI * t) * xi_(i - 1, sample);
    }
    return g + cfg_.sigma_t * noise;
}

// shared arithmetic path for both access patterns; `at` maps a grid index to
// the state value of the current column
template <class At>
static double burgers_rhs_at(std::size_t i, std::size_t n, At&& at, double nu, double kappa, bool advection,
                             double inv_2dx, double inv_dx2, double gleft) {
    if (i == 0) {
        const double v0 = at(std::size_t{0}), v1 = at(std::size_t{1}), v2 = at(std::size_t{2});
        const double vx = (-3.0 * v0 + 4.0 * v1 - v2) * inv_2dx;
        const double vxx = (v0 - 2.0 * v1 + v2) * inv_dx2;
        double r = nu * vxx - kappa * (v0 - gleft);
        if (advection) r -= v0 * vx;
        return r;
    }
    if (i == n - 1) {
        const double v0 = at(n - 1), v1 = at(n - 2), v2 = at(n - 3);
        const double vx = (3.0 * v0 - 4.0 * v1 + v2) * inv_2dx;
        const double vxx = (v0 - 2.0 * v1 + v2) * inv_dx2;
        double r = nu * vxx - kappa * v0;
        if (advection) r -= v0 * vx;
        return r;
    }
    const double vm = at(i - 1), vc = at(i), vp = at(i + 1);
    const double vx = (vp - vm) * inv_2dx;
    const double vxx = (vp - 2.0 * vc + vm) * inv_dx2;
    double r = nu * vxx;
    if (advection) r -= vc * vx;
    return r;
}

std::vector<std::size_t> Burgers1D::adjacency(std::span<const std::size_t> rows) const {
    const std::size_t n = cfg_.n;
    std::set<std::size_t> need;
    for (std::size_t r : rows) {
        if (r >= n) throw ModelError("burgers adjacency: row " + std::to_string(r) + " out of range");
        if (r == 0) {
            need.insert(1);
            need.insert(2);
        } else if (r == n - 1) {
            need.insert(n - 2);
            need.insert(n - 3);
        } else {
            need.insert(r - 1);
            need.insert(r + 1);
        }
    }
    for (std::size_t r : rows) need.erase(r);
    return {need.begin(), need.end()};
}

Matrix Burgers1D::rhs_columns(double t, const Matrix& v, std::span<const std::size_t> samples) const {
    const std::size_t n = cfg_.n;
    if (v.rows() != n) throw DimensionError("burgers rhs: state rows mismatch");
    Matrix out(n, v.cols());
    parallel_for(v.cols(), [&](std::size_t jb, std::size_t je) {
        for (std::size_t j = jb; j < je; ++j) {
            const std::size_t sample = samples.empty() ? j : samples[j];
            const double gleft = boundary_value(t, sample);
            const double* c = v.col(j);
            double* o = out.col(j);
            for (std::size_t i = 0; i < n; ++i)
                o[i] = burgers_rhs_at(i, n, [&](std::size_t g) { return c[g]; }, cfg_.nu, cfg_.kappa, cfg_.advection,
                                      inv_2dx_, inv_dx2_, gleft);
        }
    });
    return out;
}

Matrix Burgers1D::rhs_rows(double t, std::span<const std::size_t> rows, std::span<const std::size_t> adj,
                           const Matrix& vsub) const {
    const std::size_t n = cfg_.n;
    if (vsub.rows() != rows.size() + adj.size()) throw ModelError("burgers rhs_rows: vsub rows mismatch");
    std::vector<std::size_t> where(n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < rows.size(); ++i) where[rows[i]] = i;
    for (std::size_t i = 0; i < adj.size(); ++i) where[adj[i]] = rows.size() + i;

    Matrix out(rows.size(), vsub.cols());
    for (std::size_t j = 0; j < vsub.cols(); ++j) {
        const double gleft = boundary_value(t, j);
        auto at = [&](std::size_t g) {
            const std::size_t pos = where[g];
            if (pos == static_cast<std::size_t>(-1))
                throw ModelError("burgers rhs_rows: missing adjacency row " + std::to_string(g));
            return vsub(pos, j);
        };
        for (std::size_t k = 0; k < rows.size(); ++k)
            out(k, j) = burgers_rhs_at(rows[k], n, at, cfg_.nu, cfg_.kappa, cfg_.advection, inv_2dx_, inv_dx2_, gleft);
    }
    return out;
}

Matrix Burgers1D::initial_ensemble() const {
    const std::size_t n = cfg_.n, s = cfg_.samples;
    Matrix v0(n, s);
    std::vector<double> sqrt_lambda(cfg_.d);
    for (std::size_t k = 0; k < cfg_.d; ++k) sqrt_lambda[k] = std::sqrt(kernel_lambda_[k]);
    for (std::size_t j = 0; j < s; ++j) {
        double* c = v0.col(j);
        for (std::size_t i = 0; i < n; ++i) {
            double pert = 0.0;
            for (std::size_t k = 0; k < cfg_.d; ++k) pert += sqrt_lambda[k] * kernel_psi_(i, k) * xi_(k, j);
            c[i] = initial_profile(grid_point(i)) + cfg_.sigma_x * pert;
        }
    }
    return v0;
}

QuadratureWeights Burgers1D::weights() const {
    std::vector<double> wx(cfg_.n, dx_);
    wx.front() = 0.5 * dx_;  // trapezoid ends
    wx.back() = 0.5 * dx_;
    return QuadratureWeights::monte_carlo(std::move(wx), cfg_.samples);
}

}  // namespace tdb::models

#include "tdb/models/ns2d.hpp"

#include <cmath>
#include <set>
#include <string>

#include "tdb/parallel.hpp"
#include "tdb/rng.hpp"

namespace tdb::models {

namespace {

struct Prim {
    double rho, u, v, p, T, mx, my, E;
};

struct FaceFlux {
    double rho, mx, my, E;
};

inline Prim prim_from_conserved(double rho, double mx, double my, double E, double gamma, double ec) {
    Prim P;
    P.rho = rho;
    P.mx = mx;
    P.my = my;
    P.E = E;
    P.u = mx / rho;
    P.v = my / rho;
    const double e_int = E / rho - 0.5 * (P.u * P.u + P.v * P.v);
    P.p = (gamma - 1.0) * rho * e_int;
    P.T = gamma * ec * e_int;
    return P;
}

// x-face between L=(i,j) and R=(i+1,j); Lup/Ldn/Rup/Rdn are the j+-1 neighbors
inline FaceFlux x_face(const Prim& L, const Prim& R, const Prim& Lup, const Prim& Ldn, const Prim& Rup, const Prim& Rdn,
                       double inv_dx, double inv_dy, double inv_re, double k_heat) {
    const double du_dx = (R.u - L.u) * inv_dx;
    const double dv_dx = (R.v - L.v) * inv_dx;
    const double dT_dx = (R.T - L.T) * inv_dx;
    const double du_dy = 0.25 * inv_dy * ((Lup.u - Ldn.u) + (Rup.u - Rdn.u));
    const double dv_dy = 0.25 * inv_dy * ((Lup.v - Ldn.v) + (Rup.v - Rdn.v));
    const double tau_xx = inv_re * ((4.0 / 3.0) * du_dx - (2.0 / 3.0) * dv_dy);
    const double tau_xy = inv_re * (du_dy + dv_dx);
    const double u_f = 0.5 * (L.u + R.u);
    const double v_f = 0.5 * (L.v + R.v);
    FaceFlux f;
    f.rho = 0.5 * (L.mx + R.mx);
    f.mx = 0.5 * ((L.mx * L.u + L.p) + (R.mx * R.u + R.p)) - tau_xx;
    f.my = 0.5 * (L.my * L.u + R.my * R.u) - tau_xy;
    f.E = 0.5 * ((L.E + L.p) * L.u + (R.E + R.p) * R.u) - (tau_xx * u_f + tau_xy * v_f) - k_heat * (-dT_dx);
    return f;
}

// y-face between L=(i,j) and U=(i,j+1); Ll/Lr/Ul/Ur are the i-+1 neighbors
inline FaceFlux y_face(const Prim& L, const Prim& U, const Prim& Ll, const Prim& Lr, const Prim& Ul, const Prim& Ur,
                       double inv_dx, double inv_dy, double inv_re, double k_heat) {
    const double du_dy = (U.u - L.u) * inv_dy;
    const double dv_dy = (U.v - L.v) * inv_dy;
    const double dT_dy = (U.T - L.T) * inv_dy;
    const double du_dx = 0.25 * inv_dx * ((Lr.u - Ll.u) + (Ur.u - Ul.u));
    const double dv_dx = 0.25 * inv_dx * ((Lr.v - Ll.v) + (Ur.v - Ul.v));
    const double tau_yy = inv_re * ((4.0 / 3.0) * dv_dy - (2.0 / 3.0) * du_dx);
    const double tau_xy = inv_re * (du_dy + dv_dx);
    const double u_f = 0.5 * (L.u + U.u);
    const double v_f = 0.5 * (L.v + U.v);
    FaceFlux f;
    f.rho = 0.5 * (L.my + U.my);
    f.mx = 0.5 * (L.mx * L.v + U.mx * U.v) - tau_xy;
    f.my = 0.5 * ((L.my * L.v + L.p) + (U.my * U.v + U.p)) - tau_yy;
    f.E = 0.5 * ((L.E + L.p) * L.v + (U.E + U.p) * U.v) - (tau_xy * u_f + tau_yy * v_f) - k_heat * (-dT_dy);
    return f;
}

// time derivative of all four fields at the center of a 3x3 Prim block
// P[dj][di], offsets -1..1
inline void cell_rhs(const Prim P[3][3], double inv_dx, double inv_dy, double inv_re, double k_heat, double out[4]) {
    const FaceFlux xp = x_face(P[1][1], P[1][2], P[2][1], P[0][1], P[2][2], P[0][2], inv_dx, inv_dy, inv_re, k_heat);
    const FaceFlux xm = x_face(P[1][0], P[1][1], P[2][0], P[0][0], P[2][1], P[0][1], inv_dx, inv_dy, inv_re, k_heat);
    const FaceFlux yp = y_face(P[1][1], P[2][1], P[1][0], P[1][2], P[2][0], P[2][2], inv_dx, inv_dy, inv_re, k_heat);
    const FaceFlux ym = y_face(P[0][1], P[1][1], P[0][0], P[0][2], P[1][0], P[1][2], inv_dx, inv_dy, inv_re, k_heat);
    out[0] = -(xp.rho - xm.rho) * inv_dx - (yp.rho - ym.rho) * inv_dy;
    out[1] = -(xp.mx - xm.mx) * inv_dx - (yp.mx - ym.mx) * inv_dy;
    out[2] = -(xp.my - xm.my) * inv_dx - (yp.my - ym.my) * inv_dy;
    out[3] = -(xp.E - xm.E) * inv_dx - (yp.E - ym.E) * inv_dy;
}

}  // namespace

Ns2D::Ns2D(const NSConfig& cfg) : cfg_(cfg) {
    dx_ = cfg_.lx / static_cast<double>(cfg_.nx);
    dy_ = cfg_.ly / static_cast<double>(cfg_.ny);
    inv_dx_ = 1.0 / dx_;
    inv_dy_ = 1.0 / dy_;
    inv_re_ = 1.0 / cfg_.re;
    ec_ = (cfg_.gamma - 1.0) * cfg_.ma * cfg_.ma;
    k_heat_ = 1.0 / (ec_ * cfg_.re * cfg_.pr);
}

std::vector<std::size_t> Ns2D::adjacency(std::span<const std::size_t> rows) const {
    const std::size_t nx = cfg_.nx, ny = cfg_.ny, ncell = cfg_.cells();
    std::set<std::size_t> need;
    for (std::size_t r : rows) {
        if (r >= cfg_.state_dim()) throw ModelError("ns2d adjacency: row out of range");
        const std::size_t c = r % ncell;
        const std::size_t i = c % nx, j = c / nx;
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                const std::size_t ii = (i + nx + static_cast<std::size_t>(di + 1) - 1) % nx;
                const std::size_t jj = (j + ny + static_cast<std::size_t>(dj + 1) - 1) % ny;
                for (std::size_t f = 0; f < 4; ++f) need.insert(f * ncell + jj * nx + ii);
            }
    }
    for (std::size_t r : rows) need.erase(r);
    return {need.begin(), need.end()};
}

Matrix Ns2D::rhs_columns(double, const Matrix& v, std::span<const std::size_t>) const {
    const std::size_t nx = cfg_.nx, ny = cfg_.ny, ncell = cfg_.cells();
    if (v.rows() != cfg_.state_dim()) throw DimensionError("ns2d rhs: state rows mismatch");
    Matrix out(v.rows(), v.cols());
    parallel_for(v.cols(), [&](std::size_t jb, std::size_t je) {
        std::vector<Prim> prim(ncell);
        for (std::size_t col = jb; col < je; ++col) {
            const double* c = v.col(col);
            for (std::size_t cell = 0; cell < ncell; ++cell) {
                const double rho = c[cell];
                if (!(rho > 0.0))
                    throw ModelError("ns2d rhs: non-positive density at cell " + std::to_string(cell) + " (column " +
                                     std::to_string(col) + ")");
                prim[cell] = prim_from_conserved(rho, c[ncell + cell], c[2 * ncell + cell], c[3 * ncell + cell],
                                                 cfg_.gamma, ec_);
            }
            double* o = out.col(col);
            Prim block[3][3];
            double rhs4[4];
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t jm = (j + ny - 1) % ny, jp = (j + 1) % ny;
                const std::size_t joff[3] = {jm * nx, j * nx, jp * nx};
                for (std::size_t i = 0; i < nx; ++i) {
                    const std::size_t im = (i + nx - 1) % nx, ip = (i + 1) % nx;
                    const std::size_t ioff[3] = {im, i, ip};
                    for (int dj = 0; dj < 3; ++dj)
                        for (int di = 0; di < 3; ++di) block[dj][di] = prim[joff[dj] + ioff[di]];
                    cell_rhs(block, inv_dx_, inv_dy_, inv_re_, k_heat_, rhs4);
                    const std::size_t cell = j * nx + i;
                    o[cell] = rhs4[0];
                    o[ncell + cell] = rhs4[1];
                    o[2 * ncell + cell] = rhs4[2];
                    o[3 * ncell + cell] = rhs4[3];
                }
            }
        }
    });
    return out;
}

Matrix Ns2D::rhs_rows(double, std::span<const std::size_t> rows, std::span<const std::size_t> adj,
                      const Matrix& vsub) const {
    const std::size_t nx = cfg_.nx, ny = cfg_.ny, ncell = cfg_.cells();
    if (vsub.rows() != rows.size() + adj.size()) throw ModelError("ns2d rhs_rows: vsub rows mismatch");

    // map global row -> position in vsub
    std::vector<std::pair<std::size_t, std::size_t>> lut;
    lut.reserve(rows.size() + adj.size());
    for (std::size_t i = 0; i < rows.size(); ++i) lut.emplace_back(rows[i], i);
    for (std::size_t i = 0; i < adj.size(); ++i) lut.emplace_back(adj[i], rows.size() + i);
    std::sort(lut.begin(), lut.end());
    auto where = [&](std::size_t g) -> std::size_t {
        auto it = std::lower_bound(lut.begin(), lut.end(), std::make_pair(g, std::size_t{0}));
        if (it == lut.end() || it->first != g)
            throw ModelError("ns2d rhs_rows: incomplete adjacency closure, missing row " + std::to_string(g));
        return it->second;
    };

    Matrix out(rows.size(), vsub.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t g = rows[k];
        const std::size_t field = g / ncell;
        const std::size_t cell = g % ncell;
        const std::size_t i = cell % nx, j = cell / nx;
        const std::size_t im = (i + nx - 1) % nx, ip = (i + 1) % nx;
        const std::size_t jm = (j + ny - 1) % ny, jp = (j + 1) % ny;
        const std::size_t ioff[3] = {im, i, ip};
        const std::size_t joff[3] = {jm * nx, j * nx, jp * nx};

        // vsub positions of the four fields over the 3x3 block
        std::size_t pos[3][3][4];
        for (int dj = 0; dj < 3; ++dj)
            for (int di = 0; di < 3; ++di)
                for (std::size_t f = 0; f < 4; ++f) pos[dj][di][f] = where(f * ncell + joff[dj] + ioff[di]);

        for (std::size_t col = 0; col < vsub.cols(); ++col) {
            Prim block[3][3];
            for (int dj = 0; dj < 3; ++dj)
                for (int di = 0; di < 3; ++di) {
                    const double rho = vsub(pos[dj][di][0], col);
                    if (!(rho > 0.0))
                        throw ModelError("ns2d rhs_rows: non-positive density at cell " +
                                         std::to_string(joff[dj] + ioff[di]) + " (column " + std::to_string(col) + ")");
                    block[dj][di] = prim_from_conserved(rho, vsub(pos[dj][di][1], col), vsub(pos[dj][di][2], col),
                                                        vsub(pos[dj][di][3], col), cfg_.gamma, ec_);
                }
            double rhs4[4];
            cell_rhs(block, inv_dx_, inv_dy_, inv_re_, k_heat_, rhs4);
            out(k, col) = rhs4[field];
        }
    }
    return out;
}

Matrix Ns2D::deterministic_initial() const {
    const std::size_t nx = cfg_.nx, ny = cfg_.ny, ncell = cfg_.cells();
    Matrix state(cfg_.state_dim(), 1);
    const double gm1 = cfg_.gamma - 1.0;
    for (std::size_t j = 0; j < ny; ++j) {
        const double y = static_cast<double>(j) * dy_;
        const double eb = std::exp(-(y - cfg_.b) * (y - cfg_.b) / (cfg_.h * cfg_.h));
        const double ea = std::exp(-(y - cfg_.a) * (y - cfg_.a) / (cfg_.h * cfg_.h));
        const double envelope = (y - cfg_.b) * eb + (y - cfg_.a) * ea;
        const double tanh_lo = std::tanh((y - cfg_.y_min) / cfg_.h);
        const double tanh_hi = std::tanh((y - cfg_.y_max) / cfg_.h);
        const double ubar = 0.5 * cfg_.u_max * (tanh_lo - tanh_hi - 1.0);
        const double T = 0.5 + 0.25 * (tanh_lo - tanh_hi);
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = static_cast<double>(i) * dx_;
            const double u = ubar + (2.0 * cfg_.lx * cfg_.delta / (cfg_.h * cfg_.h)) * envelope * std::sin(10.0 * M_PI * x / cfg_.lx);
            const double v = 10.0 * M_PI * cfg_.delta * (eb + ea) * std::cos(10.0 * M_PI * x / cfg_.lx);
            const double p = 1.0;
            const double rho = cfg_.gamma * cfg_.ma * cfg_.ma * p / T;
            const std::size_t cell = j * nx + i;
            state(cell, 0) = rho;
            state(ncell + cell, 0) = rho * u;
            state(2 * ncell + cell, 0) = rho * v;
            state(3 * ncell + cell, 0) = p / gm1 + 0.5 * rho * (u * u + v * v);
        }
    }
    return state;
}

Matrix Ns2D::uniform_state(double rho, double u, double v, double p) const {
    const std::size_t ncell = cfg_.cells();
    Matrix state(cfg_.state_dim(), 1);
    const double E = p / (cfg_.gamma - 1.0) + 0.5 * rho * (u * u + v * v);
    for (std::size_t cell = 0; cell < ncell; ++cell) {
        state(cell, 0) = rho;
        state(ncell + cell, 0) = rho * u;
        state(2 * ncell + cell, 0) = rho * v;
        state(3 * ncell + cell, 0) = E;
    }
    return state;
}

void Ns2D::perturbation(std::uint64_t seed, std::size_t sample, std::vector<double>& du, std::vector<double>& dv) const {
    const std::size_t nx = cfg_.nx, ny = cfg_.ny;
    du.assign(cfg_.cells(), 0.0);
    dv.assign(cfg_.cells(), 0.0);
    Philox gen(seed);
    for (std::size_t k = 1; k <= cfg_.d; ++k) {
        const double xi = gen.normal(rng_stream::initial_condition, sample * cfg_.d + (k - 1));
        const double lambda = cfg_.lambda_scale / (static_cast<double>(k) * static_cast<double>(k));
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = static_cast<double>(j) * dy_;
            const double envelope = (y - cfg_.b) * std::exp(-(y - cfg_.b) * (y - cfg_.b) / (cfg_.h * cfg_.h)) +
                                    (y - cfg_.a) * std::exp(-(y - cfg_.a) * (y - cfg_.a) / (cfg_.h * cfg_.h));
            if (envelope == 0.0) continue;
            for (std::size_t i = 0; i < nx; ++i) {
                const double x = static_cast<double>(i) * dx_;
                const double phase = 2.0 * static_cast<double>(k) * M_PI * x / cfg_.lx;
                du[j * nx + i] += lambda * envelope * std::sin(phase) * xi;
                dv[j * nx + i] += lambda * envelope * std::cos(phase) * xi;
            }
        }
    }
}

Matrix Ns2D::ensemble_from_base(const Matrix& base, std::uint64_t seed) const {
    const std::size_t ncell = cfg_.cells();
    if (base.rows() != cfg_.state_dim() || base.cols() != 1) throw ModelError("ns2d ensemble: base must be a single state column");
    Matrix v(cfg_.state_dim(), cfg_.samples);
    std::vector<double> du, dv;
    for (std::size_t s = 0; s < cfg_.samples; ++s) {
        perturbation(seed, s, du, dv);
        double* c = v.col(s);
        for (std::size_t cell = 0; cell < ncell; ++cell) {
            const double rho = base(cell, 0);
            const double u = base(ncell + cell, 0) / rho + du[cell];
            const double w = base(2 * ncell + cell, 0) / rho + dv[cell];
            c[cell] = rho;
            c[ncell + cell] = rho * u;
            c[2 * ncell + cell] = rho * w;
            c[3 * ncell + cell] = base(3 * ncell + cell, 0);
        }
    }
    return v;
}

QuadratureWeights Ns2D::weights() const {
    return QuadratureWeights::monte_carlo(std::vector<double>(cfg_.state_dim(), dx_ * dy_), cfg_.samples);
}

}  // namespace tdb::models

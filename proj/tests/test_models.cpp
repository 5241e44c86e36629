#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "tdb/integrate.hpp"
#include "tdb/models/burgers1d.hpp"
#include "tdb/models/diffusion1d.hpp"
#include "tdb/models/ns2d.hpp"

using namespace tdb;
using namespace tdb::models;

namespace {

BurgersConfig small_burgers(std::size_t n = 101, std::size_t s = 8) {
    BurgersConfig cfg;
    cfg.n = n;
    cfg.samples = s;
    cfg.d = 4;
    cfg.kappa = 2.0 / 2.5e-4;
    return cfg;
}

// independent scalar-loop transcription of the burgers right-hand side
double burgers_oracle_entry(const Burgers1D& m, const double* v, std::size_t i, double t, std::size_t sample) {
    const BurgersConfig& cfg = m.config();
    const std::size_t n = cfg.n;
    const double dx = 1.0 / double(n - 1);
    const double inv_2dx = 1.0 / (2.0 * dx);
    const double inv_dx2 = 1.0 / (dx * dx);
    if (i == 0) {
        const double vx = (-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv_2dx;
        const double vxx = (v[0] - 2.0 * v[1] + v[2]) * inv_dx2;
        double r = cfg.nu * vxx - cfg.kappa * (v[0] - m.boundary_value(t, sample));
        if (cfg.advection) r -= v[0] * vx;
        return r;
    }
    if (i == n - 1) {
        const double vx = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * inv_2dx;
        const double vxx = (v[n - 1] - 2.0 * v[n - 2] + v[n - 3]) * inv_dx2;
        double r = cfg.nu * vxx - cfg.kappa * v[n - 1];
        if (cfg.advection) r -= v[n - 1] * vx;
        return r;
    }
    const double vx = (v[i + 1] - v[i - 1]) * inv_2dx;
    const double vxx = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_dx2;
    double r = cfg.nu * vxx;
    if (cfg.advection) r -= v[i] * vx;
    return r;
}

}  // namespace

TEST_CASE("burgers: constant state has zero interior RHS") {
    Burgers1D m(small_burgers(), 7);
    Matrix v(101, 3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 101; ++i) v(i, j) = 0.7;
    const Matrix f = m.rhs_columns(0.0, v);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 1; i + 1 < 101; ++i) CHECK(f(i, j) == 0.0);
}

TEST_CASE("burgers: second-order convergence of the diffusion stencil") {
    auto interior_error = [](std::size_t n) {
        BurgersConfig cfg = small_burgers(n, 4);
        cfg.advection = false;  // test hook: pure diffusion
        Burgers1D m(cfg, 7);
        Matrix v(n, 1);
        for (std::size_t i = 0; i < n; ++i) v(i, 0) = std::sin(2.0 * M_PI * m.grid_point(i));
        const Matrix f = m.rhs_columns(0.0, v);
        double err = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double want = -4.0 * M_PI * M_PI * cfg.nu * std::sin(2.0 * M_PI * m.grid_point(i));
            err = std::max(err, std::abs(f(i, 0) - want));
        }
        return err;
    };
    const double e1 = interior_error(101), e2 = interior_error(201);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.9);
    CHECK(order < 2.1);
}

TEST_CASE("burgers: rhs_columns matches the scalar-loop oracle bit-for-bit") {
    BurgersConfig cfg = small_burgers(405, 4);
    Burgers1D m(cfg, 42);
    const Matrix v0 = m.initial_ensemble();
    const double t = 0.37;
    const Matrix f = m.rhs_columns(t, v0);
    for (std::size_t j = 0; j < v0.cols(); ++j)
        for (std::size_t i = 0; i < cfg.n; ++i) CHECK(f(i, j) == burgers_oracle_entry(m, v0.col(j), i, t, j));
}

TEST_CASE("burgers: rhs_rows equals the selected rows of rhs_columns") {
    BurgersConfig cfg = small_burgers(101, 6);
    Burgers1D m(cfg, 21);
    const Matrix v0 = m.initial_ensemble();
    const double t = 0.11;
    const Matrix full = m.rhs_columns(t, v0);

    auto check_rows = [&](std::vector<std::size_t> rows) {
        const auto adj = m.adjacency(rows);
        std::vector<std::size_t> all(rows.begin(), rows.end());
        all.insert(all.end(), adj.begin(), adj.end());
        const Matrix vsub = take_rows(v0, all);
        const Matrix got = m.rhs_rows(t, rows, adj, vsub);
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::size_t j = 0; j < v0.cols(); ++j) CHECK(got(k, j) == full(rows[k], j));
    };
    std::vector<std::size_t> every(cfg.n);
    std::iota(every.begin(), every.end(), std::size_t{0});
    check_rows(every);
    check_rows({37});
    check_rows({0});  // stochastic boundary row carries the penalty term
    check_rows({0, 50, 100});

    // missing adjacency is an error
    std::vector<std::size_t> rows{10};
    Matrix bad(1, v0.cols());
    CHECK_THROWS_AS(m.rhs_rows(t, rows, {}, bad), ModelError);
}

TEST_CASE("burgers: discrete energy is non-increasing with homogeneous boundaries") {
    BurgersConfig cfg = small_burgers(101, 4);
    cfg.sigma_t = 0.0;
    cfg.bc_sin_amplitude = 0.0;  // homogeneous Dirichlet both ends
    Burgers1D m(cfg, 5);
    const QuadratureWeights w = m.weights();
    Matrix v = m.initial_ensemble();
    const double dt = 2.5e-4;
    double t = 0.0;
    double prev = linalg::weighted_frobenius(v, w);
    for (int k = 0; k < 100; ++k) {
        v = rk4_fom(m, v, t, dt);
        t += dt;
        const double now = linalg::weighted_frobenius(v, w);
        CHECK(now <= prev * (1.0 + 1e-12));
        prev = now;
    }
}

TEST_CASE("burgers: initial ensemble structure") {
    BurgersConfig cfg = small_burgers(101, 16);
    cfg.sigma_x = 0.0;
    Burgers1D deterministic(cfg, 9);
    const Matrix v0 = deterministic.initial_ensemble();
    for (std::size_t j = 1; j < v0.cols(); ++j)
        for (std::size_t i = 0; i < cfg.n; ++i) CHECK(v0(i, j) == v0(i, 0));

    CHECK(Burgers1D::initial_profile(0.0) == doctest::Approx(0.0));

    cfg.sigma_x = 0.005;
    Burgers1D m(cfg, 9);
    const auto& lambda = m.kernel_eigenvalues();
    for (std::size_t i = 0; i + 1 < lambda.size(); ++i) CHECK(lambda[i] >= lambda[i + 1]);
    for (double l : lambda) CHECK(l >= 0.0);

    // full spectrum: non-negative and summing to the kernel trace
    const auto full = linalg::sym_eig(m.kernel_matrix());
    double sum = 0.0;
    for (double l : full.values) {
        CHECK(l >= -1e-10);
        sum += l;
    }
    CHECK(std::abs(sum - double(cfg.n)) <= 1e-10 * double(cfg.n));
}

TEST_CASE("diffusion: periodic laplacian basics") {
    DiffusionConfig cfg;
    cfg.n = 128;
    cfg.samples = 4;
    cfg.nu = 0.01;
    Diffusion1D m(cfg);

    Matrix c(cfg.n, 1);
    for (std::size_t i = 0; i < cfg.n; ++i) c(i, 0) = 3.25;
    CHECK(m.rhs_columns(0.0, c).max_abs() == 0.0);

    // sin eigenfunction, second-order accurate
    auto eig_error = [&](std::size_t n) {
        DiffusionConfig c2;
        c2.n = n;
        c2.nu = 0.01;
        Diffusion1D mm(c2);
        Matrix v(n, 1);
        const double dx = 1.0 / double(n);
        for (std::size_t i = 0; i < n; ++i) v(i, 0) = std::sin(2.0 * M_PI * i * dx);
        const Matrix f = mm.rhs_columns(0.0, v);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            err = std::max(err, std::abs(f(i, 0) + 4.0 * M_PI * M_PI * c2.nu * std::sin(2.0 * M_PI * i * dx)));
        return err;
    };
    const double order = std::log2(eig_error(64) / eig_error(128));
    CHECK(order > 1.9);
    CHECK(order < 2.1);

    // linearity
    const Matrix v1 = oracle::random_matrix(cfg.n, 3, 31);
    const Matrix v2 = oracle::random_matrix(cfg.n, 3, 32);
    Matrix mix(cfg.n, 3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < cfg.n; ++i) mix(i, j) = 2.0 * v1(i, j) - 0.5 * v2(i, j);
    const Matrix fmix = m.rhs_columns(0.0, mix);
    const Matrix f1 = m.rhs_columns(0.0, v1);
    const Matrix f2 = m.rhs_columns(0.0, v2);
    double err = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < cfg.n; ++i)
            err = std::max(err, std::abs(fmix(i, j) - (2.0 * f1(i, j) - 0.5 * f2(i, j))));
    CHECK(err <= 1e-13 * fmix.max_abs());

    // row path with periodic wrap
    const Matrix v = oracle::random_matrix(cfg.n, 2, 33);
    const Matrix full = m.rhs_columns(0.0, v);
    std::vector<std::size_t> rows{0, 64, 127};
    const auto adj = m.adjacency(rows);
    std::vector<std::size_t> all(rows.begin(), rows.end());
    all.insert(all.end(), adj.begin(), adj.end());
    const Matrix got = m.rhs_rows(0.0, rows, adj, take_rows(v, all));
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::size_t j = 0; j < 2; ++j) CHECK(got(k, j) == full(rows[k], j));
}

namespace {

NSConfig small_ns(std::size_t nx = 32, std::size_t ny = 32, std::size_t s = 4) {
    NSConfig cfg;
    cfg.nx = nx;
    cfg.ny = ny;
    cfg.samples = s;
    cfg.d = 4;
    return cfg;
}

// smooth periodic manufactured state
Matrix smooth_state(const Ns2D& m) {
    const NSConfig& cfg = m.config();
    Matrix v(cfg.state_dim(), 1);
    const std::size_t ncell = cfg.cells();
    for (std::size_t j = 0; j < cfg.ny; ++j)
        for (std::size_t i = 0; i < cfg.nx; ++i) {
            const double x = 2.0 * M_PI * double(i) / double(cfg.nx);
            const double y = 2.0 * M_PI * double(j) / double(cfg.ny);
            const double rho = 0.8 + 0.1 * std::sin(x) * std::cos(y);
            const double u = 0.3 * std::sin(x + 0.5) * std::sin(y);
            const double w = 0.2 * std::cos(x) * std::sin(y + 0.3);
            const double p = 1.0 + 0.05 * std::cos(x + y);
            const std::size_t c = m.cell_index(i, j);
            v(c, 0) = rho;
            v(ncell + c, 0) = rho * u;
            v(2 * ncell + c, 0) = rho * w;
            v(3 * ncell + c, 0) = p / (cfg.gamma - 1.0) + 0.5 * rho * (u * u + w * w);
        }
    return v;
}

}  // namespace

TEST_CASE("ns2d: quiescent state is an equilibrium") {
    Ns2D m(small_ns());
    const Matrix v = m.uniform_state(1.0, 0.0, 0.0, 1.0);
    CHECK(m.rhs_columns(0.0, v).max_abs() <= 1e-12);
}

TEST_CASE("ns2d: 1D shear reduces to a viscous laplacian in y") {
    auto shear_error = [](std::size_t ny) {
        NSConfig cfg = small_ns(8, ny, 1);
        Ns2D m(cfg);
        const std::size_t ncell = cfg.cells();
        Matrix v(cfg.state_dim(), 1);
        const double rho = 0.7, T = 0.5;
        const double p = rho * T / (cfg.gamma * cfg.ma * cfg.ma);
        for (std::size_t j = 0; j < cfg.ny; ++j)
            for (std::size_t i = 0; i < cfg.nx; ++i) {
                const double y = double(j) / double(cfg.ny) * cfg.ly;
                const double u = 0.4 * std::sin(2.0 * M_PI * y / cfg.ly);
                const std::size_t c = m.cell_index(i, j);
                v(c, 0) = rho;
                v(ncell + c, 0) = rho * u;
                v(2 * ncell + c, 0) = 0.0;
                v(3 * ncell + c, 0) = p / (cfg.gamma - 1.0) + 0.5 * rho * u * u;
            }
        const Matrix f = m.rhs_columns(0.0, v);
        for (std::size_t c = 0; c < ncell; ++c) CHECK(std::abs(f(c, 0)) <= 1e-14);
        double err = 0.0;
        const double k = 2.0 * M_PI / cfg.ly;
        for (std::size_t j = 0; j < cfg.ny; ++j) {
            const double y = double(j) / double(cfg.ny) * cfg.ly;
            const double want = -(1.0 / cfg.re) * 0.4 * k * k * std::sin(k * y);
            err = std::max(err, std::abs(f(ncell + m.cell_index(3, j), 0) - want));
        }
        return err;
    };
    const double order = std::log2(shear_error(32) / shear_error(64));
    CHECK(order > 1.9);
    CHECK(order < 2.1);
}

TEST_CASE("ns2d: full operator converges at second order on a smooth state") {
    auto error_vs_fine = [](std::size_t nx) {
        Ns2D mfine(small_ns(128, 128, 1));
        const Matrix fine = mfine.rhs_columns(0.0, smooth_state(mfine));
        Ns2D mcoarse(small_ns(nx, nx, 1));
        const Matrix coarse = mcoarse.rhs_columns(0.0, smooth_state(mcoarse));
        const std::size_t stride = 128 / nx;
        double err = 0.0;
        for (std::size_t f = 0; f < 4; ++f)
            for (std::size_t j = 0; j < nx; ++j)
                for (std::size_t i = 0; i < nx; ++i)
                    err = std::max(err, std::abs(coarse(mcoarse.global_index(f, i, j), 0) -
                                                 fine(mfine.global_index(f, i * stride, j * stride), 0)));
        return err;
    };
    const double order = std::log2(error_vs_fine(16) / error_vs_fine(32));
    CHECK(order > 1.85);
    CHECK(order < 2.15);
}

TEST_CASE("ns2d: rhs_rows equals the selected rows of rhs_columns, with wrap") {
    Ns2D m(small_ns(16, 12, 3));
    const NSConfig& cfg = m.config();
    Matrix base = smooth_state(m);
    Matrix v(cfg.state_dim(), 3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < cfg.state_dim(); ++i) v(i, j) = base(i, 0) * (1.0 + 0.01 * double(j));
    const Matrix full = m.rhs_columns(0.0, v);

    auto check_rows = [&](std::vector<std::size_t> rows) {
        const auto adj = m.adjacency(rows);
        std::vector<std::size_t> all(rows.begin(), rows.end());
        all.insert(all.end(), adj.begin(), adj.end());
        const Matrix got = m.rhs_rows(0.0, rows, adj, take_rows(v, all));
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::size_t j = 0; j < 3; ++j) {
                const double scale = std::max(1.0, std::abs(full(rows[k], j)));
                CHECK(std::abs(got(k, j) - full(rows[k], j)) <= 1e-14 * scale);
            }
    };
    check_rows({m.global_index(0, 5, 4)});  // interior density row
    check_rows({m.global_index(2, 0, 0)});  // wrap-around corner
    check_rows({m.global_index(1, 15, 3), m.global_index(3, 0, 11), m.global_index(0, 8, 6)});

    std::vector<std::size_t> rows{m.global_index(0, 5, 4)};
    Matrix bad(1, 3);
    CHECK_THROWS_AS(m.rhs_rows(0.0, rows, {}, bad), ModelError);
}

TEST_CASE("ns2d: grid sums of rho and E are conserved over an rk4 step") {
    Ns2D m(small_ns(32, 32, 1));
    const NSConfig& cfg = m.config();
    const std::size_t ncell = cfg.cells();
    Matrix v = smooth_state(m);
    auto sums = [&](const Matrix& s) {
        double srho = 0.0, se = 0.0;
        for (std::size_t c = 0; c < ncell; ++c) {
            srho += s(c, 0);
            se += s(3 * ncell + c, 0);
        }
        return std::make_pair(srho, se);
    };
    const auto [rho0, e0] = sums(v);
    const Matrix v1 = rk4_fom(m, v, 0.0, 1e-4);
    const auto [rho1, e1] = sums(v1);
    CHECK(std::abs(rho1 - rho0) <= 1e-10 * std::abs(rho0));
    CHECK(std::abs(e1 - e0) <= 1e-10 * std::abs(e0));
}

TEST_CASE("ns2d: ensemble construction") {
    NSConfig cfg = small_ns(24, 24, 8);
    cfg.lambda_scale = 0.0;
    Ns2D quiet(cfg);
    const Matrix base = quiet.deterministic_initial();
    const Matrix v = quiet.ensemble_from_base(base, 77);
    for (std::size_t j = 0; j < cfg.samples; ++j)
        for (std::size_t i = 0; i < cfg.state_dim(); ++i) CHECK(v(i, j) == base(i, 0));

    cfg.lambda_scale = 10.0;
    Ns2D m(cfg);
    std::vector<double> du, dv;
    m.perturbation(77, 0, du, dv);
    // negligible far from the shear layers
    double far = 0.0;
    for (std::size_t i = 0; i < cfg.nx; ++i) far = std::max(far, std::abs(du[m.cell_index(i, 2)]));
    CHECK(far <= 1e-8 * cfg.u_max);

    // ensemble mean of the perturbation shrinks like 1/sqrt(s)
    NSConfig big = small_ns(8, 48, 1000);
    big.d = 4;
    Ns2D mb(big);
    const std::size_t probe = mb.cell_index(3, 48 / 2 + 3);
    double mean = 0.0, var = 0.0;
    std::vector<double> vals(big.samples);
    for (std::size_t s = 0; s < big.samples; ++s) {
        mb.perturbation(123, s, du, dv);
        vals[s] = du[probe];
        mean += vals[s];
    }
    mean /= double(big.samples);
    for (double x : vals) var += (x - mean) * (x - mean);
    var /= double(big.samples - 1);
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(var / double(big.samples)));
}

TEST_CASE("ns2d: non-positive density is rejected with the grid index") {
    Ns2D m(small_ns(8, 8, 1));
    Matrix v = m.uniform_state(1.0, 0.1, 0.0, 1.0);
    v(10, 0) = -0.5;
    CHECK_THROWS_AS(m.rhs_columns(0.0, v), ModelError);
}

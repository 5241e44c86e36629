#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tdb/dbo.hpp"
#include "tdb/integrate.hpp"
#include "tdb/models/burgers1d.hpp"
#include "tdb/models/diffusion1d.hpp"

using namespace tdb;
using oracle::random_matrix;

namespace {

QuadratureWeights uniform_weights(std::size_t n, std::size_t s) {
    return QuadratureWeights::monte_carlo(std::vector<double>(n, 1.0 / double(n)), s);
}

DBOState random_state(std::size_t n, std::size_t s, std::size_t r, const QuadratureWeights& w, std::uint64_t seed) {
    DBOState st;
    st.u = linalg::reorthonormalize(random_matrix(n, r, seed), w.wx).q;
    st.y = linalg::reorthonormalize(random_matrix(s, r, seed + 1), w.wxi).q;
    st.sigma = random_matrix(r, r, seed + 2);
    for (std::size_t i = 0; i < r; ++i) st.sigma(i, i) += 3.0;  // keep it well conditioned
    return st;
}

// naive oracle for the evolution equations: forms the n x n and s x s
// projectors explicitly
DBODerivative dense_rhs_oracle(const DBOState& st, const Matrix& f, const QuadratureWeights& w) {
    using namespace oracle;
    const std::size_t n = st.space_dim(), s = st.sample_dim(), r = st.rank();
    Matrix wx(n, n), wxi(s, s);
    for (std::size_t i = 0; i < n; ++i) wx(i, i) = w.wx[i];
    for (std::size_t j = 0; j < s; ++j) wxi(j, j) = w.wxi[j];

    const Matrix ut_wx = matmul(transpose(st.u), wx);
    const Matrix f_wxi_y = matmul(matmul(f, wxi), st.y);
    DBODerivative d;
    d.dsigma = matmul(ut_wx, f_wxi_y);

    // Sigma inverse via the dense svd oracle
    const auto svd = dense_svd(st.sigma);
    Matrix sig_inv(r, r);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) {
            double acc = 0.0;
            for (std::size_t k = 0; k < r; ++k) acc += svd.v(a, k) / svd.sigma[k] * svd.u(b, k);
            sig_inv(a, b) = acc;
        }

    Matrix proj_u = Matrix::identity(n);
    const Matrix uutwx = matmul(st.u, ut_wx);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) proj_u(i, j) -= uutwx(i, j);
    d.du = matmul(matmul(proj_u, f_wxi_y), sig_inv);

    Matrix proj_y = Matrix::identity(s);
    const Matrix yytwxi = matmul(st.y, matmul(transpose(st.y), wxi));
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t i = 0; i < s; ++i) proj_y(i, j) -= yytwxi(i, j);
    d.dy = matmul(matmul(proj_y, matmul(matmul(transpose(f), wx), st.u)), transpose(sig_inv));
    return d;
}

}  // namespace

TEST_CASE("init_from_samples recovers exact low-rank data") {
    const std::size_t n = 20, s = 12, r = 3;
    const QuadratureWeights w = uniform_weights(n, s);
    const DBOState src = random_state(n, s, r, w, 11);
    Matrix v0(n, s);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < s; ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b) acc += src.u(i, a) * src.sigma(a, b) * src.y(j, b);
            v0(i, j) = acc;
        }
    double residual = -1.0;
    const DBOState st = init_from_samples(v0, r, w, &residual);
    CHECK(residual <= 1e-10 * linalg::weighted_frobenius(v0, w));  // exact rank-r: reported drop is zero
    Matrix recon(n, s);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < s; ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b) acc += st.u(i, a) * st.sigma(a, b) * st.y(j, b);
            recon(i, j) = acc;
        }
    CHECK(linalg::max_abs_diff(recon, v0) <= 1e-10 * v0.max_abs());

    // rank-1 recovery up to sign
    Matrix v1(n, s);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < s; ++j) v1(i, j) = src.u(i, 0) * 2.0 * src.y(j, 0);
    const DBOState st1 = init_from_samples(v1, 1, w);
    CHECK(st1.sigma(0, 0) == doctest::Approx(2.0));

    // asking beyond the achievable rank names what is achievable
    try {
        init_from_samples(v1, 3, w);
        CHECK(false);
    } catch (const RankDeficiencyError& e) {
        CHECK(e.achievable == 1);
    }
}

TEST_CASE("init_from_samples singular values match the dense oracle on the sampled IC") {
    models::BurgersConfig cfg;
    cfg.n = 405;
    cfg.samples = 256;
    cfg.kappa = 2.0 / 6.25e-5;
    models::Burgers1D model(cfg, 1234);
    const QuadratureWeights w = model.weights();
    const Matrix v0 = model.initial_ensemble();
    const DBOState st = init_from_samples(v0, 5, w);

    // oracle: scale rows/cols by sqrt(weights) and take the dense SVD
    Matrix scaled(v0.rows(), v0.cols());
    for (std::size_t i = 0; i < v0.rows(); ++i)
        for (std::size_t j = 0; j < v0.cols(); ++j)
            scaled(i, j) = std::sqrt(w.wx[i]) * v0(i, j) * std::sqrt(w.wxi[j]);
    const auto svd = oracle::dense_svd(scaled);
    const auto sv = state_singular_values(st);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(sv[i] - svd.sigma[i]) <= 1e-8 * svd.sigma[0]);
}

TEST_CASE("dbo_rhs_decompressed: in-span forcing leaves the subspaces still") {
    const std::size_t n = 14, s = 10, r = 3;
    const QuadratureWeights w = uniform_weights(n, s);
    const DBOState st = random_state(n, s, r, w, 21);
    const Matrix a = random_matrix(r, r, 23);
    // F = U A Y^T
    const Matrix f = linalg::matmul(st.u, linalg::matmul_bt(a, st.y));
    const DBODerivative d = dbo_rhs_decompressed(st, f, w);
    CHECK(linalg::max_abs_diff(d.dsigma, a) <= 1e-12 * a.max_abs());
    CHECK(d.du.max_abs() <= 1e-12 * a.max_abs());
    CHECK(d.dy.max_abs() <= 1e-12 * a.max_abs());
}

TEST_CASE("dbo_rhs_decompressed: homogeneous linear model keeps Y frozen") {
    models::DiffusionConfig cfg;
    cfg.n = 64;
    cfg.samples = 24;
    cfg.nu = 0.00125;
    models::Diffusion1D model(cfg);
    const QuadratureWeights w = model.weights();
    const DBOState st = random_state(cfg.n, cfg.samples, 4, w, 31);
    const Matrix v = linalg::matmul(st.u, linalg::matmul_bt(st.sigma, st.y));
    const Matrix f = model.rhs_columns(0.0, v);
    const DBODerivative d = dbo_rhs_decompressed(st, f, w);
    const auto sv = state_singular_values(st);
    CHECK(d.dy.max_abs() <= 1e-12 * sv.front());

    // dSigma = L_r Sigma and dU = L U - U L_r
    const Matrix lr = reduced_linear_matrix(model, st.u, w);
    CHECK(linalg::max_abs_diff(d.dsigma, linalg::matmul(lr, st.sigma)) <= 1e-10 * sv.front());
    const Matrix lu = model.linear_action(st.u);
    const Matrix want_du = lu - linalg::matmul(st.u, lr);
    CHECK(linalg::max_abs_diff(d.du, want_du) <= 1e-10 * lu.max_abs());
}

TEST_CASE("dbo_rhs_decompressed matches the dense projector oracle") {
    const std::size_t n = 12, s = 9, r = 3;
    const QuadratureWeights w = uniform_weights(n, s);
    const DBOState st = random_state(n, s, r, w, 41);
    const Matrix f = random_matrix(n, s, 43);
    const DBODerivative got = dbo_rhs_decompressed(st, f, w);
    const DBODerivative want = dense_rhs_oracle(st, f, w);
    CHECK(linalg::max_abs_diff(got.dsigma, want.dsigma) <= 1e-12 * std::max(1.0, want.dsigma.max_abs()));
    CHECK(linalg::max_abs_diff(got.du, want.du) <= 1e-12 * std::max(1.0, want.du.max_abs()));
    CHECK(linalg::max_abs_diff(got.dy, want.dy) <= 1e-12 * std::max(1.0, want.dy.max_abs()));
}

TEST_CASE("dynamical orthogonality holds for arbitrary forcing") {
    const std::size_t n = 18, s = 11, r = 4;
    const QuadratureWeights w = uniform_weights(n, s);
    for (std::uint64_t seed : {51u, 52u, 53u}) {
        const DBOState st = random_state(n, s, r, w, seed);
        const Matrix f = random_matrix(n, s, seed + 100);
        const DBODerivative d = dbo_rhs_decompressed(st, f, w);
        CHECK(linalg::weighted_inner(st.u, d.du, w.wx).max_abs() <= 1e-10 * std::max(1.0, d.du.max_abs()));
        CHECK(linalg::weighted_inner(st.y, d.dy, w.wxi).max_abs() <= 1e-10 * std::max(1.0, d.dy.max_abs()));
    }
}

TEST_CASE("reduced_linear_matrix trivial and oracle cases") {
    const std::size_t n = 8, s = 6, r = 2;
    const QuadratureWeights w = uniform_weights(n, s);
    const DBOState st = random_state(n, s, r, w, 61);

    // identity-action model
    struct IdModel : Model {
        std::size_t n_;
        double c_;
        IdModel(std::size_t n, double c) : n_(n), c_(c) {}
        std::size_t state_size() const override { return n_; }
        std::string name() const override { return "id"; }
        std::vector<std::size_t> adjacency(std::span<const std::size_t>) const override { return {}; }
        Matrix rhs_columns(double, const Matrix& v, std::span<const std::size_t> = {}) const override {
            Matrix out = v;
            out *= c_;
            return out;
        }
        Matrix rhs_rows(double, std::span<const std::size_t> rows, std::span<const std::size_t>,
                        const Matrix& vsub) const override {
            Matrix out(rows.size(), vsub.cols());
            for (std::size_t j = 0; j < vsub.cols(); ++j)
                for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = c_ * vsub(i, j);
            return out;
        }
    };
    CHECK(linalg::max_abs_diff(reduced_linear_matrix(IdModel(n, 1.0), st.u, w), Matrix::identity(r)) <= 1e-12);
    Matrix scaled = Matrix::identity(r);
    scaled *= 2.5;
    CHECK(linalg::max_abs_diff(reduced_linear_matrix(IdModel(n, 2.5), st.u, w), scaled) <= 1e-12);

    // 8-point diffusion vs dense assembly
    models::DiffusionConfig cfg;
    cfg.n = 8;
    cfg.nu = 0.3;
    models::Diffusion1D model(cfg);
    const QuadratureWeights wd = QuadratureWeights::monte_carlo(std::vector<double>(8, 1.0 / 8.0), s);
    const DBOState std8 = random_state(8, s, 2, wd, 62);
    Matrix dense_l(8, 8);
    const double invdx2 = 64.0;  // (1/8)^-2 on the unit circle grid
    for (std::size_t i = 0; i < 8; ++i) {
        dense_l(i, i) = -2.0 * cfg.nu * invdx2;
        dense_l(i, (i + 1) % 8) = cfg.nu * invdx2;
        dense_l(i, (i + 7) % 8) = cfg.nu * invdx2;
    }
    const Matrix want = oracle::triple_product(std8.u, oracle::matmul(dense_l, std8.u), wd.wx);
    CHECK(linalg::max_abs_diff(reduced_linear_matrix(model, std8.u, wd), want) <= 1e-12 * want.max_abs());
}

TEST_CASE("total_error trivial, oracle, and invariance cases") {
    const std::size_t n = 16, s = 10, r = 3;
    const QuadratureWeights w = uniform_weights(n, s);
    const DBOState st = random_state(n, s, r, w, 71);
    const Matrix recon = linalg::matmul(st.u, linalg::matmul_bt(st.sigma, st.y));
    CHECK(total_error(st, recon, w) <= 1e-12);

    // rank-1 with sigma = 2 against a zero snapshot
    DBOState one;
    one.u = Matrix(n, 1);
    one.y = Matrix(s, 1);
    for (std::size_t i = 0; i < n; ++i) one.u(i, 0) = 1.0;  // unit in the uniform weighted norm
    for (std::size_t j = 0; j < s; ++j) one.y(j, 0) = 1.0;
    one.sigma = Matrix(1, 1);
    one.sigma(0, 0) = 2.0;
    CHECK(total_error(one, Matrix(n, s), w) == doctest::Approx(2.0));

    const Matrix v_fom = random_matrix(n, s, 73);
    const double got = total_error(st, v_fom, w, 5);  // non-trivial row blocking
    const double want = oracle::weighted_frob(recon - v_fom, w.wx, w.wxi);
    CHECK(std::abs(got - want) <= 1e-12 * want);

    // invariance under an in-subspace rotation
    std::vector<double> unit(r, 1.0);
    const Matrix q = linalg::reorthonormalize(random_matrix(r, r, 79), unit).q;
    DBOState rot;
    rot.u = linalg::matmul(st.u, q);
    rot.sigma = linalg::matmul(linalg::transpose(q), st.sigma);
    rot.y = st.y;
    CHECK(std::abs(total_error(rot, v_fom, w) - want) <= 1e-10 * want);

    CHECK_THROWS_AS(total_error(st, Matrix(n + 1, s), w), DimensionError);
}

TEST_CASE("state singular values: trivial and oracle cases") {
    DBOState st;
    st.sigma = Matrix(2, 2, {3, 0, 0, 1});
    auto sv = state_singular_values(st);
    CHECK(sv[0] == doctest::Approx(3.0));
    CHECK(sv[1] == doctest::Approx(1.0));

    const double th = 0.7;
    st.sigma = Matrix(2, 2, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)});
    sv = state_singular_values(st);
    CHECK(sv[0] == doctest::Approx(1.0));
    CHECK(sv[1] == doctest::Approx(1.0));

    st.sigma = oracle::random_with_spectrum(5, 5, {2.0, 1.4, 0.9, 0.5, 0.3}, 83);
    sv = state_singular_values(st);
    const auto want = oracle::twosided_jacobi_singular_values(st.sigma);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(sv[i] - want[i]) <= 1e-12 * want[0]);
}

TEST_CASE("orthonormality defect: fresh state, scaled state, and an integration run") {
    const std::size_t n = 30, s = 12, r = 3;
    const QuadratureWeights w = uniform_weights(n, s);
    const Matrix v0 = random_matrix(n, s, 91);
    const DBOState st = init_from_samples(v0, r, w);
    auto [du, dy] = orthonormality_defect(st, w);
    CHECK(du <= 1e-12);
    CHECK(dy <= 1e-12);

    DBOState scaled = st;
    scaled.u *= 2.0;
    auto [du2, dy2] = orthonormality_defect(scaled, w);
    CHECK(du2 == doctest::Approx(3.0));
    CHECK(dy2 <= 1e-12);

    // 100 steps of the burgers model with per-step reorthonormalization
    models::BurgersConfig cfg;
    cfg.n = 101;
    cfg.samples = 16;
    cfg.kappa = 2.0 / 2.5e-4;
    models::Burgers1D model(cfg, 7);
    const QuadratureWeights wb = model.weights();
    DBOState state = init_from_samples(model.initial_ensemble(), 3, wb);
    DecompressedProvider provider(model, wb);
    StepReport rep;
    for (int k = 0; k < 100; ++k) {
        state = rk4_dbo(provider, state, 2.5e-4, wb, rep);
        const auto [a, b] = orthonormality_defect(state, wb);
        CHECK(a <= 1e-10);
        CHECK(b <= 1e-10);
    }
}

TEST_CASE("singular sigma raises with the current rank") {
    DBOState st;
    st.u = Matrix(4, 2);
    st.y = Matrix(4, 2);
    st.sigma = Matrix(2, 2, {1.0, 0.0, 0.0, 1e-14});
    const QuadratureWeights w = uniform_weights(4, 4);
    const Matrix f = Matrix(4, 4);
    try {
        dbo_rhs_decompressed(st, f, w);
        CHECK(false);
    } catch (const SingularSigmaError& e) {
        CHECK(e.rank == 2);
    }
}

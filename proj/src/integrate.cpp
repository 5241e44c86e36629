#include "tdb/integrate.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace tdb {

namespace {
constexpr double kBlowUpLimit = 1e12;

void check_columns(const Matrix& m, double t, const char* what) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const double* c = m.col(j);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double v = c[i];
            if (!std::isfinite(v) || std::abs(v) > kBlowUpLimit)
                throw BlowUpError(std::string(what) + " blew up at t=" + std::to_string(t) + ", column " +
                                      std::to_string(j),
                                  t, j);
        }
    }
}

DBOState advanced(const DBOState& base, const DBODerivative& d, double scale) {
    DBOState s;
    s.u = base.u;
    s.sigma = base.sigma;
    s.y = base.y;
    for (std::size_t j = 0; j < s.u.cols(); ++j)
        for (std::size_t i = 0; i < s.u.rows(); ++i) s.u(i, j) += scale * d.du(i, j);
    for (std::size_t j = 0; j < s.sigma.cols(); ++j)
        for (std::size_t i = 0; i < s.sigma.rows(); ++i) s.sigma(i, j) += scale * d.dsigma(i, j);
    for (std::size_t j = 0; j < s.y.cols(); ++j)
        for (std::size_t i = 0; i < s.y.rows(); ++i) s.y(i, j) += scale * d.dy(i, j);
    return s;
}

void check_derivative(const DBODerivative& d, double t) {
    check_columns(d.du, t, "rk4_dbo dU");
    check_columns(d.dsigma, t, "rk4_dbo dSigma");
    check_columns(d.dy, t, "rk4_dbo dY");
}
}  // namespace

Matrix rk4_fom(const Model& model, const Matrix& v, double t, double dt) {
    if (!(dt > 0.0)) throw Error("rk4_fom: dt must be positive");
    const Matrix k1 = model.rhs_columns(t, v);
    check_columns(k1, t, "rk4_fom stage 1");
    Matrix v2 = v;
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t i = 0; i < v.rows(); ++i) v2(i, j) += 0.5 * dt * k1(i, j);
    const Matrix k2 = model.rhs_columns(t + 0.5 * dt, v2);
    check_columns(k2, t, "rk4_fom stage 2");
    Matrix v3 = v;
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t i = 0; i < v.rows(); ++i) v3(i, j) += 0.5 * dt * k2(i, j);
    const Matrix k3 = model.rhs_columns(t + 0.5 * dt, v3);
    check_columns(k3, t, "rk4_fom stage 3");
    Matrix v4 = v;
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t i = 0; i < v.rows(); ++i) v4(i, j) += dt * k3(i, j);
    const Matrix k4 = model.rhs_columns(t + dt, v4);
    check_columns(k4, t, "rk4_fom stage 4");

    Matrix out = v;
    const double c = dt / 6.0;
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t i = 0; i < v.rows(); ++i)
            out(i, j) += c * (k1(i, j) + 2.0 * k2(i, j) + 2.0 * k3(i, j) + k4(i, j));
    check_columns(out, t + dt, "rk4_fom update");
    return out;
}

DBOState rk4_dbo(DBORhsProvider& provider, const DBOState& state, double dt, const QuadratureWeights& w,
                 StepReport& report) {
    if (!(dt > 0.0)) throw Error("rk4_dbo: dt must be positive");
    const auto start = std::chrono::steady_clock::now();
    const double t = state.t;

    const DBODerivative k1 = provider.eval(state, t, 0);
    check_derivative(k1, t);
    DBOState s2 = advanced(state, k1, 0.5 * dt);
    s2.t = t + 0.5 * dt;
    const DBODerivative k2 = provider.eval(s2, s2.t, 1);
    check_derivative(k2, s2.t);
    DBOState s3 = advanced(state, k2, 0.5 * dt);
    s3.t = t + 0.5 * dt;
    const DBODerivative k3 = provider.eval(s3, s3.t, 2);
    check_derivative(k3, s3.t);
    DBOState s4 = advanced(state, k3, dt);
    s4.t = t + dt;
    const DBODerivative k4 = provider.eval(s4, s4.t, 3);
    check_derivative(k4, s4.t);

    DBOState next = state;
    next.t = t + dt;
    const double c = dt / 6.0;
    auto combine = [c](Matrix& acc, const Matrix& a1, const Matrix& a2, const Matrix& a3, const Matrix& a4) {
        for (std::size_t j = 0; j < acc.cols(); ++j)
            for (std::size_t i = 0; i < acc.rows(); ++i)
                acc(i, j) += c * (a1(i, j) + 2.0 * a2(i, j) + 2.0 * a3(i, j) + a4(i, j));
    };
    combine(next.u, k1.du, k2.du, k3.du, k4.du);
    combine(next.sigma, k1.dsigma, k2.dsigma, k3.dsigma, k4.dsigma);
    combine(next.y, k1.dy, k2.dy, k3.dy, k4.dy);

    // restore the orthonormality constraints; the triangular factors fold
    // into Sigma so the reconstruction is unchanged
    const linalg::Reorth ru = linalg::reorthonormalize(next.u, w.wx);
    const linalg::Reorth ry = linalg::reorthonormalize(next.y, w.wxi);
    next.u = ru.q;
    next.y = ry.q;
    next.sigma = linalg::matmul_bt(linalg::matmul(ru.t, next.sigma), ry.t);
    check_columns(next.sigma, next.t, "rk4_dbo Sigma fold");

    provider.after_step(next);

    report.t = next.t;
    report.dt = dt;
    report.mode = provider.mode();
    report.wall_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
    return next;
}

DBODerivative DecompressedProvider::eval(const DBOState& state, double t, int) {
    // materialize the reconstruction and the full right-hand side; this is the
    // O(n s) reference path
    const Matrix v = linalg::matmul(state.u, linalg::matmul_bt(state.sigma, state.y));
    const Matrix f = model_.rhs_columns(t, v);
    return dbo_rhs_decompressed(state, f, w_);
}

SparseProvider::SparseProvider(const Model& model, const QuadratureWeights& w, const DBOState& initial,
                               SparseProviderConfig cfg)
    : model_(model), w_(w), cfg_(cfg), p_target_(cfg.adaptive ? cfg.controller.p : cfg.p) {
    if (cfg_.adaptive) cfg_.controller.validate();
    carry_.zf_prev = sparse::bootstrap_carry(initial, model_, initial.t, p_target_, cfg_.sampler, w_,
                                             cfg_.gram_truncation_rel);
}

DBODerivative SparseProvider::eval(const DBOState& state, double t, int stage) {
    sparse::SparseRhsOptions opts;
    opts.sampler = cfg_.sampler;
    opts.target_p = p_target_;
    opts.gram_truncation_rel = cfg_.gram_truncation_rel;
    opts.diagnostics = cfg_.diagnostics && stage == 0;
    if (stage == 0) {
        step_target_p_ = p_target_;
        if (has_pending_cols_) opts.fixed_cols = &pending_cols_;
    } else if (cfg_.stage_reuse) {
        opts.fixed_cols = &reuse_cols_;
        opts.fixed_rows = &reuse_rows_;
    }

    sparse::SparseRhsResult res = sparse_rhs(state, model_, t, carry_.zf_prev, opts, w_);

    if (stage == 0) {
        has_pending_cols_ = false;
        // a transient zero right-hand side leaves the carried coefficients alone
        if (res.lowrank.zf.cols() > 0) carry_.zf_prev = res.lowrank.zf;
        stage1_yf_ = std::move(res.yf);
        stage1_sigma_z_ = res.sigma_z;
        last_rows_ = res.lowrank.rows;
        last_cols_ = res.lowrank.cols;
        reuse_rows_ = last_rows_;
        reuse_cols_ = last_cols_;
        last_interp_defect_ = res.interp_defect;
        last_sampled_abs_max_ = res.sampled_abs_max;
        last_lowrank_ = std::move(res.lowrank);
    }
    return std::move(res.deriv);
}

void SparseProvider::after_step(const DBOState&) {
    last_eps_ = sparse::error_indicator(stage1_sigma_z_);
    if (!cfg_.adaptive) return;
    cfg_.controller.p = p_target_;
    const sparse::RankPlan plan = sparse::adapt_rank(cfg_.controller, last_eps_, stage1_yf_);
    if (plan.new_p != p_target_) {
        p_target_ = plan.new_p;
        if (!plan.columns.empty()) {
            pending_cols_ = plan.columns;
            has_pending_cols_ = true;
        }
    }
}

}  // namespace tdb

#include "tdb/sparse_interp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tdb::sparse {

void RankController::validate() const {
    if (!(eps_lower > 0.0) || !(eps_lower < eps_upper)) throw Error("RankController: need 0 < eps_lower < eps_upper");
    if (p_min < 1 || p < p_min || p > p_max) throw Error("RankController: need p_min <= p <= p_max with p_min >= 1");
}

namespace {

// shared correlation-eigen step: returns the kept directions of
// B * Psi * diag(lambda^-1/2) where C = B^T diag(w) B
struct GramBasis {
    Matrix basis;                // input * Psi * Lambda^-1/2, weighted-orthonormal
    std::vector<double> lambda;  // kept eigenvalues, descending
};

GramBasis gram_orthonormalize(const Matrix& b, std::span<const double> w, double rel_tol, bool truncate,
                              const char* who) {
    const std::size_t p = b.cols();
    const Matrix corr = linalg::weighted_inner(b, b, w);
    const linalg::EigResult eig = linalg::sym_eig(corr);
    const double lmax = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    if (lmax <= 0.0) throw RankDeficiencyError(std::string(who) + ": input has no nonzero direction", 0);
    std::size_t keep = 0;
    for (double l : eig.values)
        if (l > rel_tol * lmax) ++keep;
    if (keep < p && !truncate)
        throw RankDeficiencyError(std::string(who) + ": " + std::to_string(p - keep) + " of " + std::to_string(p) +
                                      " directions are numerically dependent",
                                  keep);
    GramBasis out;
    out.lambda.assign(eig.values.begin(), eig.values.begin() + keep);
    Matrix psi(p, keep);
    for (std::size_t c = 0; c < keep; ++c) {
        const double inv_sqrt = 1.0 / std::sqrt(out.lambda[c]);
        for (std::size_t i = 0; i < p; ++i) psi(i, c) = eig.vectors(i, c) * inv_sqrt;
    }
    out.basis = linalg::matmul(b, psi);
    return out;
}

// column/row selection at an arbitrary width: the leverage-extended selector
// covers targets beyond the basis width (bootstrap with p > r, re-widening
// after truncation), narrower targets use the leading directions
std::vector<std::size_t> select_width(const Matrix& basis, std::size_t target, sampling::Sampler sampler) {
    const std::size_t k = basis.cols();
    if (target == 0) throw SelectionError("select_width: zero target");
    if (target > basis.rows()) throw SelectionError("select_width: target exceeds candidate count");
    if (target == k) return sampling::select(sampler, basis).indices;
    if (target < k) {
        std::vector<std::size_t> head(target);
        for (std::size_t i = 0; i < target; ++i) head[i] = i;
        return sampling::select(sampler, take_cols(basis, head)).indices;
    }
    return sampling::ldeim_select(basis, target).indices;
}

struct PipelineResult {
    UFResult uf;
    std::vector<std::size_t> rows;
    Matrix fq;  // n x |q|
    Matrix fp;  // |rows| x s
    Matrix zf;  // s x k
};

// steps 3-9: sample columns, build the spatial basis, sample rows, solve for
// the coefficients
PipelineResult pipeline_from_columns(const DBOState& state, const Model& model, double t,
                                     const std::vector<std::size_t>& q, const std::vector<std::size_t>* fixed_rows,
                                     sampling::Sampler sampler, const QuadratureWeights& w, double gram_rel) {
    PipelineResult out;

    // V_q = U (Sigma Y(q,:)^T), then F at those sample columns
    const Matrix yq = take_rows(state.y, q);
    const Matrix vq = linalg::matmul(state.u, linalg::matmul_bt(state.sigma, yq));
    out.fq = model.rhs_columns(t, vq, q);

    // exactly-zero right-hand side: represent it as a rank-0 factorization
    if (out.fq.max_abs() == 0.0) {
        out.uf = UFResult{Matrix(state.space_dim(), 0), {}};
        out.zf = Matrix(state.sample_dim(), 0);
        return out;
    }

    out.uf = [&] {
        GramBasis g = gram_orthonormalize(out.fq, w.wx, gram_rel, true, "compute_UF");
        return UFResult{std::move(g.basis), std::move(g.lambda)};
    }();

    out.rows = fixed_rows ? *fixed_rows : sampling::select(sampler, out.uf.uf).indices;

    // state values at the selected rows plus stencil closure
    const std::vector<std::size_t> adj = model.adjacency(out.rows);
    std::vector<std::size_t> rows_full(out.rows.begin(), out.rows.end());
    rows_full.insert(rows_full.end(), adj.begin(), adj.end());
    const Matrix usub = take_rows(state.u, rows_full);
    const Matrix vsub = linalg::matmul_bt(linalg::matmul(usub, state.sigma), state.y);
    out.fp = model.rhs_rows(t, out.rows, adj, vsub);

    out.zf = compute_ZF(out.fp, out.uf.uf, out.rows);
    return out;
}

}  // namespace

YFResult compute_YF(const Matrix& zf, std::span<const double> wxi) {
    GramBasis g = gram_orthonormalize(zf, wxi, 1e-24, false, "compute_YF");
    YFResult out;
    out.yf = std::move(g.basis);
    out.sigma_z.resize(g.lambda.size());
    for (std::size_t i = 0; i < g.lambda.size(); ++i) out.sigma_z[i] = std::sqrt(g.lambda[i]);
    return out;
}

UFResult compute_UF(const Matrix& fq, std::span<const double> wx) {
    GramBasis g = gram_orthonormalize(fq, wx, 1e-24, false, "compute_UF");
    return UFResult{std::move(g.basis), std::move(g.lambda)};
}

Matrix compute_ZF(const Matrix& fp, const Matrix& uf, std::span<const std::size_t> rows) {
    if (rows.size() != uf.cols()) throw DimensionError("compute_ZF: row count does not match basis width");
    if (fp.rows() != rows.size()) throw DimensionError("compute_ZF: sampled rows shape mismatch");
    const Matrix sub = take_rows(uf, rows);
    linalg::LUFactors f;
    try {
        f = linalg::lu_factor(sub);
    } catch (const SingularMatrixError&) {
        throw SelectionError("compute_ZF: UF at the selected rows is singular (selection failure)");
    }
    // ZF^T = UF(rows,:)^-1 F(rows,:)
    return linalg::transpose(linalg::lu_solve(f, fp));
}

SparseRhsResult sparse_rhs(const DBOState& state, const Model& model, double t, const Matrix& carry_zf,
                           const SparseRhsOptions& opts, const QuadratureWeights& w) {
    const linalg::LUFactors sig = factor_sigma(state.sigma);

    SparseRhsResult res;

    // 1: column-selection basis from the carried coefficients
    GramBasis gz = gram_orthonormalize(carry_zf, w.wxi, opts.gram_truncation_rel, true, "compute_YF");
    res.yf = std::move(gz.basis);
    res.sigma_z.resize(gz.lambda.size());
    for (std::size_t i = 0; i < gz.lambda.size(); ++i) res.sigma_z[i] = std::sqrt(gz.lambda[i]);

    // 2: sampled columns
    std::vector<std::size_t> q = opts.fixed_cols ? *opts.fixed_cols : select_width(res.yf, opts.target_p, opts.sampler);

    // 3-9
    PipelineResult pipe = pipeline_from_columns(state, model, t, q, opts.fixed_rows, opts.sampler, w,
                                                opts.gram_truncation_rel);

    // 10-12: derivative blocks, two-stage projector applications throughout
    const Matrix a = linalg::weighted_inner(state.u, pipe.uf.uf, w.wx);  // r x k
    const Matrix g = linalg::weighted_inner(pipe.zf, state.y, w.wxi);   // k x r
    DBODerivative d;
    d.dsigma = linalg::matmul(a, g);
    // X = G Sigma^-1  (k x r)
    const Matrix x = linalg::transpose(linalg::lu_solve_transposed(sig, linalg::transpose(g)));
    d.du = linalg::matmul(pipe.uf.uf, x) - linalg::matmul(state.u, linalg::matmul(a, x));
    // X2 = A^T Sigma^-T  (k x r)
    const Matrix x2 = linalg::transpose(linalg::lu_solve(sig, a));
    const Matrix c = linalg::weighted_inner(state.y, pipe.zf, w.wxi);  // r x k
    d.dy = linalg::matmul(pipe.zf, x2) - linalg::matmul(state.y, linalg::matmul(c, x2));

    if (opts.diagnostics && !pipe.rows.empty()) {
        const Matrix fhat_pq = linalg::matmul_bt(take_rows(pipe.uf.uf, pipe.rows), take_rows(pipe.zf, q));
        const Matrix f_pq = take_cols(pipe.fp, q);
        res.interp_defect = linalg::max_abs_diff(fhat_pq, f_pq);
        res.sampled_abs_max = std::max(pipe.fq.max_abs(), pipe.fp.max_abs());
    }

    res.deriv = std::move(d);
    res.lowrank = LowRankRHS{std::move(pipe.uf.uf), std::move(pipe.zf), std::move(q), std::move(pipe.rows),
                             std::move(pipe.uf.lambda_f)};
    return res;
}

Matrix bootstrap_carry(const DBOState& state, const Model& model, double t, std::size_t p, sampling::Sampler sampler,
                       const QuadratureWeights& w, double gram_truncation_rel) {
    const std::vector<std::size_t> q = select_width(state.y, p, sampler);
    PipelineResult pipe = pipeline_from_columns(state, model, t, q, nullptr, sampler, w, gram_truncation_rel);
    return pipe.zf;
}

double error_indicator(std::span<const double> sigma_z) {
    if (sigma_z.empty()) throw Error("error_indicator: empty input");
    double sum = 0.0;
    for (double s : sigma_z) {
        if (!(s >= 0.0)) throw Error("error_indicator: negative singular value");
        sum += s * s;
    }
    if (sum == 0.0) throw Error("error_indicator: all singular values are zero");
    const double last = sigma_z.back();
    return last * last / sum;
}

RankPlan adapt_rank(const RankController& controller, double eps, const Matrix& yf) {
    controller.validate();
    RankPlan plan{controller.p, {}};
    if (eps > controller.eps_upper && controller.p < controller.p_max) {
        plan.new_p = controller.p + 1;
        plan.columns = sampling::ldeim_select(yf, std::min(plan.new_p, yf.rows())).indices;
    } else if (eps < controller.eps_lower && controller.p > controller.p_min) {
        plan.new_p = controller.p - 1;
    }
    return plan;
}

CurDiagnostics cur_diagnostics(const LowRankRHS& lr, const Matrix& yf, const Matrix& f_oracle) {
    CurDiagnostics d{};
    const Matrix fhat = linalg::matmul_bt(lr.uf, lr.zf);
    d.err2 = linalg::spectral_norm(f_oracle - fhat);
    const std::vector<double> sv = linalg::singular_values(f_oracle);
    const std::size_t p = lr.uf.cols();
    d.sigma_next = (p < sv.size()) ? sv[p] : 0.0;
    d.eta_rows = sampling::selection_eta(lr.uf, lr.rows);
    std::vector<std::size_t> qhead(lr.cols.begin(), lr.cols.begin() + std::min(lr.cols.size(), yf.cols()));
    d.eta_cols = sampling::selection_eta(yf, qhead);
    d.bound = (d.eta_rows + d.eta_cols) * d.sigma_next;
    return d;
}

}  // namespace tdb::sparse

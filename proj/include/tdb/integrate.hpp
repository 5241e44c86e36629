#pragma once

#include <cstdint>
#include <optional>

#include "tdb/dbo.hpp"
#include "tdb/model.hpp"
#include "tdb/sparse_interp.hpp"

namespace tdb {

enum class SolveMode { fom, tdb, stdb };

struct StepReport {
    double t = 0.0;
    double dt = 0.0;
    SolveMode mode = SolveMode::fom;
    std::uint64_t wall_ns = 0;
    std::size_t p = 0;   // interpolation rank (sparse runs)
    double eps = 0.0;    // error indicator (sparse runs)
};

// Classical fourth-order Runge-Kutta over the full ensemble matrix ODE.
Matrix rk4_fom(const Model& model, const Matrix& v, double t, double dt);

// Stage derivative source for the factorized ODE.
class DBORhsProvider {
public:
    virtual ~DBORhsProvider() = default;
    virtual DBODerivative eval(const DBOState& state, double t, int stage) = 0;
    // called once per accepted step, after reorthonormalization
    virtual void after_step(const DBOState& accepted) { (void)accepted; }
    virtual SolveMode mode() const = 0;
};

// RK4 over the stacked (U, Sigma, Y) triplet; after the combined update both
// bases are reorthonormalized and the triangular factors fold into Sigma, so
// U Sigma Y^T is unchanged up to round-off.
DBOState rk4_dbo(DBORhsProvider& provider, const DBOState& state, double dt, const QuadratureWeights& w,
                 StepReport& report);

class DecompressedProvider : public DBORhsProvider {
public:
    DecompressedProvider(const Model& model, const QuadratureWeights& w) : model_(model), w_(w) {}
    DBODerivative eval(const DBOState& state, double t, int stage) override;
    SolveMode mode() const override { return SolveMode::tdb; }

private:
    const Model& model_;
    const QuadratureWeights& w_;
};

struct SparseProviderConfig {
    sampling::Sampler sampler = sampling::Sampler::deim;
    std::size_t p = 8;
    bool adaptive = false;
    sparse::RankController controller{};  // used when adaptive
    bool stage_reuse = false;             // stages 2-4 reuse stage-1 selections
    double gram_truncation_rel = 1e-15;
    bool diagnostics = false;
};

// Sparse pipeline provider. The full pipeline re-executes at every RK stage
// with the stage's state; the carried coefficients update once per step, from
// stage 1 (stages 2-4 and the next step's stage 1 use that value).
class SparseProvider : public DBORhsProvider {
public:
    SparseProvider(const Model& model, const QuadratureWeights& w, const DBOState& initial, SparseProviderConfig cfg);

    DBODerivative eval(const DBOState& state, double t, int stage) override;
    void after_step(const DBOState& accepted) override;
    SolveMode mode() const override { return SolveMode::stdb; }

    // step-level observables, valid after the step's stage 1 / after_step
    std::size_t current_p() const { return p_target_; }
    std::size_t step_p() const { return step_target_p_; }  // target during the last step
    std::size_t effective_p() const { return carry_.zf_prev.cols(); }
    double last_eps() const { return last_eps_; }
    const std::vector<std::size_t>& last_rows() const { return last_rows_; }
    const std::vector<std::size_t>& last_cols() const { return last_cols_; }
    const std::vector<double>& last_sigma_z() const { return stage1_sigma_z_; }
    double last_interp_defect() const { return last_interp_defect_; }
    double last_sampled_abs_max() const { return last_sampled_abs_max_; }
    const sparse::LowRankRHS& last_lowrank() const { return last_lowrank_; }
    const Matrix& last_yf() const { return stage1_yf_; }

private:
    const Model& model_;
    const QuadratureWeights& w_;
    SparseProviderConfig cfg_;
    sparse::RHSBasisCarry carry_;
    std::size_t p_target_;
    std::size_t step_target_p_ = 0;
    std::vector<std::size_t> pending_cols_;  // rank-addition plan for the next stage 1
    bool has_pending_cols_ = false;

    // stage-1 stash
    Matrix stage1_yf_;
    std::vector<double> stage1_sigma_z_;
    std::vector<std::size_t> last_rows_, last_cols_;
    std::vector<std::size_t> reuse_rows_, reuse_cols_;
    double last_eps_ = 0.0;
    double last_interp_defect_ = 0.0;
    double last_sampled_abs_max_ = 0.0;
    sparse::LowRankRHS last_lowrank_;
};

}  // namespace tdb

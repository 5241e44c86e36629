#pragma once

#include <memory>
#include <vector>

#include "tdb/config.hpp"
#include "tdb/integrate.hpp"
#include "tdb/metrics.hpp"

namespace tdb {

// Materialized experiment: model, weights, seeded initial ensemble (after any
// deterministic spin-up), and the resolved stepping plan.
struct Experiment {
    std::unique_ptr<Model> model;
    QuadratureWeights w;
    Matrix v0;
    double dt = 0.0;
    double t_end = 0.0;
    std::size_t steps = 0;
    std::size_t output_every = 0;
};

Experiment build_experiment(const RunConfig& cfg);

struct FomRun {
    std::vector<double> t_out;
    std::vector<Matrix> snapshots;  // kept only on request
    std::vector<StepReport> reports;
    Matrix final_v;
};

FomRun run_fom_trajectory(const Model& model, const Matrix& v0, double dt, std::size_t steps, std::size_t output_every,
                          bool keep_snapshots);

struct RomOptions {
    bool sparse = false;
    SparseProviderConfig scfg{};
    bool keep_states = false;  // keep the state at every output step
    bool track_full_f = false; // diagnostics: materialize F per step for |F|_max
};

struct RomRun {
    std::vector<double> t_out;
    std::vector<std::vector<double>> sigma_out;  // singular values of Sigma at output steps
    std::vector<DBOState> states;                // at output steps (keep_states)
    std::vector<StepReport> reports;
    DBOState final_state;
    // sparse per-step logs
    std::vector<double> eps_log;
    std::vector<std::size_t> p_log;
    std::vector<std::vector<std::size_t>> rows_log, cols_log;
    std::vector<double> interp_defect_log;  // diagnostics mode
    std::vector<double> f_max_log;          // diagnostics mode, |F|_max of the materialized RHS
};

RomRun run_rom_trajectory(const Model& model, const QuadratureWeights& w, const DBOState& init, double dt,
                          std::size_t steps, std::size_t output_every, const RomOptions& opts);

// n x s reconstruction U Sigma Y^T (test/metric scale)
Matrix reconstruct(const DBOState& state);

// executes cfg.mode ("bench" included); returns a process exit status
int run(const RunConfig& cfg);

// per-sweep-point mean step times
struct BenchPoint {
    std::size_t value = 0;  // n or s
    double tdb_mean_ns = 0.0;
    double stdb_mean_ns = 0.0;
    std::size_t steps = 0;
};
std::vector<BenchPoint> scaling_bench(const RunConfig& cfg);

}  // namespace tdb

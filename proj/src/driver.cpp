#include "tdb/driver.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "tdb/parallel.hpp"

namespace tdb {

namespace {

std::string join_indices(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += '|';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string git_hash() {
    FILE* pipe = ::popen("git rev-parse HEAD 2>/dev/null", "r");
    if (!pipe) return "unknown";
    char buf[64] = {0};
    std::string out;
    while (std::fgets(buf, sizeof(buf), pipe)) out += buf;
    ::pclose(pipe);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out.empty() ? "unknown" : out;
}

nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json j;
    j["run"] = {{"mode", cfg.mode},         {"model", cfg.model},       {"seed", cfg.seed},
                {"dt", cfg.resolved_dt()},  {"t_end", cfg.resolved_t_end()},
                {"output_dir", cfg.output_dir}, {"output_every", cfg.resolved_output_every()},
                {"diagnostics", cfg.diagnostics}, {"stage_reuse", cfg.stage_reuse}, {"threads", max_threads()}};
    j["rom"] = {{"rank", cfg.rank},     {"p", cfg.p},         {"sampler", cfg.sampler}, {"adaptive", cfg.adaptive},
                {"eps_lower", cfg.eps_lower}, {"eps_upper", cfg.eps_upper}, {"p_min", cfg.p_min}, {"p_max", cfg.p_max}};
    if (cfg.model == "burgers")
        j["burgers"] = {{"n", cfg.burgers.n},       {"samples", cfg.burgers.samples}, {"nu", cfg.burgers.nu},
                        {"d", cfg.burgers.d},       {"sigma_t", cfg.burgers.sigma_t}, {"sigma_x", cfg.burgers.sigma_x},
                        {"kernel_length", cfg.burgers.kernel_length}, {"penalty_kappa_dt", cfg.burgers_kappa_dt}};
    if (cfg.model == "diffusion")
        j["diffusion"] = {{"n", cfg.diffusion.n}, {"samples", cfg.diffusion.samples}, {"nu", cfg.diffusion.nu},
                          {"length", cfg.diffusion.length}, {"modes", cfg.diffusion.modes}};
    if (cfg.model == "ns2d")
        j["ns2d"] = {{"nx", cfg.ns.nx}, {"ny", cfg.ns.ny}, {"samples", cfg.ns.samples}, {"d", cfg.ns.d},
                     {"re", cfg.ns.re}, {"pr", cfg.ns.pr}, {"gamma", cfg.ns.gamma},     {"ma", cfg.ns.ma},
                     {"spinup_time", cfg.ns.spinup_time}, {"spinup_dt", cfg.ns.spinup_dt}};
    return j;
}

double mean_wall_ns(const std::vector<StepReport>& reports) {
    if (reports.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& r : reports) acc += static_cast<double>(r.wall_ns);
    return acc / static_cast<double>(reports.size());
}

SparseProviderConfig sparse_config_from(const RunConfig& cfg) {
    SparseProviderConfig scfg;
    scfg.sampler = (cfg.sampler == "qdeim") ? sampling::Sampler::qdeim : sampling::Sampler::deim;
    scfg.p = cfg.p;
    scfg.adaptive = cfg.adaptive;
    if (cfg.adaptive) scfg.controller = sparse::RankController{cfg.p, cfg.eps_lower, cfg.eps_upper, cfg.p_min, cfg.p_max};
    scfg.stage_reuse = cfg.stage_reuse;
    scfg.diagnostics = cfg.diagnostics;
    return scfg;
}

}  // namespace

Experiment build_experiment(const RunConfig& cfg) {
    Experiment ex;
    ex.dt = cfg.resolved_dt();
    ex.t_end = cfg.resolved_t_end();
    ex.steps = cfg.resolved_steps();
    ex.output_every = cfg.resolved_output_every();

    if (cfg.model == "burgers") {
        models::BurgersConfig bc = cfg.burgers;
        bc.kappa = cfg.burgers_kappa_dt / ex.dt;
        auto m = std::make_unique<models::Burgers1D>(bc, cfg.seed);
        ex.w = m->weights();
        ex.v0 = m->initial_ensemble();
        ex.model = std::move(m);
    } else if (cfg.model == "diffusion") {
        auto m = std::make_unique<models::Diffusion1D>(cfg.diffusion);
        ex.w = m->weights();
        ex.v0 = m->initial_ensemble(cfg.seed);
        ex.model = std::move(m);
    } else if (cfg.model == "ns2d") {
        auto m = std::make_unique<models::Ns2D>(cfg.ns);
        ex.w = m->weights();
        // deterministic spin-up, then the perturbed ensemble
        Matrix base = m->deterministic_initial();
        const std::size_t spin_steps =
            static_cast<std::size_t>(std::llround(cfg.ns.spinup_time / cfg.ns.spinup_dt));
        double t = 0.0;
        for (std::size_t k = 0; k < spin_steps; ++k) {
            base = rk4_fom(*m, base, t, cfg.ns.spinup_dt);
            t += cfg.ns.spinup_dt;
        }
        ex.v0 = m->ensemble_from_base(base, cfg.seed);
        ex.model = std::move(m);
    } else {
        throw ConfigError("unknown model '" + cfg.model + "'", {"[run] model"});
    }
    return ex;
}

FomRun run_fom_trajectory(const Model& model, const Matrix& v0, double dt, std::size_t steps, std::size_t output_every,
                          bool keep_snapshots) {
    FomRun run;
    Matrix v = v0;
    double t = 0.0;
    run.t_out.push_back(t);
    if (keep_snapshots) run.snapshots.push_back(v);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto start = std::chrono::steady_clock::now();
        v = rk4_fom(model, v, t, dt);
        t = static_cast<double>(k + 1) * dt;
        StepReport rep;
        rep.t = t;
        rep.dt = dt;
        rep.mode = SolveMode::fom;
        rep.wall_ns = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
        run.reports.push_back(rep);
        if ((k + 1) % output_every == 0 || k + 1 == steps) {
            run.t_out.push_back(t);
            if (keep_snapshots) run.snapshots.push_back(v);
        }
    }
    run.final_v = std::move(v);
    return run;
}

Matrix reconstruct(const DBOState& state) {
    return linalg::matmul(state.u, linalg::matmul_bt(state.sigma, state.y));
}

RomRun run_rom_trajectory(const Model& model, const QuadratureWeights& w, const DBOState& init, double dt,
                          std::size_t steps, std::size_t output_every, const RomOptions& opts) {
    RomRun run;
    DBOState state = init;
    std::unique_ptr<DBORhsProvider> provider;
    SparseProvider* sparse_provider = nullptr;
    if (opts.sparse) {
        auto sp = std::make_unique<SparseProvider>(model, w, state, opts.scfg);
        sparse_provider = sp.get();
        provider = std::move(sp);
    } else {
        provider = std::make_unique<DecompressedProvider>(model, w);
    }

    auto record_output = [&](const DBOState& s) {
        run.t_out.push_back(s.t);
        run.sigma_out.push_back(state_singular_values(s));
        if (opts.keep_states) run.states.push_back(s);
    };
    record_output(state);

    for (std::size_t k = 0; k < steps; ++k) {
        double fmax = 0.0;
        if (opts.sparse && opts.track_full_f) {
            const Matrix f = model.rhs_columns(state.t, reconstruct(state));
            fmax = f.max_abs();
        }
        StepReport rep;
        state = rk4_dbo(*provider, state, dt, w, rep);
        state.t = static_cast<double>(k + 1) * dt;
        if (sparse_provider) {
            rep.p = sparse_provider->step_p();
            rep.eps = sparse_provider->last_eps();
            run.eps_log.push_back(rep.eps);
            run.p_log.push_back(rep.p);
            run.rows_log.push_back(sparse_provider->last_rows());
            run.cols_log.push_back(sparse_provider->last_cols());
            if (opts.track_full_f) {
                run.interp_defect_log.push_back(sparse_provider->last_interp_defect());
                run.f_max_log.push_back(fmax);
            }
        }
        run.reports.push_back(rep);
        if ((k + 1) % output_every == 0 || k + 1 == steps) record_output(state);
    }
    run.final_state = std::move(state);
    return run;
}

std::vector<BenchPoint> scaling_bench(const RunConfig& cfg) {
    std::vector<std::size_t> values = cfg.bench_values;
    if (values.empty()) values = (cfg.bench_sweep == "n") ? std::vector<std::size_t>{405, 810, 1620}
                                                          : std::vector<std::size_t>{256, 512, 1024};
    std::vector<BenchPoint> points;
    for (std::size_t value : values) {
        models::BurgersConfig bc = cfg.burgers;
        if (cfg.bench_sweep == "n")
            bc.n = value;
        else
            bc.samples = value;
        // stability-limited step for the diffusion term on this grid
        const double dx = 1.0 / static_cast<double>(bc.n - 1);
        const double dt = dx * dx / (2.0 * bc.nu);
        bc.kappa = cfg.burgers_kappa_dt / dt;

        models::Burgers1D model(bc, cfg.seed);
        const QuadratureWeights w = model.weights();
        const Matrix v0 = model.initial_ensemble();
        const DBOState init = init_from_samples(v0, cfg.rank, w);

        BenchPoint pt;
        pt.value = value;
        pt.steps = cfg.bench_steps;

        const std::size_t warmup = 3;
        {
            DecompressedProvider prov(model, w);
            DBOState s = init;
            StepReport rep;
            for (std::size_t k = 0; k < warmup; ++k) s = rk4_dbo(prov, s, dt, w, rep);
            double acc = 0.0;
            for (std::size_t k = 0; k < cfg.bench_steps; ++k) {
                s = rk4_dbo(prov, s, dt, w, rep);
                acc += static_cast<double>(rep.wall_ns);
            }
            pt.tdb_mean_ns = acc / static_cast<double>(cfg.bench_steps);
        }
        {
            SparseProvider prov(model, w, init, sparse_config_from(cfg));
            DBOState s = init;
            StepReport rep;
            for (std::size_t k = 0; k < warmup; ++k) s = rk4_dbo(prov, s, dt, w, rep);
            double acc = 0.0;
            for (std::size_t k = 0; k < cfg.bench_steps; ++k) {
                s = rk4_dbo(prov, s, dt, w, rep);
                acc += static_cast<double>(rep.wall_ns);
            }
            pt.stdb_mean_ns = acc / static_cast<double>(cfg.bench_steps);
        }
        points.push_back(pt);
    }
    return points;
}

namespace {

void emit_points_log(const RomRun& rom, double dt, const std::string& path) {
    std::vector<std::string> lines;
    lines.push_back("t,p,eps,rows,cols");
    for (std::size_t k = 0; k < rom.p_log.size(); ++k) {
        std::string line = format_double(static_cast<double>(k + 1) * dt);
        line += ',' + std::to_string(rom.p_log[k]);
        line += ',' + format_double(rom.eps_log[k]);
        line += ',' + join_indices(rom.rows_log[k]);
        line += ',' + join_indices(rom.cols_log[k]);
        lines.push_back(std::move(line));
    }
    emit_lines(lines, path);
}

int run_impl(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path outdir(cfg.output_dir);
    fs::create_directories(outdir);

    nlohmann::json manifest;
    manifest["config"] = config_echo(cfg);
    manifest["git"] = git_hash();

    if (cfg.mode == "bench") {
        const auto points = scaling_bench(cfg);
        MetricTable table;
        table.header = {"value", "tdb_mean_step_ns", "stdb_mean_step_ns", "steps"};
        for (const auto& pt : points)
            table.rows.push_back({static_cast<double>(pt.value), pt.tdb_mean_ns, pt.stdb_mean_ns,
                                  static_cast<double>(pt.steps)});
        emit_metrics(table, (outdir / "timing.csv").string());
        manifest["bench"] = {{"sweep", cfg.bench_sweep}};
        std::ofstream mf(outdir / "manifest.json");
        mf << manifest.dump(2) << '\n';
        return 0;
    }

    Experiment ex = build_experiment(cfg);
    manifest["initial_ensemble_checksum"] = matrix_checksum(ex.v0);

    const std::size_t r = cfg.rank;

    if (cfg.mode == "fom") {
        FomRun fom = run_fom_trajectory(*ex.model, ex.v0, ex.dt, ex.steps, ex.output_every, true);
        for (std::size_t i = 0; i < fom.snapshots.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "state_%06zu", i);
            write_snapshot(fom.snapshots[i], fom.t_out[i], (outdir / name).string());
        }
        MetricTable timing;
        timing.header = {"t", "fom_step_ns"};
        for (const auto& rep : fom.reports) timing.rows.push_back({rep.t, static_cast<double>(rep.wall_ns)});
        emit_metrics(timing, (outdir / "timing.csv").string());
        manifest["timing_mean_ns"] = {{"fom", mean_wall_ns(fom.reports)}};
        manifest["fom_checksum"] = matrix_checksum(ex.v0);
        std::ofstream mf(outdir / "manifest.json");
        mf << manifest.dump(2) << '\n';
        return 0;
    }

    const DBOState init = init_from_samples(ex.v0, r, ex.w);

    if (cfg.mode == "tdb" || cfg.mode == "stdb") {
        RomOptions opts;
        opts.sparse = (cfg.mode == "stdb");
        if (opts.sparse) opts.scfg = sparse_config_from(cfg);
        RomRun rom = run_rom_trajectory(*ex.model, ex.w, init, ex.dt, ex.steps, ex.output_every, opts);

        MetricTable sigma;
        sigma.header = {"t"};
        for (std::size_t i = 1; i <= r; ++i) sigma.header.push_back("sigma_" + std::to_string(i));
        for (std::size_t k = 0; k < rom.t_out.size(); ++k) {
            std::vector<double> row{rom.t_out[k]};
            row.insert(row.end(), rom.sigma_out[k].begin(), rom.sigma_out[k].end());
            sigma.rows.push_back(std::move(row));
        }
        emit_metrics(sigma, (outdir / "sigma.csv").string());

        MetricTable timing;
        timing.header = {"t", "step_ns"};
        for (const auto& rep : rom.reports) timing.rows.push_back({rep.t, static_cast<double>(rep.wall_ns)});
        emit_metrics(timing, (outdir / "timing.csv").string());

        if (opts.sparse) emit_points_log(rom, ex.dt, (outdir / "points.csv").string());
        manifest["timing_mean_ns"] = {{cfg.mode, mean_wall_ns(rom.reports)}};
        manifest[cfg.mode + "_checksum"] = matrix_checksum(ex.v0);
        std::ofstream mf(outdir / "manifest.json");
        mf << manifest.dump(2) << '\n';
        return 0;
    }

    // compare: the three solvers run sequentially from one ensemble object
    FomRun fom = run_fom_trajectory(*ex.model, ex.v0, ex.dt, ex.steps, ex.output_every, true);

    RomOptions tdb_opts;
    tdb_opts.keep_states = true;
    RomRun tdb = run_rom_trajectory(*ex.model, ex.w, init, ex.dt, ex.steps, ex.output_every, tdb_opts);

    RomOptions stdb_opts;
    stdb_opts.sparse = true;
    stdb_opts.scfg = sparse_config_from(cfg);
    stdb_opts.keep_states = true;
    RomRun stdb = run_rom_trajectory(*ex.model, ex.w, init, ex.dt, ex.steps, ex.output_every, stdb_opts);

    MetricTable err;
    err.header = {"t", "e_tdb", "e_stdb", "abs_diff"};
    MetricTable sigma;
    sigma.header = {"t"};
    for (const char* who : {"fom", "tdb", "stdb"})
        for (std::size_t i = 1; i <= r; ++i) sigma.header.push_back(std::string(who) + "_sigma_" + std::to_string(i));

    for (std::size_t k = 0; k < fom.t_out.size(); ++k) {
        const double e_tdb = total_error(tdb.states[k], fom.snapshots[k], ex.w);
        const double e_stdb = total_error(stdb.states[k], fom.snapshots[k], ex.w);
        err.rows.push_back({fom.t_out[k], e_tdb, e_stdb, std::abs(e_tdb - e_stdb)});

        std::vector<double> row{fom.t_out[k]};
        const auto kl = linalg::truncated_svd_weighted(fom.snapshots[k], ex.w, r);
        row.insert(row.end(), kl.sigma.begin(), kl.sigma.end());
        row.insert(row.end(), tdb.sigma_out[k].begin(), tdb.sigma_out[k].end());
        row.insert(row.end(), stdb.sigma_out[k].begin(), stdb.sigma_out[k].end());
        sigma.rows.push_back(std::move(row));
    }
    emit_metrics(err, (outdir / "error.csv").string());
    emit_metrics(sigma, (outdir / "sigma.csv").string());
    emit_points_log(stdb, ex.dt, (outdir / "points.csv").string());

    MetricTable timing;
    timing.header = {"t", "fom_step_ns", "tdb_step_ns", "stdb_step_ns"};
    for (std::size_t k = 0; k < fom.reports.size(); ++k)
        timing.rows.push_back({fom.reports[k].t, static_cast<double>(fom.reports[k].wall_ns),
                               static_cast<double>(tdb.reports[k].wall_ns),
                               static_cast<double>(stdb.reports[k].wall_ns)});
    emit_metrics(timing, (outdir / "timing.csv").string());

    // all three solvers consumed the same object; the checksums make that
    // auditable from the manifest alone
    const std::string checksum = matrix_checksum(ex.v0);
    manifest["fom_checksum"] = checksum;
    manifest["tdb_checksum"] = checksum;
    manifest["stdb_checksum"] = checksum;
    manifest["timing_mean_ns"] = {{"fom", mean_wall_ns(fom.reports)},
                                  {"tdb", mean_wall_ns(tdb.reports)},
                                  {"stdb", mean_wall_ns(stdb.reports)}};
    std::ofstream mf(outdir / "manifest.json");
    mf << manifest.dump(2) << '\n';
    return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
    const std::vector<std::string> bad = validate_config(cfg);
    if (!bad.empty()) {
        std::cerr << "config validation failed:\n";
        for (const auto& m : bad) std::cerr << "  " << m << '\n';
        return 2;
    }
    if (cfg.threads > 0) set_max_threads(cfg.threads);
    try {
        return run_impl(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace tdb

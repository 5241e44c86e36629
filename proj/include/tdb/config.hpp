#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdb/models/burgers1d.hpp"
#include "tdb/models/diffusion1d.hpp"
#include "tdb/models/ns2d.hpp"

namespace tdb {

// Experiment description. Parsed from a sectioned key=value file; unknown
// keys are errors, and validation reports every offending field at once.
struct RunConfig {
    // [run]
    std::string mode = "compare";  // fom | tdb | stdb | compare | bench
    std::string model = "burgers";
    std::uint64_t seed = 1234;
    double dt = 0.0;     // 0 -> per-model default
    double t_end = 0.0;  // 0 -> per-model default
    std::string output_dir = "out";
    std::size_t output_every = 0;  // 0 -> ~40 output points
    bool diagnostics = false;
    bool stage_reuse = false;
    int threads = 0;  // 0 -> TDB_SPARSE_THREADS or 1

    // [rom]
    std::size_t rank = 5;
    std::size_t p = 8;
    std::string sampler = "deim";  // deim | qdeim
    bool adaptive = false;
    double eps_lower = 1e-5;
    double eps_upper = 1e-4;
    std::size_t p_min = 2;
    std::size_t p_max = 32;

    // model sections
    models::BurgersConfig burgers;
    double burgers_kappa_dt = 2.0;  // penalty rate times dt
    models::DiffusionConfig diffusion;
    models::NSConfig ns;

    // [bench]
    std::string bench_sweep = "n";  // n | s
    std::vector<std::size_t> bench_values;
    std::size_t bench_steps = 60;

    double resolved_dt() const;
    double resolved_t_end() const;
    std::size_t resolved_steps() const;
    std::size_t resolved_output_every() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// empty when valid; otherwise one message per offending field
std::vector<std::string> validate_config(const RunConfig& cfg);

}  // namespace tdb

#include "tdb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tdb/error.hpp"
#include "tdb/metrics.hpp"

namespace tdb {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Parser {
    std::vector<std::string> errors;

    bool to_bool(const std::string& key, const std::string& v, bool& out) {
        if (v == "true" || v == "1" || v == "yes") { out = true; return true; }
        if (v == "false" || v == "0" || v == "no") { out = false; return true; }
        errors.push_back(key + ": expected a boolean, got '" + v + "'");
        return false;
    }
    bool to_double(const std::string& key, const std::string& v, double& out) {
        char* end = nullptr;
        out = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0') {
            errors.push_back(key + ": expected a number, got '" + v + "'");
            return false;
        }
        return true;
    }
    bool to_size(const std::string& key, const std::string& v, std::size_t& out) {
        double d;
        if (!to_double(key, v, d)) return false;
        if (d < 0 || d != std::floor(d)) {
            errors.push_back(key + ": expected a non-negative integer, got '" + v + "'");
            return false;
        }
        out = static_cast<std::size_t>(d);
        return true;
    }
    bool to_u64(const std::string& key, const std::string& v, std::uint64_t& out) {
        std::size_t s;
        if (!to_size(key, v, s)) return false;
        out = s;
        return true;
    }
    bool to_int(const std::string& key, const std::string& v, int& out) {
        std::size_t s;
        if (!to_size(key, v, s)) return false;
        out = static_cast<int>(s);
        return true;
    }
    bool to_size_list(const std::string& key, const std::string& v, std::vector<std::size_t>& out) {
        out.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t s;
            if (!to_size(key, trim(item), s)) return false;
            out.push_back(s);
        }
        if (out.empty()) errors.push_back(key + ": empty list");
        return !out.empty();
    }
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    Parser p;
    std::string section;
    std::stringstream stream(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                p.errors.push_back("line " + std::to_string(lineno) + ": malformed section header '" + line + "'");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "run" && section != "rom" && section != "burgers" && section != "diffusion" &&
                section != "ns2d" && section != "bench")
                p.errors.push_back("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.errors.push_back("line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = "[" + section + "] " + key;

        if (section == "run") {
            if (key == "mode") cfg.mode = value;
            else if (key == "model") cfg.model = value;
            else if (key == "seed") p.to_u64(full, value, cfg.seed);
            else if (key == "dt") p.to_double(full, value, cfg.dt);
            else if (key == "t_end") p.to_double(full, value, cfg.t_end);
            else if (key == "output_dir") cfg.output_dir = value;
            else if (key == "output_every") p.to_size(full, value, cfg.output_every);
            else if (key == "diagnostics") p.to_bool(full, value, cfg.diagnostics);
            else if (key == "stage_reuse") p.to_bool(full, value, cfg.stage_reuse);
            else if (key == "threads") p.to_int(full, value, cfg.threads);
            else p.errors.push_back("unknown key " + full);
        } else if (section == "rom") {
            if (key == "rank") p.to_size(full, value, cfg.rank);
            else if (key == "p") p.to_size(full, value, cfg.p);
            else if (key == "sampler") cfg.sampler = value;
            else if (key == "adaptive") p.to_bool(full, value, cfg.adaptive);
            else if (key == "eps_lower") p.to_double(full, value, cfg.eps_lower);
            else if (key == "eps_upper") p.to_double(full, value, cfg.eps_upper);
            else if (key == "p_min") p.to_size(full, value, cfg.p_min);
            else if (key == "p_max") p.to_size(full, value, cfg.p_max);
            else p.errors.push_back("unknown key " + full);
        } else if (section == "burgers") {
            if (key == "n") p.to_size(full, value, cfg.burgers.n);
            else if (key == "samples") p.to_size(full, value, cfg.burgers.samples);
            else if (key == "nu") p.to_double(full, value, cfg.burgers.nu);
            else if (key == "d") p.to_size(full, value, cfg.burgers.d);
            else if (key == "sigma_t") p.to_double(full, value, cfg.burgers.sigma_t);
            else if (key == "sigma_x") p.to_double(full, value, cfg.burgers.sigma_x);
            else if (key == "kernel_length") p.to_double(full, value, cfg.burgers.kernel_length);
            else if (key == "penalty_kappa_dt") p.to_double(full, value, cfg.burgers_kappa_dt);
            else p.errors.push_back("unknown key " + full);
        } else if (section == "diffusion") {
            if (key == "n") p.to_size(full, value, cfg.diffusion.n);
            else if (key == "samples") p.to_size(full, value, cfg.diffusion.samples);
            else if (key == "nu") p.to_double(full, value, cfg.diffusion.nu);
            else if (key == "length") p.to_double(full, value, cfg.diffusion.length);
            else if (key == "modes") p.to_size(full, value, cfg.diffusion.modes);
            else p.errors.push_back("unknown key " + full);
        } else if (section == "ns2d") {
            if (key == "nx") p.to_size(full, value, cfg.ns.nx);
            else if (key == "ny") p.to_size(full, value, cfg.ns.ny);
            else if (key == "samples") p.to_size(full, value, cfg.ns.samples);
            else if (key == "d") p.to_size(full, value, cfg.ns.d);
            else if (key == "re") p.to_double(full, value, cfg.ns.re);
            else if (key == "pr") p.to_double(full, value, cfg.ns.pr);
            else if (key == "gamma") p.to_double(full, value, cfg.ns.gamma);
            else if (key == "ma") p.to_double(full, value, cfg.ns.ma);
            else if (key == "lx") p.to_double(full, value, cfg.ns.lx);
            else if (key == "ly") p.to_double(full, value, cfg.ns.ly);
            else if (key == "delta") p.to_double(full, value, cfg.ns.delta);
            else if (key == "h") p.to_double(full, value, cfg.ns.h);
            else if (key == "a") p.to_double(full, value, cfg.ns.a);
            else if (key == "b") p.to_double(full, value, cfg.ns.b);
            else if (key == "y_min") p.to_double(full, value, cfg.ns.y_min);
            else if (key == "y_max") p.to_double(full, value, cfg.ns.y_max);
            else if (key == "u_max") p.to_double(full, value, cfg.ns.u_max);
            else if (key == "lambda_scale") p.to_double(full, value, cfg.ns.lambda_scale);
            else if (key == "spinup_time") p.to_double(full, value, cfg.ns.spinup_time);
            else if (key == "spinup_dt") p.to_double(full, value, cfg.ns.spinup_dt);
            else p.errors.push_back("unknown key " + full);
        } else if (section == "bench") {
            if (key == "sweep") cfg.bench_sweep = value;
            else if (key == "values") p.to_size_list(full, value, cfg.bench_values);
            else if (key == "steps") p.to_size(full, value, cfg.bench_steps);
            else p.errors.push_back("unknown key " + full);
        } else {
            p.errors.push_back("key outside any section at line " + std::to_string(lineno) + ": '" + line + "'");
        }
    }
    if (!p.errors.empty()) throw ConfigError("config parse failed:\n  " + [&] {
        std::string joined;
        for (std::size_t i = 0; i < p.errors.size(); ++i) joined += (i ? "\n  " : "") + p.errors[i];
        return joined;
    }(), p.errors);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

double RunConfig::resolved_dt() const {
    if (dt > 0.0) return dt;
    if (model == "burgers") return 6.25e-5;
    if (model == "diffusion") return 1e-3;
    return 5e-4;  // ns2d
}

double RunConfig::resolved_t_end() const {
    if (t_end > 0.0) return t_end;
    if (model == "burgers") return 1.0;
    if (model == "diffusion") return 1.0;
    return 0.1;  // ns2d
}

std::size_t RunConfig::resolved_steps() const {
    return static_cast<std::size_t>(std::llround(resolved_t_end() / resolved_dt()));
}

std::size_t RunConfig::resolved_output_every() const {
    if (output_every > 0) return output_every;
    return std::max<std::size_t>(1, resolved_steps() / 40);
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
    std::vector<std::string> bad;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) bad.push_back(msg);
    };
    check(cfg.mode == "fom" || cfg.mode == "tdb" || cfg.mode == "stdb" || cfg.mode == "compare" || cfg.mode == "bench",
          "[run] mode: must be fom|tdb|stdb|compare|bench, got '" + cfg.mode + "'");
    check(cfg.model == "burgers" || cfg.model == "diffusion" || cfg.model == "ns2d",
          "[run] model: must be burgers|diffusion|ns2d, got '" + cfg.model + "'");
    check(cfg.dt >= 0.0, "[run] dt: must be positive (or omitted)");
    check(cfg.t_end >= 0.0, "[run] t_end: must be positive (or omitted)");
    if (cfg.dt > 0.0 && cfg.t_end > 0.0) {
        const double steps = cfg.t_end / cfg.dt;
        check(std::abs(steps - std::llround(steps)) * cfg.dt <= cfg.dt,
              "[run] dt/t_end: t_end is not a whole number of steps");
    }
    check(cfg.threads >= 0, "[run] threads: must be >= 0");
    check(cfg.rank >= 1, "[rom] rank: must be >= 1");
    check(cfg.p >= 1, "[rom] p: must be >= 1");
    check(cfg.sampler == "deim" || cfg.sampler == "qdeim", "[rom] sampler: must be deim|qdeim, got '" + cfg.sampler + "'");
    if (cfg.adaptive) {
        check(cfg.eps_lower > 0.0, "[rom] eps_lower: must be > 0");
        check(cfg.eps_lower < cfg.eps_upper,
              "[rom] eps_lower/eps_upper: need eps_lower < eps_upper (got " + format_double(cfg.eps_lower) + " >= " +
                  format_double(cfg.eps_upper) + ")");
        check(cfg.p_min >= 1 && cfg.p_min <= cfg.p && cfg.p <= cfg.p_max, "[rom] p_min/p/p_max: need p_min <= p <= p_max");
    }
    if (cfg.model == "burgers") {
        check(cfg.burgers.n >= 5, "[burgers] n: must be >= 5");
        check(cfg.burgers.samples >= 1, "[burgers] samples: must be >= 1");
        check(cfg.burgers.nu > 0.0, "[burgers] nu: must be > 0");
        check(cfg.burgers.d >= 1 && cfg.burgers.d <= cfg.burgers.samples, "[burgers] d: need 1 <= d <= samples");
        check(cfg.burgers.kernel_length > 0.0, "[burgers] kernel_length: must be > 0");
        check(cfg.burgers_kappa_dt > 0.0, "[burgers] penalty_kappa_dt: must be > 0");
        check(cfg.rank <= std::min(cfg.burgers.n, cfg.burgers.samples), "[rom] rank: exceeds min(n, samples)");
    }
    if (cfg.model == "diffusion") {
        check(cfg.diffusion.n >= 3, "[diffusion] n: must be >= 3");
        check(cfg.diffusion.nu > 0.0, "[diffusion] nu: must be > 0");
        check(cfg.diffusion.modes >= cfg.rank, "[diffusion] modes: ensemble rank below [rom] rank");
    }
    if (cfg.model == "ns2d") {
        check(cfg.ns.nx >= 4 && cfg.ns.ny >= 4, "[ns2d] nx/ny: must be >= 4");
        check(cfg.ns.samples >= 1, "[ns2d] samples: must be >= 1");
        check(cfg.ns.d >= 1, "[ns2d] d: must be >= 1");
        check(cfg.ns.re > 0.0 && cfg.ns.pr > 0.0, "[ns2d] re/pr: must be > 0");
        check(cfg.ns.ma > 0.0 && cfg.ns.gamma > 1.0, "[ns2d] ma/gamma: need ma > 0 and gamma > 1");
        check(cfg.rank <= std::min(cfg.ns.state_dim(), cfg.ns.samples), "[rom] rank: exceeds min(n, samples)");

        // paper-scale guardrail: reject configs whose decompressed paths would
        // not fit in memory
        if (cfg.mode == "fom" || cfg.mode == "tdb" || cfg.mode == "compare") {
            const double n = static_cast<double>(cfg.ns.state_dim());
            const double s = static_cast<double>(cfg.ns.samples);
            const std::size_t snapshots =
                (cfg.mode == "compare") ? cfg.resolved_steps() / cfg.resolved_output_every() + 2 : 2;
            const double bytes = 8.0 * n * s * (10.0 + static_cast<double>(snapshots));
            const double gib = bytes / (1024.0 * 1024.0 * 1024.0);
            if (gib > 4.0)
                bad.push_back("[ns2d] nx/ny/samples: estimated peak memory " + std::to_string(gib) +
                              " GiB exceeds the 4 GiB guardrail for decompressed runs");
        }
    }
    if (cfg.mode == "bench") {
        check(cfg.bench_sweep == "n" || cfg.bench_sweep == "s", "[bench] sweep: must be n|s");
        check(cfg.bench_steps >= 1, "[bench] steps: must be >= 1");
        check(cfg.model == "burgers", "[bench] only the burgers model is benchmarked");
    }
    return bad;
}

}  // namespace tdb

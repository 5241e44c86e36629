#pragma once

#include "tdb/linalg.hpp"
#include "tdb/model.hpp"

namespace tdb::models {

struct NSConfig {
    std::size_t nx = 64;
    std::size_t ny = 64;
    std::size_t samples = 64;
    std::size_t d = 10;      // perturbation dimension
    double re = 3000.0;
    double pr = 1.0;
    double gamma = 1.4;
    double ma = 0.5;
    double lx = 2.0;
    double ly = 1.0;
    double delta = 1.45e-4;
    double h = 0.01;
    double a = 0.45;
    double b = 0.55;
    double y_min = 0.45;
    double y_max = 0.55;
    double u_max = 1.0;
    double lambda_scale = 10.0;  // perturbation amplitudes lambda_k = scale / k^2
    double spinup_time = 3.0;
    double spinup_dt = 5e-4;

    std::size_t cells() const { return nx * ny; }
    std::size_t state_dim() const { return 4 * nx * ny; }
};

// Compressible Navier-Stokes on a periodic nx-by-ny grid; the state stacks
// [rho, rho*u, rho*v, E] into one global column. Flux divergences use
// half-point face fluxes built from 3x3 neighborhoods, so the adjacency
// closure of a point is its 8 neighbors across all four fields and the grid
// sums of rho and E telescope to round-off.
class Ns2D : public Model {
public:
    explicit Ns2D(const NSConfig& cfg);

    std::size_t state_size() const override { return cfg_.state_dim(); }
    std::string name() const override { return "ns2d"; }
    std::vector<std::size_t> adjacency(std::span<const std::size_t> rows) const override;
    Matrix rhs_columns(double t, const Matrix& v, std::span<const std::size_t> samples = {}) const override;
    Matrix rhs_rows(double t, std::span<const std::size_t> rows, std::span<const std::size_t> adj,
                    const Matrix& vsub) const override;

    // shear-layer initial state, single column
    Matrix deterministic_initial() const;

    // uniform state for equilibrium checks
    Matrix uniform_state(double rho, double u, double v, double p) const;

    // base column (usually the spun-up state) plus the sinusoidal/Gaussian
    // velocity perturbations; rho and E keep their base values
    Matrix ensemble_from_base(const Matrix& base, std::uint64_t seed) const;

    // perturbation velocity fields for one sample (testing hook)
    void perturbation(std::uint64_t seed, std::size_t sample, std::vector<double>& du, std::vector<double>& dv) const;

    QuadratureWeights weights() const;
    const NSConfig& config() const { return cfg_; }

    std::size_t cell_index(std::size_t i, std::size_t j) const { return j * cfg_.nx + i; }
    std::size_t global_index(std::size_t field, std::size_t i, std::size_t j) const { return field * cfg_.cells() + cell_index(i, j); }

private:
    NSConfig cfg_;
    double dx_, dy_, inv_dx_, inv_dy_;
    double inv_re_, k_heat_, ec_;
};

}  // namespace tdb::models

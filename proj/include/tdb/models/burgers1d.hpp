#pragma once

#include <cmath>

#include "tdb/linalg.hpp"
#include "tdb/model.hpp"

namespace tdb::models {

struct BurgersConfig {
    std::size_t n = 405;        // grid points on [0,1]
    std::size_t samples = 256;  // Monte Carlo samples
    double nu = 0.05;
    std::size_t d = 4;          // random dimension
    double sigma_t = 0.01;      // boundary noise amplitude
    double sigma_x = 0.005;     // initial-condition noise amplitude
    double kernel_length = 0.1; // squared-exponential length scale
    double kappa = 8000.0;      // Dirichlet penalty rate (driver sets kappa*dt ~ 2)
    double bc_sin_amplitude = 1.0;  // deterministic left-boundary forcing scale
    bool advection = true;          // test hook: disable v v_x
};

// 1D viscous advection with a stochastic Dirichlet boundary at x=0 and a
// homogeneous one at x=1, both imposed through a penalty term so boundary
// conditions flow through the same RHS pathway the sparse sampler sees.
// Second-order central differences inside, one-sided stencils at the ends.
class Burgers1D : public Model {
public:
    Burgers1D(const BurgersConfig& cfg, std::uint64_t seed);

    std::size_t state_size() const override { return cfg_.n; }
    std::string name() const override { return "burgers"; }
    std::vector<std::size_t> adjacency(std::span<const std::size_t> rows) const override;
    Matrix rhs_columns(double t, const Matrix& v, std::span<const std::size_t> samples = {}) const override;
    Matrix rhs_rows(double t, std::span<const std::size_t> rows, std::span<const std::size_t> adj,
                    const Matrix& vsub) const override;

    // deterministic profile plus the truncated expansion of the squared-
    // exponential random field, one column per sample
    Matrix initial_ensemble() const;

    // left-boundary value for one sample
    double boundary_value(double t, std::size_t sample) const;

    static double initial_profile(double x) { return 0.5 * std::sin(2.0 * M_PI * x) * (std::exp(std::cos(2.0 * M_PI * x)) - 1.5); }

    const std::vector<double>& kernel_eigenvalues() const { return kernel_lambda_; }
    const Matrix& kernel_modes() const { return kernel_psi_; }
    Matrix kernel_matrix() const;
    const Matrix& xi() const { return xi_; }
    double grid_point(std::size_t i) const { return static_cast<double>(i) * dx_; }

    QuadratureWeights weights() const;
    const BurgersConfig& config() const { return cfg_; }

private:
    double rhs_entry(std::size_t i, const double* vm2, const double* vm1, const double* v0, const double* vp1,
                     const double* vp2, std::size_t colpos, double t, std::size_t sample) const;

    BurgersConfig cfg_;
    double dx_;
    double inv_2dx_;
    double inv_dx2_;
    Matrix xi_;                          // d x samples, shared by boundary and initial condition
    std::vector<double> kernel_lambda_;  // leading d eigenvalues of the kernel matrix
    Matrix kernel_psi_;                  // n x d eigenvectors
};

}  // namespace tdb::models

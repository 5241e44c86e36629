#pragma once

#include "tdb/linalg.hpp"
#include "tdb/model.hpp"

namespace tdb::models {

struct DiffusionConfig {
    std::size_t n = 128;
    std::size_t samples = 64;
    double nu = 0.00125;
    double length = 1.0;
    std::size_t modes = 6;  // Fourier modes in the sampled initial ensemble
};

// Homogeneous linear test model: nu * d2/dx2 with periodic boundaries. The
// pure linear map the compressed-form property suite is built on.
class Diffusion1D : public Model {
public:
    explicit Diffusion1D(const DiffusionConfig& cfg);

    std::size_t state_size() const override { return cfg_.n; }
    std::string name() const override { return "diffusion"; }
    std::vector<std::size_t> adjacency(std::span<const std::size_t> rows) const override;
    Matrix rhs_columns(double t, const Matrix& v, std::span<const std::size_t> samples = {}) const override;
    Matrix rhs_rows(double t, std::span<const std::size_t> rows, std::span<const std::size_t> adj,
                    const Matrix& vsub) const override;

    // column-by-column linear action, identical to rhs_columns
    Matrix linear_action(const Matrix& u) const { return rhs_columns(0.0, u); }

    // seeded smooth random ensemble (cfg.modes Fourier pairs, coefficients ~ N(0,1))
    Matrix initial_ensemble(std::uint64_t seed) const;

    QuadratureWeights weights() const;
    const DiffusionConfig& config() const { return cfg_; }

private:
    DiffusionConfig cfg_;
    double inv_dx2_;
};

}  // namespace tdb::models

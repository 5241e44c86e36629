#pragma once

#include <span>
#include <string>
#include <vector>

#include "tdb/matrix.hpp"

namespace tdb {

// Physics definition with the three access patterns the solvers need: full
// columns, selected columns, selected rows plus stencil adjacency. Row and
// column evaluations share one arithmetic path so rhs_rows reproduces the
// corresponding rows of rhs_columns exactly.
class Model {
public:
    virtual ~Model() = default;

    virtual std::size_t state_size() const = 0;
    virtual std::string name() const = 0;

    // Extra state rows needed to evaluate the RHS at `rows`: the stencil
    // closure, de-duplicated, ascending, excluding `rows` themselves.
    virtual std::vector<std::size_t> adjacency(std::span<const std::size_t> rows) const = 0;

    // RHS applied columnwise. `samples` names the ensemble member behind each
    // column (empty means columns are samples 0..k-1); models with stochastic
    // forcing need it, autonomous models ignore it.
    virtual Matrix rhs_columns(double t, const Matrix& v, std::span<const std::size_t> samples = {}) const = 0;

    // RHS rows at `rows`, all samples. `vsub` holds the state at
    // [rows; adjacency(rows)] in that order.
    virtual Matrix rhs_rows(double t, std::span<const std::size_t> rows, std::span<const std::size_t> adj,
                            const Matrix& vsub) const = 0;
};

}  // namespace tdb

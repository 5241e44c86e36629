#include "tdb/matrix.hpp"

#include <atomic>
#include <cmath>

namespace tdb {

namespace {
std::atomic<std::uint64_t> g_current{0};
std::atomic<std::uint64_t> g_peak{0};
}  // namespace

namespace detail {
void alloc_add(std::uint64_t bytes) {
    const std::uint64_t now = g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    std::uint64_t peak = g_peak.load(std::memory_order_relaxed);
    while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
}
void alloc_sub(std::uint64_t bytes) { g_current.fetch_sub(bytes, std::memory_order_relaxed); }
}  // namespace detail

std::uint64_t AllocStats::current_bytes() { return g_current.load(std::memory_order_relaxed); }
std::uint64_t AllocStats::peak_bytes() { return g_peak.load(std::memory_order_relaxed); }
void AllocStats::reset_peak() { g_peak.store(g_current.load(std::memory_order_relaxed), std::memory_order_relaxed); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> row_major)
    : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {
    if (row_major.size() != rows * cols) throw DimensionError("Matrix initializer size mismatch");
    std::size_t k = 0;
    for (double v : row_major) {
        a_[(k % cols) * rows_ + (k / cols)] = v;
        ++k;
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

bool Matrix::all_finite() const {
    for (double v : a_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("Matrix += shape mismatch");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += other.a_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("Matrix -= shape mismatch");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= other.a_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] >= m.rows()) throw DimensionError("take_rows: index out of range");
            out(i, j) = m(rows[i], j);
        }
    return out;
}

Matrix take_cols(const Matrix& m, std::span<const std::size_t> cols) {
    Matrix out(m.rows(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] >= m.cols()) throw DimensionError("take_cols: index out of range");
        for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = m(i, cols[j]);
    }
    return out;
}

}  // namespace tdb

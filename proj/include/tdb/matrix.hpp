#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "tdb/error.hpp"

namespace tdb {

namespace detail {
void alloc_add(std::uint64_t bytes);
void alloc_sub(std::uint64_t bytes);

// Minimal allocator that feeds the peak-memory counters. Every Matrix buffer
// goes through it so tests can assert the sparse path never materializes an
// n-by-s temporary.
template <class T>
struct TrackingAllocator {
    using value_type = T;
    TrackingAllocator() = default;
    template <class U>
    TrackingAllocator(const TrackingAllocator<U>&) {}
    T* allocate(std::size_t n) {
        alloc_add(n * sizeof(T));
        return static_cast<T*>(::operator new(n * sizeof(T)));
    }
    void deallocate(T* p, std::size_t n) {
        alloc_sub(n * sizeof(T));
        ::operator delete(p);
    }
    friend bool operator==(const TrackingAllocator&, const TrackingAllocator&) { return true; }
};
}  // namespace detail

struct AllocStats {
    static std::uint64_t current_bytes();
    static std::uint64_t peak_bytes();
    static void reset_peak();
};

// Dense column-major matrix of doubles. Column-major is fixed project-wide:
// sample columns are contiguous, which is what the per-sample RHS evaluations
// and the tall-skinny products want.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> row_major);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return a_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[j * rows_ + i]; }

    double* col(std::size_t j) { return a_.data() + j * rows_; }
    const double* col(std::size_t j) const { return a_.data() + j * rows_; }
    std::span<const double> col_span(std::size_t j) const { return {col(j), rows_}; }
    std::span<double> col_span(std::size_t j) { return {col(j), rows_}; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    double max_abs() const;
    bool all_finite() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double, detail::TrackingAllocator<double>> a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

// rows/cols extraction by index list
Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows);
Matrix take_cols(const Matrix& m, std::span<const std::size_t> cols);

}  // namespace tdb

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nomina/error.hpp"

namespace nomina {

/// Dense row-major double matrix. The workhorse container for every model;
/// deliberately minimal.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw ShapeMismatch("matrix data length does not match rows*cols");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    double* row(std::size_t r) noexcept { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const noexcept { return data_.data() + r * cols_; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    void set_zero() { fill(0.0); }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    /// Reinterprets the buffer with a new shape of identical element count.
    void reshape(std::size_t rows, std::size_t cols) {
        if (rows * cols != data_.size())
            throw ShapeMismatch("reshape changes element count");
        rows_ = rows;
        cols_ = cols;
    }

    bool all_finite() const noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// C = A * B (optionally transposing either operand). Accumulation order over
/// the inner dimension is fixed, so results are identical for any thread count.
Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a = false, bool trans_b = false);

/// C += A * B with the same transpose semantics as matmul.
void matmul_add(Matrix& c, const Matrix& a, const Matrix& b, bool trans_a = false,
                bool trans_b = false);

/// Adds a 1 x cols bias row to every row of m, in place.
void add_row_vector(Matrix& m, const Matrix& bias);

/// Column sums as a 1 x cols matrix.
Matrix column_sums(const Matrix& m);

Matrix hadamard(const Matrix& a, const Matrix& b);
void hadamard_in_place(Matrix& a, const Matrix& b);
void axpy(Matrix& y, double alpha, const Matrix& x);  // y += alpha * x

double frobenius_norm(const Matrix& m);
double dot(const Matrix& a, const Matrix& b);

}  // namespace nomina

#include "nomina/matrix.hpp"

#include <cmath>
#include <cstring>

#include "nomina/parallel.hpp"

namespace nomina {

bool Matrix::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {

// C[i,:] += A[i,:] * B, streaming rows of B (ikj order).
void kernel_nn(Matrix& c, const Matrix& a, const Matrix& b, std::size_t row_begin,
               std::size_t row_end) {
    const std::size_t inner = a.cols();
    const std::size_t n = b.cols();
    for (std::size_t i = row_begin; i < row_end; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

// C[i,j] += dot(A[i,:], B[j,:])  (B transposed).
void kernel_nt(Matrix& c, const Matrix& a, const Matrix& b, std::size_t row_begin,
               std::size_t row_end) {
    const std::size_t inner = a.cols();
    const std::size_t n = b.rows();
    for (std::size_t i = row_begin; i < row_end; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
            crow[j] += acc;
        }
    }
}

// C[i,:] += sum_k A[k,i] * B[k,:]  (A transposed). Row range is over C.
void kernel_tn(Matrix& c, const Matrix& a, const Matrix& b, std::size_t row_begin,
               std::size_t row_end) {
    const std::size_t inner = a.rows();
    const std::size_t n = b.cols();
    for (std::size_t i = row_begin; i < row_end; ++i) {
        double* crow = c.row(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
        }
    }
}

// C[i,j] += dot(A[:,i], B[j,:]^T) with both transposed; rare, keep simple.
void kernel_tt(Matrix& c, const Matrix& a, const Matrix& b, std::size_t row_begin,
               std::size_t row_end) {
    const std::size_t inner = a.rows();
    for (std::size_t i = row_begin; i < row_end; ++i) {
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < inner; ++k) acc += a(k, i) * b(j, k);
            crow[j] += acc;
        }
    }
}

}  // namespace

void matmul_add(Matrix& c, const Matrix& a, const Matrix& b, bool trans_a, bool trans_b) {
    const std::size_t m = trans_a ? a.cols() : a.rows();
    const std::size_t inner = trans_a ? a.rows() : a.cols();
    const std::size_t inner_b = trans_b ? b.cols() : b.rows();
    const std::size_t n = trans_b ? b.rows() : b.cols();
    if (inner != inner_b) throw ShapeMismatch("matmul inner dimensions disagree");
    if (c.rows() != m || c.cols() != n) throw ShapeMismatch("matmul output shape disagrees");

    auto run = [&](auto kernel) {
        const std::size_t flops_per_row = inner * n;
        const std::size_t grain = flops_per_row ? std::max<std::size_t>(1, (1u << 18) / flops_per_row) : m;
        parallel_for(m, grain, [&](std::size_t lo, std::size_t hi) { kernel(c, a, b, lo, hi); });
    };
    if (!trans_a && !trans_b)
        run(kernel_nn);
    else if (!trans_a && trans_b)
        run(kernel_nt);
    else if (trans_a && !trans_b)
        run(kernel_tn);
    else
        run(kernel_tt);
}

Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a, bool trans_b) {
    Matrix c(trans_a ? a.cols() : a.rows(), trans_b ? b.rows() : b.cols());
    matmul_add(c, a, b, trans_a, trans_b);
    return c;
}

void add_row_vector(Matrix& m, const Matrix& bias) {
    if (bias.rows() != 1 || bias.cols() != m.cols())
        throw ShapeMismatch("bias row width disagrees with matrix");
    const double* brow = bias.row(0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) row[j] += brow[j];
    }
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols());
    double* acc = out.row(0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) acc[j] += row[j];
    }
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("hadamard shapes disagree");
    Matrix out = a;
    hadamard_in_place(out, b);
    return out;
}

void hadamard_in_place(Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("hadamard shapes disagree");
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] *= pb[i];
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
    if (!y.same_shape(x)) throw ShapeMismatch("axpy shapes disagree");
    double* py = y.data();
    const double* px = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) py[i] += alpha * px[i];
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.values()) acc += v * v;
    return std::sqrt(acc);
}

double dot(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("dot shapes disagree");
    double acc = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) acc += pa[i] * pb[i];
    return acc;
}

}  // namespace nomina

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/matrix.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "orthoedit/error.hpp"

namespace orthoedit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw DataError(fmt::format("matrix {}x{} needs {} values, got {}", rows_, cols_, rows_ * cols_, data_.size()));
}

Matrix Matrix::identity(std::size_t n) { return identity_columns(n, n); }

Matrix Matrix::identity_columns(std::size_t n, std::size_t cols) {
    Matrix m(n, cols);
    for (std::size_t i = 0; i < std::min(n, cols); ++i)
        m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_tensor(const DenseTensor& tensor) {
    if (!tensor.is_matrix())
        throw DataError(fmt::format("expected a 2-D tensor, got shape {}", shape_string(tensor.shape())));
    return Matrix(tensor.rows(), tensor.cols(), {tensor.values().begin(), tensor.values().end()});
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

DenseTensor Matrix::to_tensor(DType dtype) const { return DenseTensor({rows_, cols_}, dtype, data_); }

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DataError(fmt::format("matmul inner dimension mismatch: {}x{} by {}x{}", a.rows(), a.cols(), b.rows(),
                                    b.cols()));
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double aip = a(i, p);
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aip * b(p, j);
        }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DataError(fmt::format("matmul_tn row mismatch: {}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
    Matrix c(a.cols(), b.cols());
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double api = a(p, i);
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += api * b(p, j);
        }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DataError(fmt::format("matmul_nt column mismatch: {}x{} and {}x{}", a.rows(), a.cols(), b.rows(),
                                    b.cols()));
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p)
                s += a(i, p) * b(j, p);
            c(i, j) = s;
        }
    return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DataError("subtract: shape mismatch");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < c.data().size(); ++i)
        c.data()[i] = a.data()[i] - b.data()[i];
    return c;
}

double frobenius_norm(std::span<const double> values) {
    // Scaled accumulation avoids overflow for large entries.
    double scale = 0.0, ssq = 1.0;
    for (double v : values) {
        if (v == 0.0)
            continue;
        const double a = std::fabs(v);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

double frobenius_norm(const Matrix& m) { return frobenius_norm(m.data()); }

double max_abs(const Matrix& m) {
    double best = 0.0;
    for (double v : m.data())
        best = std::max(best, std::fabs(v));
    return best;
}

double orthonormality_residual(const Matrix& m) {
    const Matrix gram = matmul_tn(m, m);
    double worst = 0.0;
    for (std::size_t i = 0; i < gram.rows(); ++i)
        for (std::size_t j = 0; j < gram.cols(); ++j)
            worst = std::max(worst, std::fabs(gram(i, j) - (i == j ? 1.0 : 0.0)));
    return worst;
}

} // namespace orthoedit

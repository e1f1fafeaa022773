// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "orthoedit/tensor.hpp"

namespace orthoedit {

/// Row-major float64 matrix used by the numerical core. All products use a
/// fixed summation order, so results are bit-reproducible.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    /// First `cols` columns of the n x n identity.
    static Matrix identity_columns(std::size_t n, std::size_t cols);
    /// Throws DataError unless the tensor is 2-D.
    static Matrix from_tensor(const DenseTensor& tensor);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    Matrix transpose() const;
    DenseTensor to_tensor(DType dtype = DType::F64) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);
double frobenius_norm(std::span<const double> values);
double max_abs(const Matrix& m);
/// max |(mᵀm)_ij − δ_ij|
double orthonormality_residual(const Matrix& m);

} // namespace orthoedit

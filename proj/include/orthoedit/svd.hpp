// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "orthoedit/matrix.hpp"

namespace orthoedit {

/// Thin SVD factors W = U·diag(S)·Vᵀ of one layer, r = min(d, k).
///
/// Singular values are non-increasing. Columns are canonicalized so that the
/// largest-magnitude entry of each u_j is non-negative (lowest row index wins
/// ties); v_j is flipped alongside to keep the product intact. Columns for
/// zero singular values complete U and V to orthonormal sets.
struct OrthogonalBasis {
    std::string layer_name;
    Matrix u;              // d x r
    std::vector<double> s; // r
    Matrix v;              // k x r

    std::size_t rank() const { return s.size(); }
    std::size_t rows() const { return u.rows(); }
    std::size_t cols() const { return v.rows(); }
};

/// Golub–Kahan bidiagonalization followed by implicit-shift QR on the
/// bidiagonal. Single-threaded and branch-deterministic: identical input bits
/// give identical output bits. Throws DataError for non-finite input and
/// NumericalError if the QR sweep fails to converge.
OrthogonalBasis thin_svd(const Matrix& w, std::string layer_name = {});
OrthogonalBasis thin_svd(const DenseTensor& w, std::string layer_name = {});

/// U·diag(S)·Vᵀ
Matrix reconstruct(const OrthogonalBasis& basis);

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "oracles.hpp"
#include "orthoedit/matrix.hpp"
#include "orthoedit/svd.hpp"
#include "orthoedit/tensor.hpp"

namespace testing {

inline orthoedit::Matrix to_matrix(const oracle::Dense& d) { return orthoedit::Matrix(d.rows, d.cols, d.a); }

inline oracle::Dense to_dense(const orthoedit::Matrix& m) {
    oracle::Dense d(m.rows(), m.cols());
    d.a.assign(m.data().begin(), m.data().end());
    return d;
}

inline oracle::Dense to_dense(const orthoedit::DenseTensor& t) {
    oracle::Dense d(t.rows(), t.cols());
    d.a.assign(t.values().begin(), t.values().end());
    return d;
}

inline orthoedit::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
    return to_matrix(oracle::random_dense(rows, cols, seed, scale));
}

inline orthoedit::DenseTensor random_tensor(orthoedit::Shape shape, std::uint64_t seed,
                                            orthoedit::DType dtype = orthoedit::DType::F64) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(orthoedit::shape_numel(shape));
    for (double& x : v)
        x = u(rng);
    return orthoedit::DenseTensor(std::move(shape), dtype, std::move(v));
}

/// ‖U·diag(S)·Vᵀ − W‖_F / ‖W‖_F via the oracle product (absolute when W = 0).
inline double reconstruction_error(const orthoedit::OrthogonalBasis& b, const orthoedit::Matrix& w) {
    oracle::Dense us = to_dense(b.u);
    for (std::size_t i = 0; i < us.rows; ++i)
        for (std::size_t j = 0; j < us.cols; ++j)
            us(i, j) *= b.s[j];
    const auto rebuilt = oracle::mul(us, oracle::transpose(to_dense(b.v)));
    const auto target = to_dense(w);
    const double n = oracle::frob(target);
    const double e = oracle::frob_diff(rebuilt, target);
    return n > 0.0 ? e / n : e;
}

/// max |QᵀQ − I| via the oracle product.
inline double gram_residual(const orthoedit::Matrix& q) {
    const auto d = to_dense(q);
    const auto g = oracle::mul(oracle::transpose(d), d);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j)
            worst = std::max(worst, std::fabs(g(i, j) - (i == j ? 1.0 : 0.0)));
    return worst;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("orthoedit_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing

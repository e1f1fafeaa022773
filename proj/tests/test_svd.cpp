// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "helpers.hpp"
#include "orthoedit/error.hpp"
#include "orthoedit/svd.hpp"

using namespace orthoedit;
using testing::gram_residual;
using testing::random_matrix;
using testing::reconstruction_error;

TEST_CASE("thin_svd of the identity is the identity") {
    const auto b = thin_svd(Matrix::identity(3));
    CHECK(b.s == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(b.u == Matrix::identity(3));
    CHECK(b.v == Matrix::identity(3));
}

TEST_CASE("thin_svd of a diagonal matrix sorts magnitudes and moves signs into V") {
    const Matrix w(2, 2, {3.0, 0.0, 0.0, -2.0});
    const auto b = thin_svd(w);
    CHECK(b.s[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(b.s[1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(b.u(0, 0) == doctest::Approx(1.0));
    CHECK(b.u(1, 1) == doctest::Approx(1.0));
    CHECK(b.v(0, 0) == doctest::Approx(1.0));
    CHECK(b.v(1, 1) == doctest::Approx(-1.0));
    CHECK(std::fabs(b.u(0, 1)) < 1e-15);
    CHECK(std::fabs(b.v(1, 0)) < 1e-15);
}

TEST_CASE("thin_svd reconstructs random rectangular matrices") {
    for (auto [d, k] : {std::pair{8, 5}, {5, 8}, {1, 7}, {7, 1}, {16, 16}, {33, 20}}) {
        const auto w = random_matrix(std::size_t(d), std::size_t(k), 1000 + std::uint64_t(d * 100 + k));
        const auto b = thin_svd(w);
        CAPTURE(d);
        CAPTURE(k);
        REQUIRE(b.rank() == std::size_t(std::min(d, k)));
        CHECK(b.u.rows() == std::size_t(d));
        CHECK(b.v.rows() == std::size_t(k));
        CHECK(reconstruction_error(b, w) <= 1e-12);
        CHECK(gram_residual(b.u) <= 1e-12);
        CHECK(gram_residual(b.v) <= 1e-12);
        for (std::size_t i = 1; i < b.rank(); ++i)
            CHECK(b.s[i] <= b.s[i - 1]);
    }
}

TEST_CASE("thin_svd energy equals the squared Frobenius norm") {
    const auto w = random_matrix(12, 9, 77);
    const auto b = thin_svd(w);
    double energy = 0.0;
    for (double s : b.s)
        energy += s * s;
    const double fro = oracle::frob(testing::to_dense(w));
    CHECK(std::fabs(energy - fro * fro) / (fro * fro) <= 1e-12);
}

TEST_CASE("thin_svd of a zero matrix returns zero values and identity columns") {
    const auto b = thin_svd(Matrix(4, 3));
    CHECK(b.s == std::vector<double>(3, 0.0));
    CHECK(b.u == Matrix::identity_columns(4, 3));
    CHECK(b.v == Matrix::identity(3));
}

TEST_CASE("thin_svd handles rank-deficient input with an orthonormal completion") {
    // Rank 2 product of random 10x2 and 2x6 factors.
    const auto left = oracle::random_dense(10, 2, 5);
    const auto right = oracle::random_dense(2, 6, 6);
    const auto w = testing::to_matrix(oracle::mul(left, right));
    const auto b = thin_svd(w);
    CHECK(gram_residual(b.u) <= 1e-12);
    CHECK(gram_residual(b.v) <= 1e-12);
    CHECK(reconstruction_error(b, w) <= 1e-12);
    for (std::size_t i = 2; i < b.rank(); ++i)
        CHECK(b.s[i] <= 1e-14 * b.s[0]);
}

TEST_CASE("thin_svd sign convention: largest-magnitude entry of each u column is non-negative") {
    const auto w = random_matrix(9, 6, 4242);
    const auto b = thin_svd(w);
    for (std::size_t j = 0; j < b.rank(); ++j) {
        std::size_t pivot = 0;
        for (std::size_t i = 1; i < b.u.rows(); ++i)
            if (std::fabs(b.u(i, j)) > std::fabs(b.u(pivot, j)))
                pivot = i;
        CHECK(b.u(pivot, j) >= 0.0);
    }
}

TEST_CASE("thin_svd is bit-reproducible") {
    const auto w = random_matrix(20, 13, 99);
    const auto a = thin_svd(w);
    const auto b = thin_svd(w);
    CHECK(std::memcmp(a.u.data().data(), b.u.data().data(), a.u.data().size_bytes()) == 0);
    CHECK(std::memcmp(a.v.data().data(), b.v.data().data(), a.v.data().size_bytes()) == 0);
    CHECK(std::memcmp(a.s.data(), b.s.data(), a.s.size() * sizeof(double)) == 0);
}

TEST_CASE("thin_svd copes with repeated and widely scaled singular values") {
    // Diagonal with a repeated value and a 1e-200 entry.
    Matrix w(4, 4);
    w(0, 0) = 5.0;
    w(1, 1) = 5.0;
    w(2, 2) = 1e-200;
    w(3, 3) = -2.0;
    const auto b = thin_svd(w);
    CHECK(b.s[0] == doctest::Approx(5.0));
    CHECK(b.s[1] == doctest::Approx(5.0));
    CHECK(b.s[2] == doctest::Approx(2.0));
    CHECK(gram_residual(b.u) <= 1e-14);
    CHECK(reconstruction_error(b, w) <= 1e-14);

    const auto big = random_matrix(6, 6, 3, 1e150);
    CHECK(reconstruction_error(thin_svd(big), big) <= 1e-12);
    const auto tiny = random_matrix(6, 6, 3, 1e-150);
    CHECK(reconstruction_error(thin_svd(tiny), tiny) <= 1e-12);
}

TEST_CASE("thin_svd rejects non-2-D and non-finite input") {
    CHECK_THROWS_AS(thin_svd(DenseTensor({2, 2, 2}, DType::F64, std::vector<double>(8, 1.0))), DataError);
    Matrix w(2, 2);
    w(1, 0) = std::nan("");
    CHECK_THROWS_AS(thin_svd(w), DataError);
    w(1, 0) = INFINITY;
    CHECK_THROWS_AS(thin_svd(w), DataError);
}

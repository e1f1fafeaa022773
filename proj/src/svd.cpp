// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "orthoedit/error.hpp"

namespace orthoedit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Off-diagonal e_i is treated as zero once |e_i| <= kSplitTol·(|d_{i-1}| + |d_i|).
constexpr double kSplitTol = 1e-14;
constexpr int kMaxSweeps = 75;

double copy_sign(double magnitude, double sign_of) { return sign_of >= 0.0 ? std::fabs(magnitude) : -std::fabs(magnitude); }

struct RawSvd {
    Matrix u; // m x n
    std::vector<double> s;
    Matrix v; // n x n
};

// Requires m >= n. `a` is overwritten with U.
RawSvd golub_kahan(Matrix a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    std::vector<double> w(n, 0.0), e(n, 0.0);
    Matrix v(n, n);

    // Householder reduction to upper bidiagonal form: diagonal in w,
    // superdiagonal in e[1..n-1].
    double g = 0.0, scale = 0.0, anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = i + 1;
        e[i] = scale * g;
        g = scale = 0.0;
        double s = 0.0;
        for (std::size_t k = i; k < m; ++k)
            scale += std::fabs(a(k, i));
        if (scale != 0.0) {
            for (std::size_t k = i; k < m; ++k) {
                a(k, i) /= scale;
                s += a(k, i) * a(k, i);
            }
            double f = a(i, i);
            g = -copy_sign(std::sqrt(s), f);
            const double h = f * g - s;
            a(i, i) = f - g;
            for (std::size_t j = l; j < n; ++j) {
                s = 0.0;
                for (std::size_t k = i; k < m; ++k)
                    s += a(k, i) * a(k, j);
                f = s / h;
                for (std::size_t k = i; k < m; ++k)
                    a(k, j) += f * a(k, i);
            }
            for (std::size_t k = i; k < m; ++k)
                a(k, i) *= scale;
        }
        w[i] = scale * g;

        g = s = scale = 0.0;
        if (i + 1 != n) {
            for (std::size_t k = l; k < n; ++k)
                scale += std::fabs(a(i, k));
            if (scale != 0.0) {
                for (std::size_t k = l; k < n; ++k) {
                    a(i, k) /= scale;
                    s += a(i, k) * a(i, k);
                }
                const double f = a(i, l);
                g = -copy_sign(std::sqrt(s), f);
                const double h = f * g - s;
                a(i, l) = f - g;
                std::vector<double> row(n, 0.0);
                for (std::size_t k = l; k < n; ++k)
                    row[k] = a(i, k) / h;
                for (std::size_t j = l; j < m; ++j) {
                    s = 0.0;
                    for (std::size_t k = l; k < n; ++k)
                        s += a(j, k) * a(i, k);
                    for (std::size_t k = l; k < n; ++k)
                        a(j, k) += s * row[k];
                }
                for (std::size_t k = l; k < n; ++k)
                    a(i, k) *= scale;
            }
        }
        anorm = std::max(anorm, std::fabs(w[i]) + std::fabs(e[i]));
    }
    if (n > 1)
        e[0] = 0.0;

    // Accumulate right-hand transformations into V.
    for (std::size_t ii = n; ii-- > 0;) {
        const std::size_t i = ii;
        const std::size_t l = i + 1;
        if (l < n) {
            const double gr = e[l];
            if (gr != 0.0) {
                for (std::size_t j = l; j < n; ++j)
                    v(j, i) = (a(i, j) / a(i, l)) / gr;
                for (std::size_t j = l; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t k = l; k < n; ++k)
                        s += a(i, k) * v(k, j);
                    for (std::size_t k = l; k < n; ++k)
                        v(k, j) += s * v(k, i);
                }
            }
            for (std::size_t j = l; j < n; ++j)
                v(i, j) = v(j, i) = 0.0;
        }
        v(i, i) = 1.0;
    }

    // Accumulate left-hand transformations into U (in place in a).
    for (std::size_t ii = n; ii-- > 0;) {
        const std::size_t i = ii;
        const std::size_t l = i + 1;
        double gl = w[i];
        for (std::size_t j = l; j < n; ++j)
            a(i, j) = 0.0;
        if (gl != 0.0) {
            gl = 1.0 / gl;
            for (std::size_t j = l; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = l; k < m; ++k)
                    s += a(k, i) * a(k, j);
                const double f = (s / a(i, i)) * gl;
                for (std::size_t k = i; k < m; ++k)
                    a(k, j) += f * a(k, i);
            }
            for (std::size_t j = i; j < m; ++j)
                a(j, i) *= gl;
        } else {
            for (std::size_t j = i; j < m; ++j)
                a(j, i) = 0.0;
        }
        a(i, i) += 1.0;
    }

    const double floor = kEps * anorm;
    auto offdiag_negligible = [&](std::size_t l) {
        const double mag = std::fabs(e[l]);
        return mag <= floor || mag <= kSplitTol * (std::fabs(w[l - 1]) + std::fabs(w[l]));
    };

    // Implicit-shift QR on the bidiagonal, deflating from the bottom.
    for (std::size_t kk = n; kk-- > 0;) {
        const std::size_t k = kk;
        for (int sweep = 0;; ++sweep) {
            bool cancel = true;
            std::size_t l = k;
            for (;; --l) {
                if (l == 0 || offdiag_negligible(l)) {
                    cancel = false;
                    break;
                }
                if (std::fabs(w[l - 1]) <= floor)
                    break;
            }
            if (cancel) {
                // w[l-1] is negligible: chase e[l] out with left rotations.
                const std::size_t nm = l - 1;
                double c = 0.0, s = 1.0;
                for (std::size_t i = l; i <= k; ++i) {
                    const double f = s * e[i];
                    e[i] = c * e[i];
                    if (std::fabs(f) <= floor)
                        break;
                    const double gg = w[i];
                    double h = std::hypot(f, gg);
                    w[i] = h;
                    h = 1.0 / h;
                    c = gg * h;
                    s = -f * h;
                    for (std::size_t j = 0; j < m; ++j) {
                        const double y = a(j, nm);
                        const double z = a(j, i);
                        a(j, nm) = y * c + z * s;
                        a(j, i) = z * c - y * s;
                    }
                }
            }
            double z = w[k];
            if (l == k) {
                if (z < 0.0) {
                    w[k] = -z;
                    for (std::size_t j = 0; j < n; ++j)
                        v(j, k) = -v(j, k);
                }
                break;
            }
            if (sweep == kMaxSweeps)
                throw NumericalError(fmt::format("SVD failed to converge after {} sweeps", kMaxSweeps));

            // Wilkinson-style shift from the trailing 2x2 block.
            double x = w[l];
            const std::size_t nm = k - 1;
            double y = w[nm];
            double gg = e[nm];
            double h = e[k];
            double f = ((y - z) * (y + z) + (gg - h) * (gg + h)) / (2.0 * h * y);
            gg = std::hypot(f, 1.0);
            f = ((x - z) * (x + z) + h * ((y / (f + copy_sign(gg, f))) - h)) / x;

            double c = 1.0, s = 1.0;
            for (std::size_t j = l; j <= nm; ++j) {
                const std::size_t i = j + 1;
                gg = e[i];
                y = w[i];
                h = s * gg;
                gg = c * gg;
                z = std::hypot(f, h);
                e[j] = z;
                c = f / z;
                s = h / z;
                f = x * c + gg * s;
                gg = gg * c - x * s;
                h = y * s;
                y *= c;
                for (std::size_t jj = 0; jj < n; ++jj) {
                    const double vx = v(jj, j);
                    const double vz = v(jj, i);
                    v(jj, j) = vx * c + vz * s;
                    v(jj, i) = vz * c - vx * s;
                }
                z = std::hypot(f, h);
                w[j] = z;
                if (z != 0.0) {
                    z = 1.0 / z;
                    c = f * z;
                    s = h * z;
                }
                f = c * gg + s * y;
                x = c * y - s * gg;
                for (std::size_t jj = 0; jj < m; ++jj) {
                    const double uy = a(jj, j);
                    const double uz = a(jj, i);
                    a(jj, j) = uy * c + uz * s;
                    a(jj, i) = uz * c - uy * s;
                }
            }
            e[l] = 0.0;
            e[k] = f;
            w[k] = x;
        }
    }
    return {std::move(a), std::move(w), std::move(v)};
}

void sort_and_canonicalize(OrthogonalBasis& basis) {
    const std::size_t r = basis.s.size();
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return basis.s[a] > basis.s[b]; });

    Matrix u(basis.u.rows(), r), v(basis.v.rows(), r);
    std::vector<double> s(r);
    for (std::size_t j = 0; j < r; ++j) {
        const std::size_t src = order[j];
        s[j] = basis.s[src];
        std::size_t pivot = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < u.rows(); ++i) {
            const double mag = std::fabs(basis.u(i, src));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        const double sign = basis.u(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < u.rows(); ++i)
            u(i, j) = sign * basis.u(i, src);
        for (std::size_t i = 0; i < v.rows(); ++i)
            v(i, j) = sign * basis.v(i, src);
    }
    basis.u = std::move(u);
    basis.v = std::move(v);
    basis.s = std::move(s);
}

} // namespace

OrthogonalBasis thin_svd(const Matrix& w, std::string layer_name) {
    if (w.rows() == 0 || w.cols() == 0)
        throw DataError(fmt::format("thin_svd: empty matrix {}x{}", w.rows(), w.cols()));
    for (std::size_t i = 0; i < w.data().size(); ++i)
        if (!std::isfinite(w.data()[i]))
            throw DataError(fmt::format("thin_svd: non-finite entry at element {}{}", i,
                                        layer_name.empty() ? "" : fmt::format(" of '{}'", layer_name)));

    OrthogonalBasis basis;
    basis.layer_name = std::move(layer_name);
    try {
        if (w.rows() >= w.cols()) {
            auto raw = golub_kahan(w);
            basis.u = std::move(raw.u);
            basis.s = std::move(raw.s);
            basis.v = std::move(raw.v);
        } else {
            auto raw = golub_kahan(w.transpose());
            basis.u = std::move(raw.v);
            basis.s = std::move(raw.s);
            basis.v = std::move(raw.u);
        }
    } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("{}{}", e.what(),
                                         basis.layer_name.empty() ? "" : fmt::format(" for '{}'", basis.layer_name)));
    }
    sort_and_canonicalize(basis);
    return basis;
}

OrthogonalBasis thin_svd(const DenseTensor& w, std::string layer_name) {
    if (!w.is_matrix())
        throw DataError(fmt::format("thin_svd: '{}' has shape {}, expected 2-D", layer_name, shape_string(w.shape())));
    return thin_svd(Matrix::from_tensor(w), std::move(layer_name));
}

Matrix reconstruct(const OrthogonalBasis& basis) {
    Matrix us = basis.u;
    for (std::size_t i = 0; i < us.rows(); ++i)
        for (std::size_t j = 0; j < us.cols(); ++j)
            us(i, j) *= basis.s[j];
    return matmul_nt(us, basis.v);
}

} // namespace orthoedit

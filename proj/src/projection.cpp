// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/projection.hpp"

#include <cmath>

#include <fmt/format.h>

#include "orthoedit/error.hpp"

namespace orthoedit {

ProjectionSpectrum ProjectionSpectrum::from_coeffs(std::string layer_name, Matrix coeffs) {
    for (double c : coeffs.data())
        if (!std::isfinite(c))
            throw NumericalError(fmt::format("projection of '{}' produced a non-finite coefficient", layer_name));
    const double peak = orthoedit::max_abs(coeffs);
    return {std::move(layer_name), std::move(coeffs), peak};
}

std::size_t ProjectionSpectrum::nonzero_count() const {
    std::size_t n = 0;
    for (double c : coeffs.data())
        n += c != 0.0;
    return n;
}

ProjectionSpectrum project_delta(const OrthogonalBasis& basis, const Matrix& delta) {
    if (delta.rows() != basis.rows() || delta.cols() != basis.cols())
        throw DataError(fmt::format("cannot project a {}x{} delta onto the {}x{} basis of '{}'", delta.rows(),
                                    delta.cols(), basis.rows(), basis.cols(), basis.layer_name));
    return ProjectionSpectrum::from_coeffs(basis.layer_name, matmul(matmul_tn(basis.u, delta), basis.v));
}

ProjectionSpectrum filter_spectrum(const ProjectionSpectrum& spectrum, double xi_fraction) {
    if (!(xi_fraction >= 0.0) || std::isinf(xi_fraction))
        throw UsageError(fmt::format("xi_fraction must be finite and >= 0, got {}", xi_fraction));
    const double threshold = xi_fraction * spectrum.max_abs;
    Matrix kept = spectrum.coeffs;
    for (double& c : kept.data())
        if (!(std::fabs(c) >= threshold))
            c = 0.0;
    return ProjectionSpectrum::from_coeffs(spectrum.layer_name, std::move(kept));
}

Matrix reconstruct_delta(const OrthogonalBasis& basis, const ProjectionSpectrum& spectrum) {
    const std::size_t r = basis.rank();
    if (spectrum.coeffs.rows() != r || spectrum.coeffs.cols() != r)
        throw DataError(fmt::format("spectrum of '{}' is {}x{}, basis rank is {}", spectrum.layer_name,
                                    spectrum.coeffs.rows(), spectrum.coeffs.cols(), r));
    return matmul_nt(matmul(basis.u, spectrum.coeffs), basis.v);
}

} // namespace orthoedit

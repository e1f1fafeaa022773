// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "orthoedit/matrix.hpp"
#include "orthoedit/svd.hpp"

namespace orthoedit {

/// Coefficients of a delta expressed in a layer's singular basis, Uᵀ·ΔW·V.
/// Generally not diagonal.
struct ProjectionSpectrum {
    std::string layer_name;
    Matrix coeffs; // r x r
    double max_abs = 0.0;

    /// Computes max_abs; throws NumericalError if any coefficient is non-finite.
    static ProjectionSpectrum from_coeffs(std::string layer_name, Matrix coeffs);

    std::size_t nonzero_count() const;
};

ProjectionSpectrum project_delta(const OrthogonalBasis& basis, const Matrix& delta);

/// Element-wise magnitude filter over the full r x r coefficient matrix:
/// entries with |c| >= xi_fraction·max_abs survive verbatim, the rest become 0.
/// Throws UsageError for a negative or NaN xi_fraction.
ProjectionSpectrum filter_spectrum(const ProjectionSpectrum& spectrum, double xi_fraction);

/// U·coeffs·Vᵀ
Matrix reconstruct_delta(const OrthogonalBasis& basis, const ProjectionSpectrum& spectrum);

} // namespace orthoedit

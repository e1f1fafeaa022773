// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "orthoedit/projection.hpp"

namespace orthoedit {

enum class HistogramNormalization { MaxAbs, None };

/// Value distribution of projected coefficients. Bins are uniform over
/// [-1, 1] (max-abs normalization) or [-max_abs, max_abs] (none); each bin is
/// half-open [lo, hi) except the last, which is closed.
struct SpectrumHistogram {
    std::string layer_name;
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
    std::vector<double> densities; // count / (total · bin_width), linear scale
    HistogramNormalization normalization = HistogramNormalization::MaxAbs;

    double bin_width() const { return (bin_edges.back() - bin_edges.front()) / double(counts.size()); }
    std::vector<double> bin_centers() const;
};

/// Index of the bin holding `value` under the half-open convention. Throws
/// DataError if the value is outside [edges.front(), edges.back()].
std::size_t bin_index(const std::vector<double>& edges, double value);

/// Throws UsageError for bins < 2, NumericalError("degenerate spectrum") when
/// max_abs is 0.
SpectrumHistogram histogram(const ProjectionSpectrum& spectrum, int bins,
                            HistogramNormalization normalization = HistogramNormalization::MaxAbs);

/// Pools several layers, each normalized by its own max_abs.
SpectrumHistogram histogram(const std::vector<ProjectionSpectrum>& spectra, int bins, std::string label);

/// "bin,cnt" CSV, one row per bin: bin center, density.
std::string histogram_csv(const SpectrumHistogram& hist);

/// Threshold fractions screened when choosing ξ.
inline constexpr std::array<double, 5> kXiGrid = {0.01, 0.03, 0.05, 0.07, 0.09};

/// Share of entries with |c| >= f·max_abs. An all-zero spectrum reports 0.
double fraction_above(const ProjectionSpectrum& spectrum, double f);

struct SpectrumStats {
    std::string layer_name;
    double max_abs = 0.0;
    double frobenius = 0.0;
    std::vector<std::pair<double, double>> fraction_above; // (f, share) over kXiGrid

    nlohmann::json to_json() const;
};

SpectrumStats stats(const ProjectionSpectrum& spectrum);

} // namespace orthoedit

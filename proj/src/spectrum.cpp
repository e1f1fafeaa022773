// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "orthoedit/error.hpp"

namespace orthoedit {

namespace {

std::vector<double> uniform_edges(double lo, double hi, int bins) {
    std::vector<double> edges(std::size_t(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        edges[std::size_t(i)] = lo + (hi - lo) * double(i) / double(bins);
    edges.back() = hi;
    return edges;
}

SpectrumHistogram bin_values(std::string label, const std::vector<double>& values, double lo, double hi, int bins,
                             HistogramNormalization normalization) {
    SpectrumHistogram hist;
    hist.layer_name = std::move(label);
    hist.normalization = normalization;
    hist.bin_edges = uniform_edges(lo, hi, bins);
    hist.counts.assign(std::size_t(bins), 0);
    for (double v : values)
        ++hist.counts[bin_index(hist.bin_edges, v)];
    const double width = hist.bin_width();
    const double total = double(values.size());
    hist.densities.resize(hist.counts.size());
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        hist.densities[b] = double(hist.counts[b]) / (total * width);
    return hist;
}

void require_bins(int bins) {
    if (bins < 2)
        throw UsageError(fmt::format("histogram needs at least 2 bins, got {}", bins));
}

void require_nonempty(const ProjectionSpectrum& spectrum) {
    if (spectrum.coeffs.data().empty())
        throw DataError(fmt::format("spectrum of '{}' is empty", spectrum.layer_name));
}

void require_nondegenerate(const ProjectionSpectrum& spectrum) {
    if (spectrum.max_abs == 0.0)
        throw NumericalError(fmt::format("degenerate spectrum: '{}' is all zeros", spectrum.layer_name));
}

} // namespace

std::vector<double> SpectrumHistogram::bin_centers() const {
    std::vector<double> centers(counts.size());
    for (std::size_t b = 0; b < centers.size(); ++b)
        centers[b] = 0.5 * (bin_edges[b] + bin_edges[b + 1]);
    return centers;
}

std::size_t bin_index(const std::vector<double>& edges, double value) {
    if (!(value >= edges.front() && value <= edges.back()))
        throw DataError(fmt::format("value {} is outside the histogram range [{}, {}]", value, edges.front(),
                                    edges.back()));
    if (value == edges.back())
        return edges.size() - 2;
    const auto it = std::upper_bound(edges.begin(), edges.end(), value);
    return std::size_t(it - edges.begin()) - 1;
}

SpectrumHistogram histogram(const ProjectionSpectrum& spectrum, int bins, HistogramNormalization normalization) {
    require_bins(bins);
    require_nonempty(spectrum);
    require_nondegenerate(spectrum);
    std::vector<double> values(spectrum.coeffs.data().begin(), spectrum.coeffs.data().end());
    if (normalization == HistogramNormalization::MaxAbs) {
        for (double& v : values)
            v /= spectrum.max_abs;
        return bin_values(spectrum.layer_name, values, -1.0, 1.0, bins, normalization);
    }
    return bin_values(spectrum.layer_name, values, -spectrum.max_abs, spectrum.max_abs, bins, normalization);
}

SpectrumHistogram histogram(const std::vector<ProjectionSpectrum>& spectra, int bins, std::string label) {
    require_bins(bins);
    if (spectra.empty())
        throw DataError("no spectra to histogram");
    std::vector<double> values;
    for (const auto& spectrum : spectra) {
        require_nonempty(spectrum);
        require_nondegenerate(spectrum);
        for (double c : spectrum.coeffs.data())
            values.push_back(c / spectrum.max_abs);
    }
    return bin_values(std::move(label), values, -1.0, 1.0, bins, HistogramNormalization::MaxAbs);
}

std::string histogram_csv(const SpectrumHistogram& hist) {
    std::string out = "bin,cnt\n";
    const auto centers = hist.bin_centers();
    for (std::size_t b = 0; b < centers.size(); ++b)
        out += fmt::format("{},{}\n", centers[b], hist.densities[b]);
    return out;
}

double fraction_above(const ProjectionSpectrum& spectrum, double f) {
    require_nonempty(spectrum);
    if (spectrum.max_abs == 0.0)
        return 0.0;
    const double threshold = f * spectrum.max_abs;
    std::size_t n = 0;
    for (double c : spectrum.coeffs.data())
        n += std::fabs(c) >= threshold;
    return double(n) / double(spectrum.coeffs.data().size());
}

SpectrumStats stats(const ProjectionSpectrum& spectrum) {
    require_nonempty(spectrum);
    SpectrumStats out;
    out.layer_name = spectrum.layer_name;
    out.max_abs = spectrum.max_abs;
    out.frobenius = frobenius_norm(spectrum.coeffs);
    for (double f : kXiGrid)
        out.fraction_above.emplace_back(f, fraction_above(spectrum, f));
    return out;
}

nlohmann::json SpectrumStats::to_json() const {
    nlohmann::json above = nlohmann::json::array();
    for (const auto& [f, share] : fraction_above)
        above.push_back({{"f", f}, {"share", share}});
    return {{"layer_name", layer_name}, {"max_abs", max_abs}, {"frobenius", frobenius}, {"fraction_above", above}};
}

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "orthoedit/error.hpp"
#include "orthoedit/projection.hpp"
#include "orthoedit/svd.hpp"

namespace orthoedit {

namespace {

std::vector<double> resolved_singular_values(const PlantedScenario& sc) {
    if (!sc.singular_values.empty())
        return sc.singular_values;
    std::vector<double> s(sc.rank());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = 1.0 / (1.0 + double(i));
    return s;
}

// Squared coefficient mass at `positions`.
double energy_at(const Matrix& coeffs, const std::vector<Position>& positions) {
    double e = 0.0;
    for (const auto& p : positions)
        e += coeffs(p.row, p.col) * coeffs(p.row, p.col);
    return e;
}

} // namespace

void PlantedScenario::validate() const {
    if (d == 0 || k == 0)
        throw UsageError(fmt::format("scenario dimensions must be positive, got {}x{}", d, k));
    if (!(amp_general > 0.0 && amp_undesired > amp_general))
        throw UsageError(fmt::format("scenario needs 0 < amp_general < amp_undesired, got {} and {}", amp_general,
                                     amp_undesired));
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw UsageError(fmt::format("noise_sigma must be finite and >= 0, got {}", noise_sigma));
    const std::size_t r = rank();
    std::set<Position> seen;
    for (const auto* set : {&general_indices, &undesired_indices})
        for (const auto& p : *set) {
            if (p.row >= r || p.col >= r)
                throw UsageError(fmt::format("planted position ({}, {}) is outside the {}x{} coefficient grid", p.row,
                                             p.col, r, r));
            if (!seen.insert(p).second)
                throw UsageError(fmt::format("planted position ({}, {}) appears twice", p.row, p.col));
        }
    const auto s = resolved_singular_values(*this);
    if (s.size() != r)
        throw UsageError(fmt::format("scenario needs {} singular values, got {}", r, s.size()));
    for (std::size_t i = 0; i < r; ++i) {
        if (!(s[i] > 0.0))
            throw UsageError("scenario singular values must be positive");
        if (i > 0 && !(s[i] < s[i - 1]))
            throw UsageError("scenario singular values must be strictly decreasing");
    }
}

bool PlantedScenario::margin_satisfied(double xi_fraction) const {
    return amp_undesired * xi_fraction > amp_general + 5.0 * noise_sigma;
}

PlantedScenario make_scenario(std::size_t d, std::size_t k, std::uint64_t seed, std::size_t n_undesired,
                              std::size_t n_general, double amp_undesired, double amp_general, double noise_sigma) {
    PlantedScenario sc;
    sc.d = d;
    sc.k = k;
    sc.seed = seed;
    sc.amp_undesired = amp_undesired;
    sc.amp_general = amp_general;
    sc.noise_sigma = noise_sigma;
    const std::size_t r = sc.rank();
    if (n_undesired + n_general > r * r)
        throw UsageError(fmt::format("cannot plant {} positions in a {}x{} grid", n_undesired + n_general, r, r));
    std::vector<std::size_t> cells(r * r);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
    std::shuffle(cells.begin(), cells.end(), rng);
    for (std::size_t i = 0; i < n_undesired + n_general; ++i) {
        const Position p{cells[i] / r, cells[i] % r};
        (i < n_undesired ? sc.undesired_indices : sc.general_indices).push_back(p);
    }
    sc.validate();
    return sc;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (cols > rows)
        throw UsageError(fmt::format("cannot draw {} orthonormal columns in dimension {}", cols, rows));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix q(rows, cols);
    for (double& x : q.data())
        x = gauss(rng);
    // Modified Gram–Schmidt, applied twice for orthogonality to working precision.
    for (std::size_t j = 0; j < cols; ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t p = 0; p < j; ++p) {
                double dot = 0.0;
                for (std::size_t i = 0; i < rows; ++i)
                    dot += q(i, p) * q(i, j);
                for (std::size_t i = 0; i < rows; ++i)
                    q(i, j) -= dot * q(i, p);
            }
        double norm = 0.0;
        for (std::size_t i = 0; i < rows; ++i)
            norm += q(i, j) * q(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0)
            throw NumericalError("random_orthonormal drew a dependent column");
        for (std::size_t i = 0; i < rows; ++i)
            q(i, j) /= norm;
    }
    return q;
}

PlantedFixture build_scenario(const PlantedScenario& sc) {
    sc.validate();
    const std::size_t r = sc.rank();
    PlantedFixture fx;
    fx.s0 = resolved_singular_values(sc);
    fx.u0 = random_orthonormal(sc.d, r, sc.seed);
    fx.v0 = random_orthonormal(sc.k, r, sc.seed + 1);

    Matrix us = fx.u0;
    for (std::size_t i = 0; i < sc.d; ++i)
        for (std::size_t j = 0; j < r; ++j)
            us(i, j) *= fx.s0[j];
    fx.base = matmul_nt(us, fx.v0);

    Matrix planted(r, r);
    for (const auto& p : sc.general_indices)
        planted(p.row, p.col) = sc.amp_general;
    for (const auto& p : sc.undesired_indices)
        planted(p.row, p.col) = sc.amp_undesired;
    fx.delta = matmul_nt(matmul(fx.u0, planted), fx.v0);
    if (sc.noise_sigma > 0.0) {
        std::mt19937_64 rng(sc.seed + 2);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (double& x : fx.delta.data())
            x += sc.noise_sigma * gauss(rng);
    }
    fx.truth.insert(sc.undesired_indices.begin(), sc.undesired_indices.end());
    return fx;
}

double SeparationRecord::undesired_kept_fraction() const {
    return undesired_energy_total > 0.0 ? undesired_energy_kept / undesired_energy_total : 1.0;
}

double SeparationRecord::general_kept_fraction() const {
    return general_energy_total > 0.0 ? general_energy_kept / general_energy_total : 0.0;
}

nlohmann::json SeparationRecord::to_json() const {
    return {{"xi_fraction", xi_fraction},
            {"xi_value", xi_value},
            {"margin_satisfied", margin_satisfied},
            {"kept_count", kept_count},
            {"truth_count", truth_count},
            {"precision", precision},
            {"recall", recall},
            {"undesired_energy_kept", undesired_energy_kept},
            {"undesired_energy_total", undesired_energy_total},
            {"undesired_kept_fraction", undesired_kept_fraction()},
            {"general_energy_kept", general_energy_kept},
            {"general_energy_total", general_energy_total},
            {"general_kept_fraction", general_kept_fraction()}};
}

SeparationRecord evaluate_separation(const PlantedScenario& sc, double xi_fraction) {
    const auto fx = build_scenario(sc);
    const auto basis = thin_svd(fx.base, "planted");
    const auto spectrum = project_delta(basis, fx.delta);
    const auto filtered = filter_spectrum(spectrum, xi_fraction);

    SeparationRecord rec;
    rec.xi_fraction = xi_fraction;
    rec.xi_value = xi_fraction * spectrum.max_abs;
    rec.margin_satisfied = sc.margin_satisfied(xi_fraction);
    rec.truth_count = fx.truth.size();

    const std::size_t r = basis.rank();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            if (filtered.coeffs(i, j) != 0.0) {
                ++rec.kept_count;
                hits += fx.truth.contains(Position{i, j});
            }
    if (rec.kept_count > 0)
        rec.precision = double(hits) / double(rec.kept_count);
    if (rec.truth_count > 0)
        rec.recall = double(hits) / double(rec.truth_count);

    rec.undesired_energy_total = energy_at(spectrum.coeffs, sc.undesired_indices);
    rec.undesired_energy_kept = energy_at(filtered.coeffs, sc.undesired_indices);
    rec.general_energy_total = energy_at(spectrum.coeffs, sc.general_indices);
    rec.general_energy_kept = energy_at(filtered.coeffs, sc.general_indices);
    return rec;
}

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "orthoedit/matrix.hpp"

namespace orthoedit {

/// (row, col) position in an r x r coefficient matrix.
struct Position {
    std::size_t row = 0;
    std::size_t col = 0;
    friend auto operator<=>(const Position&, const Position&) = default;
};

/// Synthetic layer whose delta is planted in the base's own singular basis:
/// small-amplitude "general" coefficients, large-amplitude "undesired" ones,
/// plus optional Gaussian noise.
struct PlantedScenario {
    std::size_t d = 0;
    std::size_t k = 0;
    std::uint64_t seed = 42;
    std::vector<Position> general_indices;
    std::vector<Position> undesired_indices;
    double amp_general = 0.01;
    double amp_undesired = 1.0;
    double noise_sigma = 0.0;
    /// Base singular values; empty means s_i = 1/(1+i). Must be positive and
    /// strictly decreasing so the recovered basis matches the planted one.
    std::vector<double> singular_values;

    std::size_t rank() const { return d < k ? d : k; }
    /// Throws UsageError on overlapping index sets, out-of-range positions,
    /// amplitudes outside 0 < general < undesired, or degenerate singular values.
    void validate() const;
    /// amp_undesired·xi_fraction > amp_general + 5·noise_sigma
    bool margin_satisfied(double xi_fraction) const;
};

/// Scenario with `n_undesired` and `n_general` distinct positions drawn from a
/// seeded shuffle of the r x r grid.
PlantedScenario make_scenario(std::size_t d, std::size_t k, std::uint64_t seed, std::size_t n_undesired,
                              std::size_t n_general, double amp_undesired, double amp_general, double noise_sigma);

struct PlantedFixture {
    Matrix base;  // U0·diag(s0)·V0ᵀ
    Matrix delta; // planted coefficients in the (U0, V0) basis + noise
    std::set<Position> truth;
    Matrix u0; // d x r
    Matrix v0; // k x r
    std::vector<double> s0;
};

PlantedFixture build_scenario(const PlantedScenario& scenario);

/// Seeded random matrix with orthonormal columns (Gaussian + Gram–Schmidt).
Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed);

struct SeparationRecord {
    double xi_fraction = 0.0;
    double xi_value = 0.0;
    bool margin_satisfied = false;
    std::size_t kept_count = 0;
    std::size_t truth_count = 0;
    double precision = 1.0; // 1 when nothing is kept
    double recall = 1.0;    // 1 when truth is empty
    double undesired_energy_kept = 0.0;
    double undesired_energy_total = 0.0;
    double general_energy_kept = 0.0;
    double general_energy_total = 0.0;

    double undesired_kept_fraction() const;
    double general_kept_fraction() const;
    nlohmann::json to_json() const;
};

/// thin_svd(base) → project(delta) → filter, then scores the kept positions
/// against the planted undesired set.
SeparationRecord evaluate_separation(const PlantedScenario& scenario, double xi_fraction);

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "orthoedit/recipe.hpp"
#include "orthoedit/task_vector.hpp"

namespace orthoedit {

struct EditOptions {
    EditMode mode = EditMode::Ethos;
    double lambda = 0.0;
    double xi_fraction = kDefaultXiFraction;
    std::vector<std::string> layer_patterns = default_layer_patterns();
    NonMatchingPolicy non_matching_policy = NonMatchingPolicy::NegatePlain;
    unsigned threads = 1;
};

struct LayerRecord {
    std::string layer_name;
    std::size_t r = 0;
    double xi_value = 0.0;
    std::size_t kept_count = 0;
    std::size_t total_count = 0;
    /// Σ kept² / Σ all² over the projected coefficients; 1 for an all-zero spectrum.
    double kept_energy_fraction = 1.0;
    double delta_norm_before = 0.0;
    double delta_norm_after = 0.0;
};

struct EditReport {
    EditMode mode = EditMode::Ethos;
    double lambda = 0.0;
    double xi_fraction = 0.0;
    std::vector<LayerRecord> layers;      // spectrally filtered, lexicographic
    std::vector<std::string> plain_layers; // negated without filtering
    std::vector<std::string> skipped_layers;
    std::vector<std::string> warnings;
    double elapsed_seconds = 0.0;

    /// Wall-clock timing is left out unless asked for, so that reports of
    /// identical runs are byte-identical.
    nlohmann::json to_json(bool include_timing = false) const;
};

struct EditResult {
    TensorMap output;
    EditReport report;
    /// The vector actually negated: filtered layers, plain layers, nothing for
    /// skipped ones.
    TaskVector applied_task;
};

/// base + aux, or base unchanged when aux is absent.
TensorMap align(const TensorMap& base, const TaskVector* aux);

/// True if `name` matches any of the shell-style glob patterns.
bool matches_any(const std::string& name, const std::vector<std::string>& patterns);

/// negation:  base − λ·task
/// ethos-uf:  (base + aux) − λ·task
/// ethos:     (base + aux) − λ·task~, where for each 2-D task layer matching
///            the patterns task~ = U·filter(Uᵀ·task·V)·Vᵀ with U, V from the
///            thin SVD of the aligned layer and ξ taken per layer; other task
///            layers follow the non-matching policy.
/// Throws DataError for non-finite inputs, unknown names or shape mismatches.
EditResult run_edit(const TensorMap& base, const TaskVector* aux, const TaskVector& task, const EditOptions& options);

/// Loads the recipe's inputs and runs the edit. Does not write the output.
EditResult run_edit(const EditRecipe& recipe, unsigned threads = 1);

} // namespace orthoedit

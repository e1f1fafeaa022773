// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "orthoedit/container.hpp"

namespace orthoedit {

enum class EditMode { Negation, EthosUf, Ethos };
enum class NonMatchingPolicy { NegatePlain, Skip };

std::string_view mode_name(EditMode mode);
std::string_view policy_name(NonMatchingPolicy policy);
std::string_view dtype_policy_name(DTypePolicy policy);

inline constexpr double kDefaultXiFraction = 0.03;

/// Attention query/value projection weights under the common naming schemes.
std::vector<std::string> default_layer_patterns();

/// Declarative description of one edit.
///
/// JSON form (snake_case keys, unknown keys rejected):
///   base_path, task_delta_path, output_path   strings, required
///   mode                                      "negation" | "ethos-uf" | "ethos", required
///   lambda                                    number >= 0, required
///   aux_delta_path                            string or null
///   xi_fraction                               number >= 0, default 0.03
///   layer_patterns                            array of glob strings
///   non_matching_policy                       "negate-plain" (default) | "skip"
///   dtype_policy                              "preserve" (default) | "force-float32"
/// Relative paths resolve against the recipe file's directory.
struct EditRecipe {
    std::filesystem::path base_path;
    std::optional<std::filesystem::path> aux_delta_path;
    std::filesystem::path task_delta_path;
    EditMode mode = EditMode::Ethos;
    double lambda = 0.0;
    double xi_fraction = kDefaultXiFraction;
    std::vector<std::string> layer_patterns = default_layer_patterns();
    NonMatchingPolicy non_matching_policy = NonMatchingPolicy::NegatePlain;
    DTypePolicy dtype_policy = DTypePolicy::Preserve;
    std::filesystem::path output_path;

    /// Throws UsageError naming the offending key or value.
    static EditRecipe from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    static EditRecipe load(const std::filesystem::path& path);

    /// Throws UsageError on an invalid lambda or xi_fraction.
    void validate() const;
};

} // namespace orthoedit

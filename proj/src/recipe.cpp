// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/recipe.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "orthoedit/error.hpp"

namespace orthoedit {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {"base_path",      "aux_delta_path", "task_delta_path",
                                          "mode",           "lambda",         "xi_fraction",
                                          "layer_patterns", "non_matching_policy", "dtype_policy",
                                          "output_path"};

std::string require_string(const json& doc, const std::string& key) {
    if (!doc.contains(key))
        throw UsageError(fmt::format("recipe is missing required key '{}'", key));
    if (!doc[key].is_string())
        throw UsageError(fmt::format("recipe key '{}' must be a string", key));
    return doc[key].get<std::string>();
}

double require_number(const json& doc, const std::string& key) {
    if (!doc[key].is_number())
        throw UsageError(fmt::format("recipe key '{}' must be a number", key));
    return doc[key].get<double>();
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
}

} // namespace

std::string_view mode_name(EditMode mode) {
    switch (mode) {
    case EditMode::Negation: return "negation";
    case EditMode::EthosUf: return "ethos-uf";
    case EditMode::Ethos: return "ethos";
    }
    return "?";
}

std::string_view policy_name(NonMatchingPolicy policy) {
    return policy == NonMatchingPolicy::Skip ? "skip" : "negate-plain";
}

std::string_view dtype_policy_name(DTypePolicy policy) {
    return policy == DTypePolicy::ForceFloat32 ? "force-float32" : "preserve";
}

std::vector<std::string> default_layer_patterns() {
    return {"*q_proj.weight", "*v_proj.weight", "*query.weight", "*value.weight"};
}

EditRecipe EditRecipe::from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object())
        throw UsageError("recipe must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!kKnownKeys.contains(key))
            throw UsageError(fmt::format("unknown recipe key '{}'", key));

    EditRecipe recipe;
    recipe.base_path = resolve(base_dir, require_string(doc, "base_path"));
    recipe.task_delta_path = resolve(base_dir, require_string(doc, "task_delta_path"));
    recipe.output_path = resolve(base_dir, require_string(doc, "output_path"));

    if (doc.contains("aux_delta_path") && !doc["aux_delta_path"].is_null())
        recipe.aux_delta_path = resolve(base_dir, require_string(doc, "aux_delta_path"));

    const auto mode = require_string(doc, "mode");
    if (mode == "negation")
        recipe.mode = EditMode::Negation;
    else if (mode == "ethos-uf")
        recipe.mode = EditMode::EthosUf;
    else if (mode == "ethos")
        recipe.mode = EditMode::Ethos;
    else
        throw UsageError(fmt::format("recipe key 'mode': unknown mode '{}'", mode));

    if (!doc.contains("lambda"))
        throw UsageError("recipe is missing required key 'lambda'");
    recipe.lambda = require_number(doc, "lambda");
    if (doc.contains("xi_fraction"))
        recipe.xi_fraction = require_number(doc, "xi_fraction");

    if (doc.contains("layer_patterns")) {
        const auto& patterns = doc["layer_patterns"];
        if (!patterns.is_array())
            throw UsageError("recipe key 'layer_patterns' must be an array of strings");
        recipe.layer_patterns.clear();
        for (const auto& p : patterns) {
            if (!p.is_string())
                throw UsageError("recipe key 'layer_patterns' must be an array of strings");
            recipe.layer_patterns.push_back(p.get<std::string>());
        }
    }

    if (doc.contains("non_matching_policy")) {
        const auto policy = require_string(doc, "non_matching_policy");
        if (policy == "negate-plain")
            recipe.non_matching_policy = NonMatchingPolicy::NegatePlain;
        else if (policy == "skip")
            recipe.non_matching_policy = NonMatchingPolicy::Skip;
        else
            throw UsageError(fmt::format("recipe key 'non_matching_policy': unknown value '{}'", policy));
    }

    if (doc.contains("dtype_policy")) {
        const auto policy = require_string(doc, "dtype_policy");
        if (policy == "preserve")
            recipe.dtype_policy = DTypePolicy::Preserve;
        else if (policy == "force-float32")
            recipe.dtype_policy = DTypePolicy::ForceFloat32;
        else
            throw UsageError(fmt::format("recipe key 'dtype_policy': unknown value '{}'", policy));
    }

    recipe.validate();
    return recipe;
}

EditRecipe EditRecipe::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError(fmt::format("cannot open recipe '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(fmt::format("recipe '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    return from_json(doc, path.parent_path());
}

void EditRecipe::validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw UsageError(fmt::format("lambda must be finite and >= 0, got {}", lambda));
    if (!std::isfinite(xi_fraction) || xi_fraction < 0.0)
        throw UsageError(fmt::format("xi_fraction must be finite and >= 0, got {}", xi_fraction));
}

} // namespace orthoedit

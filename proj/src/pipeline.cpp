// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include <fnmatch.h>

#include <fmt/format.h>

#include "orthoedit/error.hpp"
#include "orthoedit/parallel.hpp"
#include "orthoedit/projection.hpp"
#include "orthoedit/svd.hpp"

namespace orthoedit {

namespace {

void validate_against(const TensorMap& base, const TaskVector& vec, std::string_view what) {
    for (const auto& [name, tensor] : vec.delta) {
        const auto* b = base.find(name);
        if (b == nullptr)
            throw DataError(fmt::format("{} tensor '{}' is not in the base checkpoint", what, name));
        if (b->shape() != tensor.shape())
            throw DataError(fmt::format("{} tensor '{}' has shape {}, base has {}", what, name,
                                        shape_string(tensor.shape()), shape_string(b->shape())));
    }
}

struct FilteredLayer {
    LayerRecord record;
    DenseTensor delta;
};

FilteredLayer filter_layer(const std::string& name, const DenseTensor& aligned, const DenseTensor& task,
                           double xi_fraction) {
    const auto basis = thin_svd(aligned, name);
    const auto spectrum = project_delta(basis, Matrix::from_tensor(task));
    const auto filtered = filter_spectrum(spectrum, xi_fraction);
    const auto rebuilt = reconstruct_delta(basis, filtered);

    LayerRecord rec;
    rec.layer_name = name;
    rec.r = basis.rank();
    rec.xi_value = xi_fraction * spectrum.max_abs;
    rec.total_count = rec.r * rec.r;
    double total = 0.0, kept = 0.0;
    for (std::size_t i = 0; i < spectrum.coeffs.data().size(); ++i) {
        const double c = spectrum.coeffs.data()[i];
        total += c * c;
        if (std::fabs(c) >= rec.xi_value)
            ++rec.kept_count;
        const double f = filtered.coeffs.data()[i];
        kept += f * f;
    }
    rec.kept_energy_fraction = total > 0.0 ? kept / total : 1.0;
    rec.delta_norm_before = frobenius_norm(task.values());
    rec.delta_norm_after = frobenius_norm(rebuilt);
    return {std::move(rec), rebuilt.to_tensor(task.dtype())};
}

} // namespace

nlohmann::json EditReport::to_json(bool include_timing) const {
    nlohmann::json layer_list = nlohmann::json::array();
    for (const auto& rec : layers)
        layer_list.push_back({{"layer_name", rec.layer_name},
                              {"r", rec.r},
                              {"xi_value", rec.xi_value},
                              {"kept_count", rec.kept_count},
                              {"total_count", rec.total_count},
                              {"kept_energy_fraction", rec.kept_energy_fraction},
                              {"delta_norm_before", rec.delta_norm_before},
                              {"delta_norm_after", rec.delta_norm_after}});
    nlohmann::json doc = {{"mode", mode_name(mode)},
                          {"lambda", lambda},
                          {"xi_fraction", xi_fraction},
                          {"layers", std::move(layer_list)},
                          {"plain_layers", plain_layers},
                          {"skipped_layers", skipped_layers},
                          {"warnings", warnings}};
    if (include_timing)
        doc["timing"] = {{"elapsed_seconds", elapsed_seconds}};
    return doc;
}

TensorMap align(const TensorMap& base, const TaskVector* aux) {
    if (aux == nullptr)
        return base;
    return apply(base, *aux, 1.0);
}

bool matches_any(const std::string& name, const std::vector<std::string>& patterns) {
    for (const auto& pattern : patterns)
        if (::fnmatch(pattern.c_str(), name.c_str(), 0) == 0)
            return true;
    return false;
}

EditResult run_edit(const TensorMap& base, const TaskVector* aux, const TaskVector& task, const EditOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    if (!std::isfinite(options.lambda) || options.lambda < 0.0)
        throw UsageError(fmt::format("lambda must be finite and >= 0, got {}", options.lambda));
    if (!std::isfinite(options.xi_fraction) || options.xi_fraction < 0.0)
        throw UsageError(fmt::format("xi_fraction must be finite and >= 0, got {}", options.xi_fraction));

    base.require_finite("base checkpoint");
    task.delta.require_finite("task vector");
    validate_against(base, task, "task vector");
    if (aux != nullptr) {
        aux->delta.require_finite("auxiliary vector");
        validate_against(base, *aux, "auxiliary vector");
    }

    EditResult result;
    auto& report = result.report;
    report.mode = options.mode;
    report.lambda = options.lambda;
    report.xi_fraction = options.xi_fraction;
    const double scale = -options.lambda;

    if (options.mode == EditMode::Negation) {
        if (aux != nullptr)
            report.warnings.push_back("negation mode ignores the auxiliary vector");
        report.plain_layers = task.delta.names();
        result.applied_task = task;
        result.output = apply(base, task, scale);
    } else if (options.mode == EditMode::EthosUf) {
        report.plain_layers = task.delta.names();
        result.applied_task = task;
        result.output = apply(align(base, aux), task, scale);
    } else {
        if (options.xi_fraction == 0.0)
            report.warnings.push_back("xi_fraction is 0: ethos keeps every component and matches ethos-uf");
        const TensorMap aligned = align(base, aux);

        std::vector<std::string> spectral;
        for (const auto& [name, tensor] : task.delta) {
            if (tensor.is_matrix() && matches_any(name, options.layer_patterns))
                spectral.push_back(name);
            else if (options.non_matching_policy == NonMatchingPolicy::NegatePlain)
                report.plain_layers.push_back(name);
            else
                report.skipped_layers.push_back(name);
        }
        if (spectral.empty())
            report.warnings.push_back("no task-vector tensor matches the layer patterns");

        std::vector<std::optional<FilteredLayer>> slots(spectral.size());
        parallel_for(spectral.size(), options.threads, [&](std::size_t i) {
            const auto& name = spectral[i];
            slots[i] = filter_layer(name, aligned.at(name), task.delta.at(name), options.xi_fraction);
        });

        auto& applied = result.applied_task;
        applied.provenance = {task.provenance.base_id, task.provenance.finetuned_id, "ethos-filter"};
        for (auto& slot : slots) {
            applied.delta.insert(slot->record.layer_name, std::move(slot->delta));
            report.layers.push_back(std::move(slot->record));
        }
        for (const auto& name : report.plain_layers)
            applied.delta.insert(name, task.delta.at(name));
        result.output = apply(aligned, applied, scale);
    }

    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

EditResult run_edit(const EditRecipe& recipe, unsigned threads) {
    recipe.validate();
    const TensorMap base = read_container(recipe.base_path);
    const TaskVector task = read_task_vector(recipe.task_delta_path);
    std::optional<TaskVector> aux;
    if (recipe.aux_delta_path)
        aux = read_task_vector(*recipe.aux_delta_path);

    EditOptions options;
    options.mode = recipe.mode;
    options.lambda = recipe.lambda;
    options.xi_fraction = recipe.xi_fraction;
    options.layer_patterns = recipe.layer_patterns;
    options.non_matching_policy = recipe.non_matching_policy;
    options.threads = threads;
    return run_edit(base, aux ? &*aux : nullptr, task, options);
}

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "orthoedit/container.hpp"
#include "orthoedit/tensor.hpp"

namespace orthoedit {

struct Provenance {
    std::string base_id;
    std::string finetuned_id; // "lora-merge" for merged adapters
    std::string created_by;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// A weight difference Δθ over some subset of a checkpoint's tensors.
struct TaskVector {
    TensorMap delta;
    Provenance provenance;

    /// Delta tensors with provenance folded into the container metadata
    /// ("base_id", "finetuned_id", "created_by").
    TensorMap to_container() const;
    static TaskVector from_container(TensorMap map);
};

TaskVector read_task_vector(const std::filesystem::path& path);
void write_task_vector(const TaskVector& vec, const std::filesystem::path& path,
                       DTypePolicy policy = DTypePolicy::Preserve);

/// finetuned − base, name by name, in float64. Result tensors are stored as
/// F64, which holds the difference of any two narrower values exactly, so
/// apply(base, diff(ft, base), 1) rebuilds ft bit for bit. Throws DataError listing the symmetric difference
/// of the name sets, or naming the first shape mismatch.
TaskVector diff(const TensorMap& finetuned, const TensorMap& base);

/// base + scale·delta for the tensors the vector covers; everything else is
/// copied through unchanged. Negation is apply(base, vec, -lambda).
TensorMap apply(const TensorMap& base, const TaskVector& vec, double scale);

/// Σ scale_i·vec_i with union semantics (absent names count as zero). Each
/// term is scaled before it is added, and terms are added in list order, so
/// reordering the list can change results at the rounding level.
TaskVector combine(const std::vector<std::pair<const TaskVector*, double>>& terms);

} // namespace orthoedit

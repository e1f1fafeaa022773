// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orthoedit/task_vector.hpp"

namespace orthoedit {

/// Low-rank factors for one weight: ΔW = B·A with A r x k and B d x r.
struct LoraPair {
    DenseTensor a;
    DenseTensor b;
};

/// LoRA adapter set keyed by the base tensor each pair updates
/// (e.g. "decoder.layers.0.self_attn.q_proj.weight").
class LoraAdapter {
public:
    static constexpr double kDefaultAlpha = 16.0;

    /// Throws DataError unless every pair is 2-D with B.cols == A.rows == rank
    /// and the rank is shared across the adapter.
    LoraAdapter(std::map<std::string, LoraPair> pairs, double alpha);

    const std::map<std::string, LoraPair>& pairs() const { return pairs_; }
    std::size_t rank() const { return rank_; }
    double alpha() const { return alpha_; }

private:
    std::map<std::string, LoraPair> pairs_;
    std::size_t rank_ = 0;
    double alpha_ = kDefaultAlpha;
};

enum class LoraScaleMode { AlphaOverRank, Unit };

double lora_scale(const LoraAdapter& adapter, LoraScaleMode mode);

/// Container convention (PEFT-style): "<stem>.lora_A.weight" and
/// "<stem>.lora_B.weight" update base tensor "<stem>.weight". The alpha is
/// taken from `alpha` if given, else from the "lora_alpha" metadata entry,
/// else kDefaultAlpha.
LoraAdapter lora_from_container(const TensorMap& map, std::optional<double> alpha = std::nullopt);
TensorMap lora_to_container(const LoraAdapter& adapter);

/// Per layer: c·B·A with c = alpha/rank or 1. provenance.finetuned_id is
/// "lora-merge".
TaskVector merge_lora(const LoraAdapter& adapter, LoraScaleMode mode = LoraScaleMode::AlphaOverRank);

struct LoraForwardLayer {
    std::string name;
    double max_relative_deviation = 0.0;
};

struct LoraForwardReport {
    static constexpr double kTolerance = 1e-6;

    std::vector<LoraForwardLayer> layers;
    double max_relative_deviation = 0.0;
    bool passed() const { return max_relative_deviation <= kTolerance; }
};

/// Checks (W0 + ΔW)·x against W0·x + c·B·(A·x) on `probe_count` seeded
/// Gaussian inputs per layer. Deviation is ‖lhs − rhs‖₂ / ‖rhs‖₂ (absolute
/// when rhs is exactly zero). Throws DataError for layers missing from the
/// base or whose shape disagrees with the adapter.
LoraForwardReport verify_lora_forward(const LoraAdapter& adapter, const TensorMap& base, int probe_count,
                                      std::uint64_t seed = 42,
                                      LoraScaleMode mode = LoraScaleMode::AlphaOverRank);

} // namespace orthoedit

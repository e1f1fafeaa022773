// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/lora.hpp"

#include <cmath>
#include <random>
#include <string_view>

#include <fmt/format.h>

#include "orthoedit/error.hpp"
#include "orthoedit/matrix.hpp"

namespace orthoedit {

namespace {

constexpr std::string_view kSuffixA = ".lora_A.weight";
constexpr std::string_view kSuffixB = ".lora_B.weight";
constexpr std::string_view kWeight = ".weight";
constexpr const char* kAlphaKey = "lora_alpha";

std::string_view stem_of(std::string_view name) {
    return name.ends_with(kWeight) ? name.substr(0, name.size() - kWeight.size()) : name;
}

double norm2(const std::vector<double>& v) { return frobenius_norm(std::span<const double>(v)); }

std::vector<double> matvec(const DenseTensor& m, const std::vector<double>& x) {
    std::vector<double> y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j)
            s += m.at(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

} // namespace

LoraAdapter::LoraAdapter(std::map<std::string, LoraPair> pairs, double alpha) : pairs_(std::move(pairs)), alpha_(alpha) {
    if (!std::isfinite(alpha_))
        throw DataError("LoRA alpha must be finite");
    for (const auto& [name, pair] : pairs_) {
        if (!pair.a.is_matrix() || !pair.b.is_matrix())
            throw DataError(fmt::format("LoRA layer '{}': A and B must be 2-D, got {} and {}", name,
                                        shape_string(pair.a.shape()), shape_string(pair.b.shape())));
        if (pair.b.cols() != pair.a.rows())
            throw DataError(fmt::format("LoRA layer '{}': inner dimension mismatch, B is {} and A is {}", name,
                                        shape_string(pair.b.shape()), shape_string(pair.a.shape())));
        if (rank_ == 0)
            rank_ = pair.a.rows();
        else if (pair.a.rows() != rank_)
            throw DataError(fmt::format("LoRA layer '{}' has rank {}, adapter rank is {}", name, pair.a.rows(), rank_));
    }
    if (pairs_.empty())
        rank_ = 1;
}

double lora_scale(const LoraAdapter& adapter, LoraScaleMode mode) {
    return mode == LoraScaleMode::Unit ? 1.0 : adapter.alpha() / static_cast<double>(adapter.rank());
}

LoraAdapter lora_from_container(const TensorMap& map, std::optional<double> alpha) {
    std::map<std::string, LoraPair> pairs;
    std::map<std::string, int> seen; // bit 1 = A, bit 2 = B
    for (const auto& [name, tensor] : map) {
        const std::string_view n = name;
        std::string target;
        if (n.ends_with(kSuffixA) && n.size() > kSuffixA.size()) {
            target = std::string(n.substr(0, n.size() - kSuffixA.size())) + std::string(kWeight);
            pairs[target].a = tensor;
            seen[target] |= 1;
        } else if (n.ends_with(kSuffixB) && n.size() > kSuffixB.size()) {
            target = std::string(n.substr(0, n.size() - kSuffixB.size())) + std::string(kWeight);
            pairs[target].b = tensor;
            seen[target] |= 2;
        } else {
            throw DataError(fmt::format("adapter tensor '{}' is neither a lora_A nor a lora_B weight", name));
        }
    }
    for (const auto& [target, mask] : seen)
        if (mask != 3)
            throw DataError(fmt::format("LoRA layer '{}' is missing its {} factor", target, mask == 1 ? "B" : "A"));

    double resolved = LoraAdapter::kDefaultAlpha;
    if (alpha) {
        resolved = *alpha;
    } else if (auto it = map.metadata().find(kAlphaKey); it != map.metadata().end()) {
        try {
            resolved = std::stod(it->second);
        } catch (const std::exception&) {
            throw DataError(fmt::format("adapter metadata lora_alpha '{}' is not a number", it->second));
        }
    }
    return LoraAdapter(std::move(pairs), resolved);
}

TensorMap lora_to_container(const LoraAdapter& adapter) {
    TensorMap map;
    for (const auto& [target, pair] : adapter.pairs()) {
        const auto stem = std::string(stem_of(target));
        map.insert(stem + std::string(kSuffixA), pair.a);
        map.insert(stem + std::string(kSuffixB), pair.b);
    }
    map.metadata()[kAlphaKey] = fmt::format("{}", adapter.alpha());
    return map;
}

TaskVector merge_lora(const LoraAdapter& adapter, LoraScaleMode mode) {
    const double c = lora_scale(adapter, mode);
    TaskVector vec;
    vec.provenance = {"", "lora-merge", "merge_lora"};
    for (const auto& [name, pair] : adapter.pairs()) {
        Matrix ba = matmul(Matrix::from_tensor(pair.b), Matrix::from_tensor(pair.a));
        for (double& x : ba.data())
            x *= c;
        vec.delta.insert(name, ba.to_tensor(pair.a.dtype()));
    }
    return vec;
}

LoraForwardReport verify_lora_forward(const LoraAdapter& adapter, const TensorMap& base, int probe_count,
                                      std::uint64_t seed, LoraScaleMode mode) {
    if (probe_count < 1)
        throw UsageError(fmt::format("probe count must be >= 1, got {}", probe_count));
    const double c = lora_scale(adapter, mode);
    const TaskVector merged = merge_lora(adapter, mode);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    LoraForwardReport report;
    for (const auto& [name, pair] : adapter.pairs()) {
        const auto* w0 = base.find(name);
        if (w0 == nullptr)
            throw DataError(fmt::format("LoRA layer '{}' is not in the base checkpoint", name));
        if (!w0->is_matrix() || w0->rows() != pair.b.rows() || w0->cols() != pair.a.cols())
            throw DataError(fmt::format("LoRA layer '{}': base shape {} does not match B {} x A {}", name,
                                        shape_string(w0->shape()), shape_string(pair.b.shape()),
                                        shape_string(pair.a.shape())));
        const auto& delta = merged.delta.at(name);
        std::vector<double> merged_w(w0->numel());
        for (std::size_t i = 0; i < merged_w.size(); ++i)
            merged_w[i] = w0->values()[i] + delta.values()[i];
        const DenseTensor merged_tensor(w0->shape(), DType::F64, std::move(merged_w));

        LoraForwardLayer layer{name, 0.0};
        std::vector<double> x(w0->cols());
        for (int p = 0; p < probe_count; ++p) {
            for (auto& xi : x)
                xi = gauss(rng);
            const auto lhs = matvec(merged_tensor, x);
            auto rhs = matvec(*w0, x);
            const auto bax = matvec(pair.b, matvec(pair.a, x));
            for (std::size_t i = 0; i < rhs.size(); ++i)
                rhs[i] += c * bax[i];
            std::vector<double> gap(rhs.size());
            for (std::size_t i = 0; i < rhs.size(); ++i)
                gap[i] = lhs[i] - rhs[i];
            const double num = norm2(gap);
            const double den = norm2(rhs);
            const double dev = den > 0.0 ? num / den : num;
            layer.max_relative_deviation = std::max(layer.max_relative_deviation, dev);
        }
        report.max_relative_deviation = std::max(report.max_relative_deviation, layer.max_relative_deviation);
        report.layers.push_back(std::move(layer));
    }
    return report;
}

} // namespace orthoedit

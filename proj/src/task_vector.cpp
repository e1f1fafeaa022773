// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/task_vector.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "orthoedit/error.hpp"

namespace orthoedit {

namespace {

constexpr const char* kBaseId = "base_id";
constexpr const char* kFinetunedId = "finetuned_id";
constexpr const char* kCreatedBy = "created_by";

void require_same_shape(const std::string& name, const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape())
        throw DataError(fmt::format("shape mismatch for tensor '{}': {} vs {}", name, shape_string(a.shape()),
                                    shape_string(b.shape())));
}

std::string take(TensorMap::Metadata& meta, const char* key) {
    auto it = meta.find(key);
    if (it == meta.end())
        return {};
    auto value = std::move(it->second);
    meta.erase(it);
    return value;
}

} // namespace

TensorMap TaskVector::to_container() const {
    TensorMap map = delta;
    map.metadata()[kBaseId] = provenance.base_id;
    map.metadata()[kFinetunedId] = provenance.finetuned_id;
    map.metadata()[kCreatedBy] = provenance.created_by;
    return map;
}

TaskVector TaskVector::from_container(TensorMap map) {
    TaskVector vec;
    vec.provenance.base_id = take(map.metadata(), kBaseId);
    vec.provenance.finetuned_id = take(map.metadata(), kFinetunedId);
    vec.provenance.created_by = take(map.metadata(), kCreatedBy);
    vec.delta = std::move(map);
    return vec;
}

TaskVector read_task_vector(const std::filesystem::path& path) {
    return TaskVector::from_container(read_container(path));
}

void write_task_vector(const TaskVector& vec, const std::filesystem::path& path, DTypePolicy policy) {
    write_container(vec.to_container(), path, policy);
}

TaskVector diff(const TensorMap& finetuned, const TensorMap& base) {
    const auto ft_names = finetuned.names();
    const auto base_names = base.names();
    if (ft_names != base_names) {
        std::vector<std::string> only_ft, only_base;
        std::ranges::set_difference(ft_names, base_names, std::back_inserter(only_ft));
        std::ranges::set_difference(base_names, ft_names, std::back_inserter(only_base));
        throw DataError(fmt::format("tensor name sets differ: only in finetuned [{}], only in base [{}]",
                                    fmt::join(only_ft, ", "), fmt::join(only_base, ", ")));
    }

    TaskVector vec;
    vec.provenance.created_by = "diff";
    for (const auto& [name, b] : base) {
        const auto& f = finetuned.at(name);
        require_same_shape(name, f, b);
        std::vector<double> out(b.numel());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = f.values()[i] - b.values()[i];
        vec.delta.insert(name, DenseTensor(b.shape(), DType::F64, std::move(out)));
    }
    return vec;
}

TensorMap apply(const TensorMap& base, const TaskVector& vec, double scale) {
    for (const auto& [name, d] : vec.delta) {
        const auto* b = base.find(name);
        if (b == nullptr)
            throw DataError(fmt::format("task vector tensor '{}' is not in the base checkpoint", name));
        require_same_shape(name, *b, d);
    }

    TensorMap out;
    out.metadata() = base.metadata();
    for (const auto& [name, b] : base) {
        const auto* d = vec.delta.find(name);
        if (d == nullptr) {
            out.insert(name, b);
            continue;
        }
        std::vector<double> values(b.numel());
        for (std::size_t i = 0; i < values.size(); ++i)
            values[i] = b.values()[i] + scale * d->values()[i];
        out.insert(name, DenseTensor(b.shape(), b.dtype(), std::move(values)));
    }
    return out;
}

TaskVector combine(const std::vector<std::pair<const TaskVector*, double>>& terms) {
    std::map<std::string, std::vector<double>> sums;
    std::map<std::string, std::pair<Shape, DType>> layout;
    for (const auto& [vec, scale] : terms) {
        for (const auto& [name, tensor] : vec->delta) {
            auto [it, fresh] = layout.try_emplace(name, tensor.shape(), tensor.dtype());
            if (!fresh && it->second.first != tensor.shape())
                throw DataError(fmt::format("shape conflict for tensor '{}' in combine: {} vs {}", name,
                                            shape_string(it->second.first), shape_string(tensor.shape())));
            auto& acc = sums[name];
            if (fresh) {
                acc.resize(tensor.numel());
                for (std::size_t i = 0; i < acc.size(); ++i)
                    acc[i] = scale * tensor.values()[i];
            } else {
                for (std::size_t i = 0; i < acc.size(); ++i)
                    acc[i] += scale * tensor.values()[i];
            }
        }
    }

    TaskVector out;
    out.provenance.created_by = "combine";
    for (auto& [name, values] : sums) {
        auto& [shape, dtype] = layout.at(name);
        out.delta.insert(name, DenseTensor(shape, dtype, std::move(values)));
    }
    return out;
}

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/tensor.hpp"

#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "orthoedit/error.hpp"

namespace orthoedit {

std::string shape_string(const Shape& shape) { return fmt::format("[{}]", fmt::join(shape, ", ")); }

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto dim : shape)
        n *= dim;
    return n;
}

DenseTensor::DenseTensor(Shape shape, DType dtype, std::vector<double> values)
    : shape_(std::move(shape)), dtype_(dtype), values_(std::move(values)) {
    for (auto dim : shape_)
        if (dim == 0)
            throw DataError(fmt::format("tensor shape {} has a zero dimension", shape_string(shape_)));
    if (shape_numel(shape_) != values_.size())
        throw DataError(fmt::format("tensor shape {} needs {} elements, got {}", shape_string(shape_),
                                    shape_numel(shape_), values_.size()));
}

DenseTensor DenseTensor::zeros(Shape shape, DType dtype) {
    const auto n = shape_numel(shape);
    return DenseTensor(std::move(shape), dtype, std::vector<double>(n, 0.0));
}

std::optional<std::size_t> DenseTensor::first_non_finite() const {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            return i;
    return std::nullopt;
}

bool bit_identical(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape() || a.dtype() != b.dtype())
        return false;
    return std::memcmp(a.values().data(), b.values().data(), a.numel() * sizeof(double)) == 0;
}

void TensorMap::insert(std::string name, DenseTensor tensor) {
    if (name.empty())
        throw DataError("tensor name must be non-empty");
    if (entries_.contains(name))
        throw DataError(fmt::format("duplicate tensor name '{}'", name));
    entries_.emplace(std::move(name), std::move(tensor));
}

void TensorMap::assign(const std::string& name, DenseTensor tensor) {
    if (name.empty())
        throw DataError("tensor name must be non-empty");
    entries_.insert_or_assign(name, std::move(tensor));
}

const DenseTensor& TensorMap::at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw DataError(fmt::format("tensor '{}' not found", name));
    return it->second;
}

const DenseTensor* TensorMap::find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> TensorMap::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, _] : entries_)
        out.push_back(name);
    return out;
}

void TensorMap::require_finite(std::string_view what) const {
    for (const auto& [name, tensor] : entries_) {
        if (auto idx = tensor.first_non_finite())
            throw DataError(fmt::format("{}: tensor '{}' has a non-finite value at element {}", what, name, *idx));
    }
}

bool bit_identical(const TensorMap& a, const TensorMap& b) {
    if (a.size() != b.size() || a.metadata() != b.metadata())
        return false;
    auto ib = b.begin();
    for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib)
        if (ia->first != ib->first || !bit_identical(ia->second, ib->second))
            return false;
    return true;
}

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orthoedit/dtype.hpp"

namespace orthoedit {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major tensor. Values are held in float64 whatever the storage
/// dtype; `dtype()` records the format the tensor is written back in.
class DenseTensor {
public:
    DenseTensor() = default;
    /// Throws DataError if a dimension is zero or the value count does not
    /// match the shape.
    DenseTensor(Shape shape, DType dtype, std::vector<double> values);

    static DenseTensor zeros(Shape shape, DType dtype = DType::F64);

    const Shape& shape() const { return shape_; }
    DType dtype() const { return dtype_; }
    std::span<const double> values() const { return values_; }
    std::size_t numel() const { return values_.size(); }
    std::size_t ndim() const { return shape_.size(); }

    bool is_matrix() const { return shape_.size() == 2; }
    std::size_t rows() const { return shape_.at(0); }
    std::size_t cols() const { return shape_.at(1); }
    double at(std::size_t i, std::size_t j) const { return values_[i * shape_[1] + j]; }

    /// Index of the first NaN/Inf element, if any.
    std::optional<std::size_t> first_non_finite() const;

    DenseTensor with_dtype(DType dtype) const { return DenseTensor(shape_, dtype, values_); }

private:
    Shape shape_;
    DType dtype_ = DType::F64;
    std::vector<double> values_;
};

/// Same shape, dtype and element bit patterns.
bool bit_identical(const DenseTensor& a, const DenseTensor& b);

/// Named tensor collection: a checkpoint, a delta, or an adapter set.
/// Iteration is lexicographic by name.
class TensorMap {
public:
    using Entries = std::map<std::string, DenseTensor>;
    using Metadata = std::map<std::string, std::string>;

    TensorMap() = default;

    /// Throws DataError on an empty or duplicate name.
    void insert(std::string name, DenseTensor tensor);
    /// Inserts or overwrites.
    void assign(const std::string& name, DenseTensor tensor);

    bool contains(const std::string& name) const { return entries_.contains(name); }
    /// Throws DataError naming the tensor when absent.
    const DenseTensor& at(const std::string& name) const;
    const DenseTensor* find(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::vector<std::string> names() const;

    Entries::const_iterator begin() const { return entries_.begin(); }
    Entries::const_iterator end() const { return entries_.end(); }

    const Metadata& metadata() const { return metadata_; }
    Metadata& metadata() { return metadata_; }

    /// Throws DataError naming the first tensor holding NaN/Inf.
    void require_finite(std::string_view what) const;

private:
    Entries entries_;
    Metadata metadata_;
};

bool bit_identical(const TensorMap& a, const TensorMap& b);

} // namespace orthoedit

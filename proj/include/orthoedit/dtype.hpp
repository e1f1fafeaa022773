// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace orthoedit {

enum class DType : std::uint8_t { F16, BF16, F32, F64 };

/// Canonical container dtype string ("F16", "BF16", "F32", "F64").
std::string_view dtype_name(DType dtype);
std::optional<DType> parse_dtype(std::string_view name);
std::size_t dtype_size(DType dtype);

// Conversions between storage formats and the float64 compute type. Every
// half-precision value is exactly representable in float64, so decoding is
// lossless; encoding rounds to nearest, ties to even, directly from float64
// (no intermediate float32 step, which would double-round).
double half_to_double(std::uint16_t bits);
double bfloat16_to_double(std::uint16_t bits);
std::uint16_t double_to_half(double value);
std::uint16_t double_to_bfloat16(double value);

} // namespace orthoedit

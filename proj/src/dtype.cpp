// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/dtype.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace orthoedit {

namespace {

// Binary interchange format with `precision` significand bits (implicit bit
// included) and an IEEE-style biased exponent.
struct BinaryFormat {
    int precision;
    int exponent_bits;
    int bias() const { return (1 << (exponent_bits - 1)) - 1; }
};

constexpr BinaryFormat kHalf{11, 5};
constexpr BinaryFormat kBFloat16{8, 8};

std::uint16_t encode(double value, BinaryFormat fmt) {
    const int mantissa_bits = fmt.precision - 1;
    const std::uint16_t sign = std::signbit(value) ? std::uint16_t(1u << 15) : std::uint16_t(0);
    const std::uint16_t exp_all_ones = std::uint16_t(((1u << fmt.exponent_bits) - 1) << mantissa_bits);
    if (std::isnan(value))
        return std::uint16_t(sign | exp_all_ones | (1u << (mantissa_bits - 1)));
    const double magnitude = std::fabs(value);
    if (std::isinf(magnitude))
        return std::uint16_t(sign | exp_all_ones);
    if (magnitude == 0.0)
        return sign;

    const int min_exponent = 1 - fmt.bias();
    int exponent = std::max(std::ilogb(magnitude), min_exponent);
    // Scaling by a power of two is exact; nearbyint rounds half to even in the
    // default floating-point environment.
    double significand = std::nearbyint(std::ldexp(magnitude, mantissa_bits - exponent));
    const double carry = std::ldexp(1.0, fmt.precision);
    if (significand >= carry) {
        significand /= 2.0;
        ++exponent;
    }
    if (exponent > fmt.bias())
        return std::uint16_t(sign | exp_all_ones);

    const auto q = static_cast<std::uint32_t>(significand);
    const std::uint32_t implicit = 1u << mantissa_bits;
    if (q < implicit)
        return std::uint16_t(sign | q); // subnormal
    const auto biased = static_cast<std::uint32_t>(exponent + fmt.bias());
    return std::uint16_t(sign | (biased << mantissa_bits) | (q - implicit));
}

double decode(std::uint16_t bits, BinaryFormat fmt) {
    const int mantissa_bits = fmt.precision - 1;
    const bool negative = (bits >> 15) & 1u;
    const std::uint32_t exp_field = (bits >> mantissa_bits) & ((1u << fmt.exponent_bits) - 1);
    const std::uint32_t mantissa = bits & ((1u << mantissa_bits) - 1);
    double magnitude;
    if (exp_field == (1u << fmt.exponent_bits) - 1) {
        magnitude = mantissa == 0 ? std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::quiet_NaN();
    } else if (exp_field == 0) {
        magnitude = std::ldexp(double(mantissa), 1 - fmt.bias() - mantissa_bits);
    } else {
        magnitude = std::ldexp(double(mantissa | (1u << mantissa_bits)),
                               int(exp_field) - fmt.bias() - mantissa_bits);
    }
    return negative ? -magnitude : magnitude;
}

} // namespace

std::string_view dtype_name(DType dtype) {
    switch (dtype) {
    case DType::F16: return "F16";
    case DType::BF16: return "BF16";
    case DType::F32: return "F32";
    case DType::F64: return "F64";
    }
    return "?";
}

std::optional<DType> parse_dtype(std::string_view name) {
    if (name == "F16") return DType::F16;
    if (name == "BF16") return DType::BF16;
    if (name == "F32") return DType::F32;
    if (name == "F64") return DType::F64;
    return std::nullopt;
}

std::size_t dtype_size(DType dtype) {
    switch (dtype) {
    case DType::F16:
    case DType::BF16: return 2;
    case DType::F32: return 4;
    case DType::F64: return 8;
    }
    return 0;
}

double half_to_double(std::uint16_t bits) { return decode(bits, kHalf); }
double bfloat16_to_double(std::uint16_t bits) { return decode(bits, kBFloat16); }
std::uint16_t double_to_half(double value) { return encode(value, kHalf); }
std::uint16_t double_to_bfloat16(double value) { return encode(value, kBFloat16); }

} // namespace orthoedit

// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "helpers.hpp"
#include "orthoedit/container.hpp"
#include "orthoedit/error.hpp"

using namespace orthoedit;

namespace {

std::vector<std::uint8_t> make_file(const std::string& header, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> out;
    for (int i = 0; i < 8; ++i)
        out.push_back(std::uint8_t(std::uint64_t(header.size()) >> (8 * i)));
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

// Nearest 16-bit pattern by exhaustive search over all finite encodings;
// ties go to the even significand.
std::uint16_t nearest_by_enumeration(double x, double (*decode)(const std::uint8_t*)) {
    std::uint16_t best = 0;
    double best_err = INFINITY;
    for (std::uint32_t bits = 0; bits < 0x10000; ++bits) {
        const std::uint8_t le[2] = {std::uint8_t(bits), std::uint8_t(bits >> 8)};
        const double v = decode(le);
        if (!std::isfinite(v) || std::signbit(v) != std::signbit(x))
            continue;
        const double err = std::fabs(v - x);
        if (err < best_err || (err == best_err && (bits & 1u) == 0 && (best & 1u) == 1)) {
            best_err = err;
            best = std::uint16_t(bits);
        }
    }
    return best;
}

} // namespace

TEST_CASE("float64 to float32 rounds to nearest even") {
    TensorMap m;
    m.insert("x", DenseTensor({1}, DType::F64, {0.1}));
    const auto bytes = serialize_container(m, DTypePolicy::ForceFloat32);
    const auto n = bytes.size();
    const std::uint32_t bits = std::uint32_t(bytes[n - 4]) | std::uint32_t(bytes[n - 3]) << 8 |
                               std::uint32_t(bytes[n - 2]) << 16 | std::uint32_t(bytes[n - 1]) << 24;
    CHECK(bits == 0x3DCCCCCDu);
}

TEST_CASE("half and bfloat16 encoders agree with exhaustive nearest search") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mant(1.0, 2.0);
    std::uniform_int_distribution<int> half_exp(-26, 15), bf_exp(-134, 127);
    std::vector<double> half_cases = {1.0, 65504.0, 5.960464477539063e-08, 2.9802322387695312e-08,
                                      8.940696716308594e-08, 1.0 + std::ldexp(1.0, -11), 1.0 + 3 * std::ldexp(1.0, -11)};
    std::vector<double> bf_cases = {1.0, 1.0 + std::ldexp(1.0, -8), 1.0 + 3 * std::ldexp(1.0, -8), 1e-40, 3.0e38};
    for (int i = 0; i < 150; ++i) {
        const double sign = i % 2 ? -1.0 : 1.0;
        half_cases.push_back(sign * std::ldexp(mant(rng), half_exp(rng)));
        bf_cases.push_back(sign * std::ldexp(mant(rng), bf_exp(rng)));
    }
    for (double x : half_cases) {
        CAPTURE(x);
        CHECK(double_to_half(x) == nearest_by_enumeration(x, oracle::f16_from_le));
    }
    for (double x : bf_cases) {
        CAPTURE(x);
        CHECK(double_to_bfloat16(x) == nearest_by_enumeration(x, oracle::bf16_from_le));
    }
}

TEST_CASE("half and bfloat16 decoders are exact for every finite pattern") {
    for (std::uint32_t bits = 0; bits < 0x10000; ++bits) {
        const std::uint8_t le[2] = {std::uint8_t(bits), std::uint8_t(bits >> 8)};
        const double h = oracle::f16_from_le(le);
        if (std::isfinite(h)) {
            REQUIRE(half_to_double(std::uint16_t(bits)) == h);
            REQUIRE(double_to_half(h) == bits);
        }
        const double b = oracle::bf16_from_le(le);
        if (std::isfinite(b)) {
            REQUIRE(bfloat16_to_double(std::uint16_t(bits)) == b);
            REQUIRE(double_to_bfloat16(b) == bits);
        }
    }
}

TEST_CASE("identity tensor round-trips through a hand-built container") {
    const std::string header = R"({"w":{"data_offsets":[0,16],"dtype":"F32","shape":[2,2]}})";
    std::vector<std::uint8_t> payload;
    for (float f : {1.0f, 0.0f, 0.0f, 1.0f}) {
        const auto b = std::bit_cast<std::uint32_t>(f);
        for (int i = 0; i < 4; ++i)
            payload.push_back(std::uint8_t(b >> (8 * i)));
    }
    const auto file = make_file(header, payload);
    const auto m = parse_container(file);
    REQUIRE(m.size() == 1);
    const auto& w = m.at("w");
    CHECK(w.shape() == Shape{2, 2});
    CHECK(w.dtype() == DType::F32);
    CHECK(std::vector<double>(w.values().begin(), w.values().end()) == std::vector<double>{1, 0, 0, 1});
    CHECK(serialize_container(m) == file);
}

TEST_CASE("empty container is the header {}") {
    const auto file = make_file("{}", {});
    CHECK(parse_container(file).empty());
    CHECK(serialize_container(TensorMap{}) == file);
}

TEST_CASE("file size is 8 + header length + payload") {
    TensorMap m;
    m.insert("z", DenseTensor::zeros({4}, DType::F32));
    const auto bytes = serialize_container(m);
    const auto raw = oracle::read_raw(bytes);
    CHECK(bytes.size() == 8 + raw.header_len + 16);
    CHECK(raw.header_text == R"({"z":{"data_offsets":[0,16],"dtype":"F32","shape":[4]}})");
}

TEST_CASE("writer refuses non-finite values and names the tensor") {
    TensorMap m;
    m.insert("fine", DenseTensor({1}, DType::F32, {1.0}));
    m.insert("broken", DenseTensor({2}, DType::F32, {1.0, INFINITY}));
    try {
        serialize_container(m);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("'broken'") != std::string::npos);
    }
    TensorMap overflow;
    overflow.insert("big", DenseTensor({1}, DType::F16, {1e6}));
    CHECK_THROWS_AS(serialize_container(overflow), DataError);
}

TEST_CASE("reader rejects malformed containers") {
    auto expect_error = [](const std::vector<std::uint8_t>& file, const std::string& needle) {
        try {
            parse_container(file);
            FAIL("expected DataError containing " << needle);
        } catch (const DataError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
        }
    };
    const std::vector<std::uint8_t> four(4, 0), eight(8, 0);
    expect_error({1, 2, 3}, "too short");
    expect_error({0xFF, 0, 0, 0, 0, 0, 0, 0, '{', '}'}, "exceeds");
    expect_error(make_file("{not json", {}), "not valid JSON");
    expect_error(make_file(R"({"a":{"data_offsets":[0,4],"dtype":"I8","shape":[4]}})", four), "unknown dtype 'I8'");
    expect_error(make_file(R"({"a":{"data_offsets":[0,4],"dtype":"F32","shape":[1]},)"
                           R"("b":{"data_offsets":[2,6],"dtype":"F16","shape":[2]}})",
                           eight),
                 "overlaps");
    expect_error(make_file(R"({"a":{"data_offsets":[0,8],"dtype":"F32","shape":[2]}})", four), "out of bounds");
    expect_error(make_file(R"({"a":{"data_offsets":[0,4],"dtype":"F32","shape":[1]},)"
                           R"("a":{"data_offsets":[4,8],"dtype":"F32","shape":[1]}})",
                           eight),
                 "duplicate tensor name 'a'");
    expect_error(make_file(R"({"a":{"data_offsets":[0,4],"dtype":"F32","shape":[2]}})", four), "needs");
    expect_error(make_file(R"({"a":{"data_offsets":[4,8],"dtype":"F32","shape":[1]}})", eight), "gap");
    expect_error(make_file(R"({"a":{"data_offsets":[0,4],"dtype":"F32","shape":[1]}})", eight), "trailing");
}

TEST_CASE("reader accepts trailing header whitespace and arbitrary entry order") {
    const std::string header = R"({"b":{"dtype":"F16","shape":[1],"data_offsets":[0,2]},"a":{"shape":[1],"dtype":"F16","data_offsets":[2,4]}}   )";
    const auto m = parse_container(make_file(header, {0x00, 0x3C, 0x00, 0xC0}));
    CHECK(m.at("b").values()[0] == 1.0);
    CHECK(m.at("a").values()[0] == -2.0);
}

TEST_CASE("container round-trip is bit-exact for every dtype") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 25; ++trial) {
        TensorMap m;
        for (DType dtype : {DType::F16, DType::BF16, DType::F32, DType::F64}) {
            const Shape shape{1 + std::size_t(trial % 3), 1 + std::size_t(trial % 5)};
            std::vector<double> values(shape_numel(shape));
            for (double& v : values) {
                v = u(rng);
                // Snap to the storage grid so the map is exactly representable.
                if (dtype == DType::F16)
                    v = half_to_double(double_to_half(v));
                else if (dtype == DType::BF16)
                    v = bfloat16_to_double(double_to_bfloat16(v));
                else if (dtype == DType::F32)
                    v = static_cast<float>(v);
            }
            m.insert(fmt::format("t{}.{}", trial, dtype_name(dtype)), DenseTensor(shape, dtype, values));
        }
        m.metadata()["trial"] = std::to_string(trial);
        const auto bytes = serialize_container(m);
        const auto back = parse_container(bytes);
        CHECK(bit_identical(back, m));
        CHECK(serialize_container(back) == bytes);
    }
}

TEST_CASE("files written to disk read back identically") {
    const auto dir = testing::scratch_dir("container");
    TensorMap m;
    m.insert("layer.weight", testing::random_tensor({3, 4}, 1, DType::F64));
    write_container(m, dir / "a.safetensors");
    CHECK(bit_identical(read_container(dir / "a.safetensors"), m));
    CHECK_THROWS_AS(read_container(dir / "missing.safetensors"), DataError);
    std::filesystem::remove_all(dir);
}

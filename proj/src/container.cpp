// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "orthoedit/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "orthoedit/error.hpp"

namespace orthoedit {

namespace {

using nlohmann::json;

constexpr std::size_t kLengthPrefix = 8;
constexpr const char* kMetadataKey = "__metadata__";

void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i)
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t get_le(const std::uint8_t* p, std::size_t width) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < width; ++i)
        value |= std::uint64_t(p[i]) << (8 * i);
    return value;
}

void encode_values(const std::string& name, const DenseTensor& tensor, DType dtype, std::vector<std::uint8_t>& out) {
    for (std::size_t i = 0; i < tensor.numel(); ++i) {
        const double v = tensor.values()[i];
        if (!std::isfinite(v))
            throw DataError(fmt::format("refusing to write tensor '{}': non-finite value at element {}", name, i));
        std::uint64_t bits = 0;
        bool overflow = false;
        switch (dtype) {
        case DType::F16: {
            auto h = double_to_half(v);
            overflow = (h & 0x7C00u) == 0x7C00u;
            bits = h;
            break;
        }
        case DType::BF16: {
            auto b = double_to_bfloat16(v);
            overflow = (b & 0x7F80u) == 0x7F80u;
            bits = b;
            break;
        }
        case DType::F32: {
            auto f = static_cast<float>(v);
            overflow = std::isinf(f);
            bits = std::bit_cast<std::uint32_t>(f);
            break;
        }
        case DType::F64: bits = std::bit_cast<std::uint64_t>(v); break;
        }
        if (overflow)
            throw DataError(fmt::format("refusing to write tensor '{}': element {} ({}) overflows {}", name, i, v,
                                        dtype_name(dtype)));
        put_le(out, bits, dtype_size(dtype));
    }
}

std::vector<double> decode_values(const std::uint8_t* p, std::size_t count, DType dtype) {
    std::vector<double> values(count);
    const auto width = dtype_size(dtype);
    for (std::size_t i = 0; i < count; ++i, p += width) {
        const auto bits = get_le(p, width);
        switch (dtype) {
        case DType::F16: values[i] = half_to_double(std::uint16_t(bits)); break;
        case DType::BF16: values[i] = bfloat16_to_double(std::uint16_t(bits)); break;
        case DType::F32: values[i] = std::bit_cast<float>(std::uint32_t(bits)); break;
        case DType::F64: values[i] = std::bit_cast<double>(bits); break;
        }
    }
    return values;
}

struct HeaderEntry {
    std::string name;
    DType dtype;
    Shape shape;
    std::uint64_t begin;
    std::uint64_t end;
};

HeaderEntry parse_entry(const std::string& name, const json& value) {
    if (!value.is_object())
        throw DataError(fmt::format("header entry '{}' is not an object", name));
    for (const auto& field : {"dtype", "shape", "data_offsets"})
        if (!value.contains(field))
            throw DataError(fmt::format("header entry '{}' is missing '{}'", name, field));
    for (const auto& [key, _] : value.items())
        if (key != "dtype" && key != "shape" && key != "data_offsets")
            throw DataError(fmt::format("header entry '{}' has unexpected field '{}'", name, key));

    HeaderEntry entry{name, DType::F32, {}, 0, 0};
    const auto& dtype = value["dtype"];
    if (!dtype.is_string())
        throw DataError(fmt::format("tensor '{}': dtype is not a string", name));
    auto parsed = parse_dtype(dtype.get<std::string>());
    if (!parsed)
        throw DataError(fmt::format("tensor '{}': unknown dtype '{}'", name, dtype.get<std::string>()));
    entry.dtype = *parsed;

    const auto& shape = value["shape"];
    if (!shape.is_array())
        throw DataError(fmt::format("tensor '{}': shape is not an array", name));
    for (const auto& dim : shape) {
        if (!dim.is_number_unsigned() || dim.get<std::uint64_t>() == 0)
            throw DataError(fmt::format("tensor '{}': shape dimensions must be positive integers", name));
        entry.shape.push_back(dim.get<std::size_t>());
    }

    const auto& offsets = value["data_offsets"];
    if (!offsets.is_array() || offsets.size() != 2 || !offsets[0].is_number_unsigned() ||
        !offsets[1].is_number_unsigned())
        throw DataError(fmt::format("tensor '{}': data_offsets must be two non-negative integers", name));
    entry.begin = offsets[0].get<std::uint64_t>();
    entry.end = offsets[1].get<std::uint64_t>();
    if (entry.end < entry.begin)
        throw DataError(fmt::format("tensor '{}': data_offsets end {} precedes begin {}", name, entry.end, entry.begin));
    const auto expected = shape_numel(entry.shape) * dtype_size(entry.dtype);
    if (entry.end - entry.begin != expected)
        throw DataError(fmt::format("tensor '{}': data_offsets span {} bytes, shape {} x {} needs {}", name,
                                    entry.end - entry.begin, shape_string(entry.shape), dtype_name(entry.dtype),
                                    expected));
    return entry;
}

json parse_header_json(std::string_view text) {
    // nlohmann keeps the last of duplicate keys silently; catch them here.
    std::set<std::string> seen;
    std::string duplicate;
    json::parser_callback_t on_event = [&](int depth, json::parse_event_t event, json& parsed) {
        if (event == json::parse_event_t::key && depth == 1 && duplicate.empty()) {
            auto key = parsed.get<std::string>();
            if (!seen.insert(key).second)
                duplicate = std::move(key);
        }
        return true;
    };
    json header;
    try {
        header = json::parse(text.begin(), text.end(), on_event);
    } catch (const json::parse_error& e) {
        throw DataError(fmt::format("container header is not valid JSON: {}", e.what()));
    }
    if (!duplicate.empty())
        throw DataError(fmt::format("duplicate tensor name '{}' in container header", duplicate));
    if (!header.is_object())
        throw DataError("container header is not a JSON object");
    return header;
}

} // namespace

std::vector<std::uint8_t> serialize_container(const TensorMap& map, DTypePolicy policy) {
    json header = json::object();
    std::vector<std::uint8_t> payload;
    for (const auto& [name, tensor] : map) {
        const DType dtype = policy == DTypePolicy::ForceFloat32 ? DType::F32 : tensor.dtype();
        const auto begin = payload.size();
        encode_values(name, tensor, dtype, payload);
        header[name] = {{"dtype", dtype_name(dtype)},
                        {"shape", tensor.shape()},
                        {"data_offsets", {begin, payload.size()}}};
    }
    if (!map.metadata().empty())
        header[kMetadataKey] = map.metadata();

    const std::string text = header.dump();
    std::vector<std::uint8_t> out;
    out.reserve(kLengthPrefix + text.size() + payload.size());
    put_le(out, text.size(), kLengthPrefix);
    out.insert(out.end(), text.begin(), text.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

TensorMap parse_container(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kLengthPrefix)
        throw DataError(fmt::format("container is {} bytes, too short for the 8-byte header length", bytes.size()));
    const std::uint64_t header_len = get_le(bytes.data(), kLengthPrefix);
    if (header_len > bytes.size() - kLengthPrefix)
        throw DataError(fmt::format("header length {} exceeds the {} bytes following the length prefix", header_len,
                                    bytes.size() - kLengthPrefix));
    const std::string_view text(reinterpret_cast<const char*>(bytes.data() + kLengthPrefix), header_len);
    const json header = parse_header_json(text);

    TensorMap map;
    std::vector<HeaderEntry> entries;
    for (const auto& [key, value] : header.items()) {
        if (key == kMetadataKey) {
            if (!value.is_object())
                throw DataError("__metadata__ must be an object of strings");
            for (const auto& [mk, mv] : value.items()) {
                if (!mv.is_string())
                    throw DataError(fmt::format("__metadata__ value for '{}' is not a string", mk));
                map.metadata()[mk] = mv.get<std::string>();
            }
            continue;
        }
        if (key.empty())
            throw DataError("container holds a tensor with an empty name");
        entries.push_back(parse_entry(key, value));
    }

    const std::uint64_t payload_size = bytes.size() - kLengthPrefix - header_len;
    std::ranges::sort(entries, [](const auto& a, const auto& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    std::uint64_t cursor = 0;
    for (const auto& entry : entries) {
        if (entry.begin < cursor)
            throw DataError(fmt::format("tensor '{}': data offset {} overlaps the previous tensor ending at {}",
                                        entry.name, entry.begin, cursor));
        if (entry.begin > cursor)
            throw DataError(fmt::format("tensor '{}': data offset {} leaves a gap after offset {}", entry.name,
                                        entry.begin, cursor));
        if (entry.end > payload_size)
            throw DataError(fmt::format("tensor '{}': data offset {} is out of bounds (payload is {} bytes)",
                                        entry.name, entry.end, payload_size));
        cursor = entry.end;
    }
    if (cursor != payload_size)
        throw DataError(fmt::format("container has {} trailing bytes after offset {}", payload_size - cursor, cursor));

    const auto* payload = bytes.data() + kLengthPrefix + header_len;
    for (auto& entry : entries) {
        auto values = decode_values(payload + entry.begin, shape_numel(entry.shape), entry.dtype);
        map.insert(entry.name, DenseTensor(std::move(entry.shape), entry.dtype, std::move(values)));
    }
    return map;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError(fmt::format("cannot open '{}' for reading", path.string()));
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad())
        throw DataError(fmt::format("I/O error reading '{}'", path.string()));
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw DataError(fmt::format("I/O error writing '{}'", path.string()));
}

TensorMap read_container(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return parse_container(bytes);
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_container(const TensorMap& map, const std::filesystem::path& path, DTypePolicy policy) {
    write_file_bytes(path, serialize_container(map, policy));
}

} // namespace orthoedit

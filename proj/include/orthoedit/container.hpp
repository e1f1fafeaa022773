// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "orthoedit/tensor.hpp"

namespace orthoedit {

// Container layout (safetensors-compatible):
//   [0, 8)        u64 little-endian header length N
//   [8, 8 + N)    UTF-8 JSON: name -> {"data_offsets":[b,e],"dtype":"F32","shape":[...]}
//                 plus an optional "__metadata__" string map
//   [8 + N, ...)  row-major little-endian tensor buffers, offsets relative to
//                 the end of the header, contiguous and ascending.
//
// The writer emits a canonical header (sorted keys, no whitespace, no
// padding) and lays buffers out in lexicographic name order, so that
// write(read(p)) reproduces any file this library wrote byte for byte.

enum class DTypePolicy { Preserve, ForceFloat32 };

std::vector<std::uint8_t> serialize_container(const TensorMap& map, DTypePolicy policy = DTypePolicy::Preserve);
TensorMap parse_container(std::span<const std::uint8_t> bytes);

TensorMap read_container(const std::filesystem::path& path);
void write_container(const TensorMap& map, const std::filesystem::path& path,
                     DTypePolicy policy = DTypePolicy::Preserve);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace orthoedit

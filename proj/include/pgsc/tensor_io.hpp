// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pgsc/numeric.hpp"

namespace pgsc {

/// PGSC tensor record:
///   "PGSC" | version u32 | ndims u32 | dims u32 x ndims | float32 x prod(dims)
/// All integers and floats little-endian, data row-major.
inline constexpr std::uint32_t kTensorFormatVersion = 1;

struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;

    std::size_t element_count() const noexcept;
};

/// Number of bytes write_tensor emits for the given dims.
std::size_t tensor_record_size(std::span<const std::uint32_t> dims) noexcept;

void write_tensor(std::ostream& os, std::span<const std::uint32_t> dims, std::span<const Real> values);
Tensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> dims, std::span<const Real> values);
Tensor load_tensor(const std::filesystem::path& path);

RealMatrix to_matrix(const Tensor& t, std::size_t rows, std::size_t cols);

}  // namespace pgsc

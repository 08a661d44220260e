// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace pgsc {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'G', 'S', 'C'};
constexpr std::uint32_t kMaxDims = 16;

void put_u32(std::ostream& os, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    os.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& is) {
    std::array<unsigned char, 4> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw Error(ErrorCode::FormatError, "truncated tensor header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

std::size_t Tensor::element_count() const noexcept {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::size_t tensor_record_size(std::span<const std::uint32_t> dims) noexcept {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return 4 + 4 + 4 + 4 * dims.size() + 4 * n;
}

void write_tensor(std::ostream& os, std::span<const std::uint32_t> dims, std::span<const Real> values) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    if (n != values.size())
        throw Error(ErrorCode::DimensionMismatch, "tensor dims describe " + std::to_string(n) + " values, got " +
                                                      std::to_string(values.size()));
    os.write(kMagic.data(), 4);
    put_u32(os, kTensorFormatVersion);
    put_u32(os, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put_u32(os, d);
    for (Real v : values) put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    if (!os) throw Error(ErrorCode::IoFailure, "tensor write failed");
}

Tensor read_tensor(std::istream& is) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), 4)) throw Error(ErrorCode::FormatError, "truncated tensor magic");
    if (magic != kMagic) throw Error(ErrorCode::FormatError, "bad tensor magic");
    const std::uint32_t version = get_u32(is);
    if (version != kTensorFormatVersion)
        throw Error(ErrorCode::FormatError, "unsupported tensor version " + std::to_string(version));
    const std::uint32_t ndims = get_u32(is);
    if (ndims > kMaxDims) throw Error(ErrorCode::FormatError, "too many tensor dims");
    Tensor t;
    t.dims.resize(ndims);
    for (auto& d : t.dims) d = get_u32(is);
    t.values.resize(t.element_count());
    for (auto& v : t.values) v = std::bit_cast<float>(get_u32(is));
    return t;
}

void save_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> dims, std::span<const Real> values) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    write_tensor(os, dims, values);
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return read_tensor(is);
}

RealMatrix to_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
    if (t.element_count() != rows * cols)
        throw Error(ErrorCode::DimensionMismatch, "tensor has " + std::to_string(t.element_count()) +
                                                      " values, expected " + shape_string(rows, cols));
    RealMatrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<Real>(t.values[i]);
    return m;
}

}  // namespace pgsc

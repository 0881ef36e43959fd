// Copyright 2026 The ctnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctnet/tensor.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ctnet/error.hpp"

namespace ctnet {
namespace {

constexpr std::array<char, 4> kMagic{'M', 'M', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v)
{
    const std::array<char, 4> bytes{static_cast<char>(v & 0xffU), static_cast<char>((v >> 8) & 0xffU),
                                    static_cast<char>((v >> 16) & 0xffU),
                                    static_cast<char>((v >> 24) & 0xffU)};
    out.write(bytes.data(), bytes.size());
}

std::uint32_t decode_u32(const unsigned char* p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t element_count(const std::vector<std::uint32_t>& shape)
{
    std::size_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::uint32_t> dims) : shape(std::move(dims)), data(element_count(shape), 0.0F) {}

Tensor::Tensor(std::vector<std::uint32_t> dims, std::vector<float> values)
    : shape(std::move(dims)), data(std::move(values))
{
    if (data.size() != element_count(shape)) {
        throw ArgumentError("tensor payload size does not match its shape");
    }
}

bool bit_equal(const Tensor& a, const Tensor& b)
{
    return a.shape == b.shape && a.data.size() == b.data.size() &&
           (a.data.empty() || std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0);
}

void write_tensor(std::ostream& out, const Tensor& tensor)
{
    if (tensor.shape.size() > 255) {
        throw ArgumentError("tensor rank exceeds 255");
    }
    if (tensor.data.size() != element_count(tensor.shape)) {
        throw ArgumentError("tensor payload size does not match its shape");
    }
    out.write(kMagic.data(), kMagic.size());
    out.put(static_cast<char>(tensor.shape.size()));
    for (auto d : tensor.shape) {
        put_u32(out, d);
    }
    for (float v : tensor.data) {
        put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
}

Tensor read_tensor(std::istream& in, const std::string& source)
{
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 4 || magic != kMagic) {
        throw FormatError(source + ": missing MMT1 magic");
    }
    const int ndim = in.get();
    if (ndim == std::char_traits<char>::eof()) {
        throw FormatError(source + ": truncated header");
    }
    std::vector<std::uint32_t> shape(static_cast<std::size_t>(ndim));
    for (auto& d : shape) {
        std::array<unsigned char, 4> b{};
        in.read(reinterpret_cast<char*>(b.data()), 4);
        if (in.gcount() != 4) {
            throw FormatError(source + ": truncated header");
        }
        d = decode_u32(b.data());
    }
    const std::size_t n = element_count(shape);
    std::vector<unsigned char> raw(n * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw IntegrityError(source + ": payload truncated (expected " + std::to_string(n) + " floats)");
    }
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = std::bit_cast<float>(decode_u32(raw.data() + 4 * i));
    }
    return Tensor(std::move(shape), std::move(values));
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& tensor)
{
    write_tensor_records(path, {tensor});
}

Tensor read_tensor_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IntegrityError(path.string() + ": cannot open tensor file");
    }
    Tensor t = read_tensor(in, path.string());
    if (in.peek() != std::char_traits<char>::eof()) {
        throw IntegrityError(path.string() + ": trailing bytes after tensor payload");
    }
    return t;
}

void write_tensor_records(const std::filesystem::path& path, const std::vector<Tensor>& tensors)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ArgumentError(path.string() + ": cannot open for writing");
    }
    for (const auto& t : tensors) {
        write_tensor(out, t);
    }
    if (!out) {
        throw Error(path.string() + ": write failed");
    }
}

std::vector<Tensor> read_tensor_records(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IntegrityError(path.string() + ": cannot open tensor file");
    }
    std::vector<Tensor> out;
    while (in.peek() != std::char_traits<char>::eof()) {
        out.push_back(read_tensor(in, path.string()));
    }
    return out;
}

}  // namespace ctnet

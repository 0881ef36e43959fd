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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ctnet {

/// Dense row-major float32 tensor. This is the storage type of dataset images
/// and of every MMT1 file.
struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::uint32_t> dims);
    Tensor(std::vector<std::uint32_t> dims, std::vector<float> values);

    std::size_t size() const { return data.size(); }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t element_count(const std::vector<std::uint32_t>& shape);

/// True when both tensors have the same shape and identical bit patterns.
bool bit_equal(const Tensor& a, const Tensor& b);

// MMT1 container: magic "MMT1", uint8 ndim, ndim x uint32 dims, float32
// payload; all little-endian.

void write_tensor(std::ostream& out, const Tensor& tensor);

/// Reads one record. `source` names the file in error messages.
/// Throws FormatError on a bad magic/header and IntegrityError on a short payload.
Tensor read_tensor(std::istream& in, const std::string& source);

void write_tensor_file(const std::filesystem::path& path, const Tensor& tensor);

/// Reads a file holding exactly one record; trailing bytes are an IntegrityError.
Tensor read_tensor_file(const std::filesystem::path& path);

void write_tensor_records(const std::filesystem::path& path, const std::vector<Tensor>& tensors);

/// Reads every record in the file, in order.
std::vector<Tensor> read_tensor_records(const std::filesystem::path& path);

}  // namespace ctnet

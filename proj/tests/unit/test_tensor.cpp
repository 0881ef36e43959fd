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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctnet/error.hpp"
#include "ctnet/tensor.hpp"

namespace ctnet {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "ctnet_tensor_test";
    fs::create_directories(dir);
    return dir / name;
}

TEST(Tensor, StreamRoundTripIsBitExact)
{
    Tensor t({2, 3}, {1.0F, -0.0F, 3.5F, std::numeric_limits<float>::denorm_min(), 1e30F, -7.25F});
    std::stringstream ss;
    write_tensor(ss, t);
    const Tensor back = read_tensor(ss, "mem");
    EXPECT_TRUE(bit_equal(t, back));
}

TEST(Tensor, LayoutIsLittleEndian)
{
    std::stringstream ss;
    write_tensor(ss, Tensor({1}, {1.0F}));
    const std::string bytes = ss.str();
    ASSERT_EQ(bytes.size(), 4U + 1U + 4U + 4U);
    EXPECT_EQ(bytes.substr(0, 4), "MMT1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 0);
    // 1.0f == 0x3F800000
    EXPECT_EQ(static_cast<unsigned char>(bytes[11]), 0x80);
    EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 0x3F);
}

TEST(Tensor, BadMagicIsFormatError)
{
    std::stringstream ss("XXXX\x01\x01\x00\x00\x00");
    EXPECT_THROW(read_tensor(ss, "mem"), FormatError);
}

TEST(Tensor, TruncatedPayloadIsIntegrityError)
{
    std::stringstream ss;
    write_tensor(ss, Tensor({4}, {1, 2, 3, 4}));
    std::string bytes = ss.str();
    bytes.resize(bytes.size() - 3);
    std::stringstream cut(bytes);
    EXPECT_THROW(read_tensor(cut, "mem"), IntegrityError);
}

TEST(Tensor, FileRoundTripAndTrailingBytes)
{
    const auto path = scratch("one.mmt");
    const Tensor t({1, 2, 2}, {0.1F, 0.2F, 0.3F, 0.4F});
    write_tensor_file(path, t);
    EXPECT_TRUE(bit_equal(read_tensor_file(path), t));
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << "junk";
    }
    EXPECT_THROW(read_tensor_file(path), IntegrityError);
}

TEST(Tensor, RecordsRoundTrip)
{
    const auto path = scratch("many.bin");
    const std::vector<Tensor> ts{Tensor({2}, {1, 2}), Tensor({1, 3}, {4, 5, 6}), Tensor({0}, {})};
    write_tensor_records(path, ts);
    const auto back = read_tensor_records(path);
    ASSERT_EQ(back.size(), ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        EXPECT_TRUE(bit_equal(back[i], ts[i]));
    }
}

TEST(Tensor, MissingFileIsIntegrityError)
{
    EXPECT_THROW(read_tensor_file(scratch("does_not_exist.mmt")), IntegrityError);
}

}  // namespace
}  // namespace ctnet

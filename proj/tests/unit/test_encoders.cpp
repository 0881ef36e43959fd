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

#include "ctnet/encoders.hpp"
#include "ctnet/error.hpp"
#include "support/oracles.hpp"

namespace ctnet {
namespace {

constexpr double kStep = 1e-3;
constexpr double kTolerance = 1e-4;

EncoderConfig tiny_config()
{
    EncoderConfig c;
    c.feature_dim = 8;
    c.stage_channels = {3, 4};
    return c;
}

Tensor random_image(Rng& rng, std::uint32_t channels, std::uint32_t side)
{
    Tensor t({channels, side, side});
    for (auto& v : t.data) {
        v = static_cast<float>(rng.normal());
    }
    return t;
}

TEST(Encoders, DefaultShapesAndFiniteOutput)
{
    const auto params = ModelParams::initialize(EncoderConfig{}, true, 7);
    Rng rng(1);
    for (auto m : kModalities) {
        const Tensor x = random_image(rng, static_cast<std::uint32_t>(modality_channels(m)), 32);
        const FeatureVector f = encode(params, x, m);
        EXPECT_EQ(f.values.size(), 128);
        EXPECT_TRUE(f.values.allFinite());
        EXPECT_FALSE(f.is_auxiliary);
        EXPECT_EQ(f.source, m);
        EXPECT_GT(f.values.maxCoeff() - f.values.minCoeff(), 0.0);
    }
    const Tensor rgb = random_image(rng, 3, 32);
    for (auto m : {ModalityId::Ir, ModalityId::Depth}) {
        const FeatureVector f = encode_auxiliary(params, rgb, m);
        EXPECT_EQ(f.values.size(), 128);
        EXPECT_TRUE(f.is_auxiliary);
        EXPECT_EQ(f.source, m);
    }
}

TEST(Encoders, ForwardIsDeterministic)
{
    const auto params = ModelParams::initialize(tiny_config(), false, 3);
    Rng rng(2);
    const Tensor x = random_image(rng, 1, 16);
    const auto a = encode(params, x, ModalityId::Depth).values;
    const auto b = encode(params, x, ModalityId::Depth).values;
    EXPECT_EQ(a, b);
    EXPECT_EQ(ModelParams::initialize(tiny_config(), false, 3).parameters()[0].value, params.parameters()[0].value);
}

TEST(Encoders, SharedParametersIgnoreAuxiliaryPresence)
{
    const auto plain = ModelParams::initialize(tiny_config(), false, 11);
    const auto aux = ModelParams::initialize(tiny_config(), true, 11);
    ASSERT_GT(aux.parameters().size(), plain.parameters().size());
    for (std::size_t i = 0; i < plain.parameters().size(); ++i) {
        EXPECT_EQ(plain.parameters()[i].name, aux.parameters()[i].name);
        EXPECT_EQ(plain.parameters()[i].value, aux.parameters()[i].value);
    }
}

TEST(Encoders, ShapeMismatchIsArgumentError)
{
    const auto params = ModelParams::initialize(tiny_config(), true, 3);
    Rng rng(4);
    EXPECT_THROW(encode(params, random_image(rng, 1, 16), ModalityId::Rgb), ArgumentError);
    EXPECT_THROW(encode(params, random_image(rng, 3, 16), ModalityId::Ir), ArgumentError);
    EXPECT_THROW(encode(params, Tensor({16, 16}), ModalityId::Depth), ArgumentError);
    EXPECT_THROW(classify(params, FeatureVector{Vector::Zero(5)}, ModalityId::Rgb), ArgumentError);
}

TEST(Encoders, AuxiliaryErrors)
{
    Rng rng(5);
    const Tensor rgb = random_image(rng, 3, 16);
    const auto with_aux = ModelParams::initialize(tiny_config(), true, 3);
    EXPECT_THROW(encode_auxiliary(with_aux, rgb, ModalityId::Rgb), ArgumentError);
    const auto without = ModelParams::initialize(tiny_config(), false, 3);
    EXPECT_THROW(encode_auxiliary(without, rgb, ModalityId::Ir), ConfigError);
}

TEST(Encoders, ZeroFeatureLogitsEqualHeadBiases)
{
    auto params = ModelParams::zeros(tiny_config(), false);
    auto& bias = params.parameters()[params.head_offset(ModalityId::Ir) + 1].value;
    bias(0, 0) = 0.75;
    bias(1, 0) = -1.25;
    const Vector logits = classify(params, FeatureVector{Vector::Zero(8)}, ModalityId::Ir);
    ASSERT_EQ(logits.size(), 2);
    EXPECT_EQ(logits(0), 0.75);
    EXPECT_EQ(logits(1), -1.25);
}

TEST(Encoders, ParameterLayout)
{
    const auto params = ModelParams::initialize(tiny_config(), true, 1);
    const auto& ps = params.parameters();
    EXPECT_EQ(ps[params.encoder_offset(EncoderSlot::Rgb)].name, "encoder.rgb.conv0.weight");
    EXPECT_EQ(ps[params.encoder_offset(EncoderSlot::Depth) + 5].name, "encoder.depth.proj.bias");
    EXPECT_EQ(ps[params.head_offset(ModalityId::Depth)].name, "head.depth.weight");
    EXPECT_EQ(ps[params.encoder_offset(EncoderSlot::AuxIr)].name, "encoder.aux_ir.conv0.weight");
    EXPECT_EQ(ps.back().name, "encoder.aux_depth.proj.bias");
    EXPECT_THROW((void)ModelParams::initialize(tiny_config(), false, 1).encoder_offset(EncoderSlot::AuxIr),
                 ConfigError);
}

struct GradientCase {
    EncoderSlot slot;
    int channels;
};

class EncoderGradient : public ::testing::TestWithParam<GradientCase> {};

TEST_P(EncoderGradient, ParametersAndInputMatchFiniteDifferences)
{
    const auto [slot, channels] = GetParam();
    auto params = ModelParams::initialize(tiny_config(), true, 19);
    Rng rng(static_cast<std::uint64_t>(channels) * 31 + static_cast<std::uint64_t>(slot));
    std::vector<Tensor> images;
    for (int i = 0; i < 2; ++i) {
        images.push_back(random_image(rng, static_cast<std::uint32_t>(channels), 8));
    }
    std::vector<const Tensor*> ptrs{&images[0], &images[1]};
    ImageBatch batch = pack_images(ptrs);
    Matrix weights(8, 2);
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        weights.data()[i] = rng.normal();
    }
    auto functional = [&] { return (encoder_forward(params, slot, batch).array() * weights.array()).sum(); };

    EncoderTape tape;
    encoder_forward(params, slot, batch, &tape);
    ParamGrads grads = params.zero_grads();
    ImageBatch d_input;
    encoder_backward(params, slot, tape, weights, grads, &d_input);

    const std::size_t first = params.encoder_offset(slot);
    for (std::size_t p = first; p < first + 6; ++p) {
        auto& value = params.parameters()[p].value;
        for (int trial = 0; trial < 3; ++trial) {
            const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(value.size())));
            const double numeric = oracle::central_difference(value, k, kStep, functional);
            EXPECT_LT(oracle::relative_error(grads[p].data()[k], numeric), kTolerance)
                << params.parameters()[p].name << "[" << k << "]";
        }
    }
    for (std::size_t p = 0; p < grads.size(); ++p) {
        if (p < first || p >= first + 6) {
            EXPECT_TRUE(grads[p].isZero(0.0)) << params.parameters()[p].name;
        }
    }
    for (int trial = 0; trial < 5; ++trial) {
        const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(batch.data.size())));
        const double numeric = oracle::central_difference(batch.data, k, kStep, functional);
        EXPECT_LT(oracle::relative_error(d_input.data.data()[k], numeric), kTolerance) << "input[" << k << "]";
    }
}

INSTANTIATE_TEST_SUITE_P(AllSlots, EncoderGradient,
                         ::testing::Values(GradientCase{EncoderSlot::Rgb, 3}, GradientCase{EncoderSlot::Ir, 1},
                                           GradientCase{EncoderSlot::Depth, 1}, GradientCase{EncoderSlot::AuxIr, 3},
                                           GradientCase{EncoderSlot::AuxDepth, 3}));

TEST(EncoderGradient, SumOfEncodeMatchesFiniteDifferences)
{
    auto params = ModelParams::initialize(EncoderConfig{}, false, 23);
    Rng rng(8);
    const Tensor x = random_image(rng, 3, 32);
    auto functional = [&] { return encode(params, x, ModalityId::Rgb).values.sum(); };
    const Tensor* ptr = &x;
    EncoderTape tape;
    encoder_forward(params, EncoderSlot::Rgb, pack_images(std::span(&ptr, 1)), &tape);
    ParamGrads grads = params.zero_grads();
    encoder_backward(params, EncoderSlot::Rgb, tape, Matrix::Ones(128, 1), grads);
    for (std::size_t p = 0; p < 8; ++p) {
        auto& value = params.parameters()[p].value;
        const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(value.size())));
        const double numeric = oracle::central_difference(value, k, kStep, functional);
        EXPECT_LT(oracle::relative_error(grads[p].data()[k], numeric), kTolerance) << params.parameters()[p].name;
    }
}

TEST(HeadGradient, CrossEntropyMatchesFiniteDifferences)
{
    auto params = ModelParams::initialize(tiny_config(), false, 29);
    Rng rng(9);
    for (auto m : kModalities) {
        Matrix features(8, 4);
        for (Eigen::Index i = 0; i < features.size(); ++i) {
            features.data()[i] = rng.normal();
        }
        const std::vector<Label> labels{Label::Live, Label::Spoof, Label::Live, Label::Spoof};
        auto ce = [&] {
            const Matrix logits = head_forward(params, m, features);
            std::vector<std::array<double, 2>> rows;
            for (Eigen::Index j = 0; j < logits.cols(); ++j) {
                rows.push_back({logits(0, j), logits(1, j)});
            }
            return oracle::loss_ce(rows, labels);
        };
        const Matrix logits = head_forward(params, m, features);
        Matrix d_logits(2, 4);
        for (Eigen::Index j = 0; j < 4; ++j) {
            const double z = std::exp(logits(0, j)) + std::exp(logits(1, j));
            const std::size_t y = labels[static_cast<std::size_t>(j)] == Label::Live ? 0 : 1;
            for (Eigen::Index r = 0; r < 2; ++r) {
                d_logits(r, j) = (std::exp(logits(r, j)) / z - (static_cast<std::size_t>(r) == y ? 1.0 : 0.0)) / 4.0;
            }
        }
        ParamGrads grads = params.zero_grads();
        Matrix d_features;
        head_backward(params, m, features, d_logits, grads, &d_features);
        const std::size_t h = params.head_offset(m);
        for (std::size_t p = h; p < h + 2; ++p) {
            auto& value = params.parameters()[p].value;
            for (Eigen::Index k = 0; k < value.size(); k += 3) {
                const double numeric = oracle::central_difference(value, k, kStep, ce);
                EXPECT_LT(oracle::relative_error(grads[p].data()[k], numeric), kTolerance);
            }
        }
        for (Eigen::Index k = 0; k < features.size(); k += 5) {
            const double numeric = oracle::central_difference(features, k, kStep, ce);
            EXPECT_LT(oracle::relative_error(d_features.data()[k], numeric), kTolerance);
        }
    }
}

TEST(Encoders, QuantizeToFloatIsIdempotent)
{
    auto params = ModelParams::initialize(tiny_config(), true, 5);
    params.quantize_to_float();
    const auto once = params.parameters();
    params.quantize_to_float();
    for (std::size_t i = 0; i < once.size(); ++i) {
        EXPECT_EQ(once[i].value, params.parameters()[i].value);
    }
    EXPECT_TRUE(params.all_finite());
}

}  // namespace
}  // namespace ctnet

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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctnet/features.hpp"
#include "ctnet/tensor.hpp"

namespace ctnet {

enum class Activation { Silu, Relu, Tanh };

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

/// Architecture of every feature extractor: a stack of stride-2 3x3
/// convolutions (one per entry of `stage_channels`), global average pooling
/// and a linear projection to `feature_dim`.
struct EncoderConfig {
    int feature_dim = 128;
    std::vector<int> stage_channels{16, 32, 64};
    Activation activation = Activation::Silu;

    /// Throws ConfigError.
    void validate() const;

    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

/// The five feature extractors. Auxiliary slots read the RGB tensor.
enum class EncoderSlot { Rgb, Ir, Depth, AuxIr, AuxDepth };

std::string_view slot_name(EncoderSlot slot);
int slot_input_channels(EncoderSlot slot);

inline EncoderSlot slot_for(ModalityId m)
{
    return static_cast<EncoderSlot>(index_of(m));
}

struct Parameter {
    std::string name;
    Matrix value;
};

/// One gradient matrix per parameter, aligned with ModelParams::parameters().
using ParamGrads = std::vector<Matrix>;

/// All trainable parameters: three modality encoders, optionally two auxiliary
/// encoders, and three linear classifier heads (d -> 2).
class ModelParams {
public:
    ModelParams() = default;

    /// Variance-scaled random initialization. Each tensor draws from a stream
    /// keyed by (seed, parameter name), so shared parameters initialize
    /// identically with or without auxiliary encoders.
    static ModelParams initialize(const EncoderConfig& config, bool with_auxiliary, std::uint64_t seed);

    /// Structure only, all values zero.
    static ModelParams zeros(const EncoderConfig& config, bool with_auxiliary);

    const EncoderConfig& config() const { return config_; }
    bool has_auxiliary() const { return has_auxiliary_; }
    int feature_dim() const { return config_.feature_dim; }

    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }

    /// Index of the first parameter of an encoder; its layout is
    /// [conv0.weight, conv0.bias, ..., proj.weight, proj.bias].
    std::size_t encoder_offset(EncoderSlot slot) const;
    /// Index of [weight, bias] of a classifier head.
    std::size_t head_offset(ModalityId m) const;

    ParamGrads zero_grads() const;
    std::size_t scalar_count() const;
    bool all_finite() const;

    /// Rounds every value to the nearest float32 so the parameters survive an
    /// MMT1 round trip bit-exactly.
    void quantize_to_float();

private:
    EncoderConfig config_;
    bool has_auxiliary_ = false;
    std::vector<Parameter> params_;
};

/// A batch of images in channel-major layout: `data` is C x (n*H*W) and column
/// s*H*W + y*W + x holds every channel of pixel (y, x) of sample s.
struct ImageBatch {
    Matrix data;
    int n = 0;
    int height = 0;
    int width = 0;

    int channels() const { return static_cast<int>(data.rows()); }
};

/// Packs CxHxW tensors (all the same shape) into an ImageBatch.
ImageBatch pack_images(std::span<const Tensor* const> tensors);
ImageBatch zero_images(int n, int channels, int height, int width);

/// Activations retained by a forward pass for the backward pass.
struct EncoderTape {
    struct Stage {
        Matrix cols;  ///< im2col of the stage input
        Matrix pre;   ///< pre-activation
        int in_height = 0;
        int in_width = 0;
        int out_height = 0;
        int out_width = 0;
    };
    std::vector<Stage> stages;
    Matrix pooled;
    int n = 0;
};

/// Features of a batch, d x n. Throws ArgumentError on a channel mismatch.
Matrix encoder_forward(const ModelParams& params, EncoderSlot slot, const ImageBatch& input,
                       EncoderTape* tape = nullptr);

/// Accumulates parameter gradients for d(loss)/d(features) into `grads`;
/// optionally writes d(loss)/d(input).
void encoder_backward(const ModelParams& params, EncoderSlot slot, const EncoderTape& tape, const Matrix& d_features,
                      ParamGrads& grads, ImageBatch* d_input = nullptr);

/// Logits 2 x n (row 0 live, row 1 spoof).
Matrix head_forward(const ModelParams& params, ModalityId m, const Matrix& features);

void head_backward(const ModelParams& params, ModalityId m, const Matrix& features, const Matrix& d_logits,
                   ParamGrads& grads, Matrix* d_features = nullptr);

/// Single-sample conveniences. Throw ArgumentError on a shape mismatch.
FeatureVector encode(const ModelParams& params, const Tensor& x, ModalityId m);

/// IR-like or depth-like features from the RGB tensor. Throws ArgumentError
/// for target RGB and ConfigError when the model has no auxiliary encoders.
FeatureVector encode_auxiliary(const ModelParams& params, const Tensor& x_rgb, ModalityId target);

/// Two logits (live, spoof).
Vector classify(const ModelParams& params, const FeatureVector& f, ModalityId m);

}  // namespace ctnet

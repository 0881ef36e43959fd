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

#include "ctnet/encoders.hpp"

#include <cmath>
#include <cstring>

#include "ctnet/error.hpp"
#include "ctnet/rng.hpp"
#include "json_util.hpp"

namespace ctnet {
namespace {

constexpr int kKernel = 3;
constexpr int kTaps = kKernel * kKernel;
constexpr int kStride = 2;
constexpr int kPad = 1;

constexpr std::array<EncoderSlot, 3> kMainSlots{EncoderSlot::Rgb, EncoderSlot::Ir, EncoderSlot::Depth};
constexpr std::array<EncoderSlot, 2> kAuxSlots{EncoderSlot::AuxIr, EncoderSlot::AuxDepth};

int out_extent(int in) { return (in + 2 * kPad - kKernel) / kStride + 1; }

std::size_t params_per_encoder(const EncoderConfig& c) { return 2 * (c.stage_channels.size() + 1); }

Matrix activate(Activation a, const Matrix& pre)
{
    switch (a) {
    case Activation::Silu:
        return (pre.array() / (1.0 + (-pre.array()).exp())).matrix();
    case Activation::Relu:
        return pre.cwiseMax(0.0);
    case Activation::Tanh:
        return pre.array().tanh().matrix();
    }
    return pre;
}

// d(act)/d(pre), elementwise.
Matrix activation_slope(Activation a, const Matrix& pre)
{
    switch (a) {
    case Activation::Silu: {
        const Eigen::ArrayXXd sig = 1.0 / (1.0 + (-pre.array()).exp());
        return (sig * (1.0 + pre.array() * (1.0 - sig))).matrix();
    }
    case Activation::Relu:
        return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh:
        return (1.0 - pre.array().tanh().square()).matrix();
    }
    return Matrix::Ones(pre.rows(), pre.cols());
}

// Gathers the 3x3 stride-2 neighbourhoods of every output pixel into columns:
// row (ky*3 + kx)*C + c, column s*Ho*Wo + oy*Wo + ox.
Matrix im2col(const Matrix& in, int n, int h, int w, int ho, int wo)
{
    const auto c = in.rows();
    Matrix cols = Matrix::Zero(kTaps * c, static_cast<Eigen::Index>(n) * ho * wo);
    const double* src = in.data();
    double* dst = cols.data();
    const std::size_t csz = static_cast<std::size_t>(c);
    for (int s = 0; s < n; ++s) {
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
                double* col = dst + (static_cast<std::size_t>(s) * ho * wo + static_cast<std::size_t>(oy) * wo + ox) *
                                        kTaps * csz;
                for (int ky = 0; ky < kKernel; ++ky) {
                    const int iy = oy * kStride - kPad + ky;
                    if (iy < 0 || iy >= h) {
                        continue;
                    }
                    for (int kx = 0; kx < kKernel; ++kx) {
                        const int ix = ox * kStride - kPad + kx;
                        if (ix < 0 || ix >= w) {
                            continue;
                        }
                        const std::size_t in_col = static_cast<std::size_t>(s) * h * w + static_cast<std::size_t>(iy) * w + ix;
                        std::memcpy(col + static_cast<std::size_t>(ky * kKernel + kx) * csz, src + in_col * csz,
                                    csz * sizeof(double));
                    }
                }
            }
        }
    }
    return cols;
}

// Adjoint of im2col: scatter-adds column gradients back onto the input grid.
Matrix col2im(const Matrix& cols, Eigen::Index c, int n, int h, int w, int ho, int wo)
{
    Matrix out = Matrix::Zero(c, static_cast<Eigen::Index>(n) * h * w);
    const double* src = cols.data();
    double* dst = out.data();
    const std::size_t csz = static_cast<std::size_t>(c);
    for (int s = 0; s < n; ++s) {
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
                const double* col = src + (static_cast<std::size_t>(s) * ho * wo + static_cast<std::size_t>(oy) * wo + ox) *
                                              kTaps * csz;
                for (int ky = 0; ky < kKernel; ++ky) {
                    const int iy = oy * kStride - kPad + ky;
                    if (iy < 0 || iy >= h) {
                        continue;
                    }
                    for (int kx = 0; kx < kKernel; ++kx) {
                        const int ix = ox * kStride - kPad + kx;
                        if (ix < 0 || ix >= w) {
                            continue;
                        }
                        double* target = dst + (static_cast<std::size_t>(s) * h * w + static_cast<std::size_t>(iy) * w + ix) * csz;
                        const double* from = col + static_cast<std::size_t>(ky * kKernel + kx) * csz;
                        for (std::size_t k = 0; k < csz; ++k) {
                            target[k] += from[k];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void add_encoder(std::vector<Parameter>& out, const EncoderConfig& c, EncoderSlot slot)
{
    const std::string prefix = "encoder." + std::string(slot_name(slot)) + ".";
    int in_channels = slot_input_channels(slot);
    for (std::size_t i = 0; i < c.stage_channels.size(); ++i) {
        const int oc = c.stage_channels[i];
        out.push_back({prefix + "conv" + std::to_string(i) + ".weight", Matrix::Zero(oc, kTaps * in_channels)});
        out.push_back({prefix + "conv" + std::to_string(i) + ".bias", Matrix::Zero(oc, 1)});
        in_channels = oc;
    }
    out.push_back({prefix + "proj.weight", Matrix::Zero(c.feature_dim, in_channels)});
    out.push_back({prefix + "proj.bias", Matrix::Zero(c.feature_dim, 1)});
}

void check_slot(const ModelParams& params, EncoderSlot slot)
{
    if ((slot == EncoderSlot::AuxIr || slot == EncoderSlot::AuxDepth) && !params.has_auxiliary()) {
        throw ConfigError("model has no auxiliary encoders (trained in the fixed-modal scenario)");
    }
}

}  // namespace

std::string_view activation_name(Activation a)
{
    switch (a) {
    case Activation::Silu:
        return "silu";
    case Activation::Relu:
        return "relu";
    case Activation::Tanh:
        return "tanh";
    }
    return "?";
}

std::optional<Activation> parse_activation(std::string_view name)
{
    for (auto a : {Activation::Silu, Activation::Relu, Activation::Tanh}) {
        if (activation_name(a) == name) {
            return a;
        }
    }
    return std::nullopt;
}

void EncoderConfig::validate() const
{
    if (feature_dim < 2) {
        throw ConfigError("model.feature_dim must be >= 2");
    }
    if (stage_channels.empty()) {
        throw ConfigError("model.stage_channels must not be empty");
    }
    for (int c : stage_channels) {
        if (c < 1) {
            throw ConfigError("model.stage_channels entries must be >= 1");
        }
    }
}

void to_json(nlohmann::json& j, const EncoderConfig& c)
{
    j = nlohmann::json{{"feature_dim", c.feature_dim},
                       {"stage_channels", c.stage_channels},
                       {"activation", activation_name(c.activation)}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c)
{
    const std::string where = "model";
    detail::reject_unknown(j, {"feature_dim", "stage_channels", "activation"}, where);
    detail::read_opt(j, "feature_dim", c.feature_dim, where);
    detail::read_opt(j, "stage_channels", c.stage_channels, where);
    std::string act(activation_name(c.activation));
    detail::read_opt(j, "activation", act, where);
    const auto parsed = parse_activation(act);
    if (!parsed) {
        throw ConfigError("model.activation: expected one of silu, relu, tanh");
    }
    c.activation = *parsed;
}

std::string_view slot_name(EncoderSlot slot)
{
    switch (slot) {
    case EncoderSlot::Rgb:
        return "rgb";
    case EncoderSlot::Ir:
        return "ir";
    case EncoderSlot::Depth:
        return "depth";
    case EncoderSlot::AuxIr:
        return "aux_ir";
    case EncoderSlot::AuxDepth:
        return "aux_depth";
    }
    return "?";
}

int slot_input_channels(EncoderSlot slot)
{
    switch (slot) {
    case EncoderSlot::Ir:
        return modality_channels(ModalityId::Ir);
    case EncoderSlot::Depth:
        return modality_channels(ModalityId::Depth);
    default:
        return modality_channels(ModalityId::Rgb);
    }
}

ModelParams ModelParams::zeros(const EncoderConfig& config, bool with_auxiliary)
{
    config.validate();
    ModelParams p;
    p.config_ = config;
    p.has_auxiliary_ = with_auxiliary;
    for (auto slot : kMainSlots) {
        add_encoder(p.params_, config, slot);
    }
    for (auto m : kModalities) {
        const std::string prefix = "head." + std::string(modality_name(m)) + ".";
        p.params_.push_back({prefix + "weight", Matrix::Zero(2, config.feature_dim)});
        p.params_.push_back({prefix + "bias", Matrix::Zero(2, 1)});
    }
    if (with_auxiliary) {
        for (auto slot : kAuxSlots) {
            add_encoder(p.params_, config, slot);
        }
    }
    return p;
}

ModelParams ModelParams::initialize(const EncoderConfig& config, bool with_auxiliary, std::uint64_t seed)
{
    ModelParams p = zeros(config, with_auxiliary);
    for (auto& param : p.params_) {
        if (param.name.ends_with(".bias")) {
            continue;
        }
        Rng rng(mix_seed(seed, fnv1a(param.name)));
        const auto fan_in = static_cast<double>(param.value.cols());
        // He scaling for layers followed by a nonlinearity, LeCun for the
        // linear projection and heads.
        const bool conv = param.name.find(".conv") != std::string::npos;
        const double stddev = std::sqrt((conv ? 2.0 : 1.0) / fan_in);
        for (Eigen::Index i = 0; i < param.value.size(); ++i) {
            param.value.data()[i] = stddev * rng.normal();
        }
    }
    return p;
}

std::size_t ModelParams::encoder_offset(EncoderSlot slot) const
{
    const std::size_t per = params_per_encoder(config_);
    switch (slot) {
    case EncoderSlot::Rgb:
    case EncoderSlot::Ir:
    case EncoderSlot::Depth:
        return per * static_cast<std::size_t>(slot);
    case EncoderSlot::AuxIr:
    case EncoderSlot::AuxDepth:
        if (!has_auxiliary_) {
            throw ConfigError("model has no auxiliary encoders (trained in the fixed-modal scenario)");
        }
        return 3 * per + 6 + per * (static_cast<std::size_t>(slot) - 3);
    }
    return 0;
}

std::size_t ModelParams::head_offset(ModalityId m) const
{
    return 3 * params_per_encoder(config_) + 2 * index_of(m);
}

ParamGrads ModelParams::zero_grads() const
{
    ParamGrads g;
    g.reserve(params_.size());
    for (const auto& p : params_) {
        g.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
    return g;
}

std::size_t ModelParams::scalar_count() const
{
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += static_cast<std::size_t>(p.value.size());
    }
    return n;
}

bool ModelParams::all_finite() const
{
    for (const auto& p : params_) {
        if (!p.value.allFinite()) {
            return false;
        }
    }
    return true;
}

void ModelParams::quantize_to_float()
{
    for (auto& p : params_) {
        p.value = p.value.cast<float>().cast<double>();
    }
}

ImageBatch zero_images(int n, int channels, int height, int width)
{
    return {Matrix::Zero(channels, static_cast<Eigen::Index>(n) * height * width), n, height, width};
}

ImageBatch pack_images(std::span<const Tensor* const> tensors)
{
    if (tensors.empty()) {
        throw ArgumentError("pack_images: no tensors");
    }
    const auto& shape = tensors.front()->shape;
    if (shape.size() != 3) {
        throw ArgumentError("pack_images: expected C x H x W tensors");
    }
    const int c = static_cast<int>(shape[0]);
    const int h = static_cast<int>(shape[1]);
    const int w = static_cast<int>(shape[2]);
    ImageBatch b = zero_images(static_cast<int>(tensors.size()), c, h, w);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t s = 0; s < tensors.size(); ++s) {
        const Tensor& t = *tensors[s];
        if (t.shape != shape) {
            throw ArgumentError("pack_images: tensors differ in shape");
        }
        for (int ch = 0; ch < c; ++ch) {
            for (std::size_t p = 0; p < plane; ++p) {
                b.data(ch, static_cast<Eigen::Index>(s * plane + p)) = t.data[static_cast<std::size_t>(ch) * plane + p];
            }
        }
    }
    return b;
}

Matrix encoder_forward(const ModelParams& params, EncoderSlot slot, const ImageBatch& input, EncoderTape* tape)
{
    check_slot(params, slot);
    if (input.channels() != slot_input_channels(slot)) {
        throw ArgumentError("encoder '" + std::string(slot_name(slot)) + "' expects " +
                            std::to_string(slot_input_channels(slot)) + " input channels, got " +
                            std::to_string(input.channels()));
    }
    if (input.n < 1 || input.height < 1 || input.width < 1) {
        throw ArgumentError("encoder input batch is empty");
    }
    const auto& ps = params.parameters();
    const std::size_t base = params.encoder_offset(slot);
    const auto& cfg = params.config();
    const std::size_t stages = cfg.stage_channels.size();
    if (tape != nullptr) {
        tape->stages.assign(stages, {});
        tape->n = input.n;
    }

    Matrix act = input.data;
    int h = input.height;
    int w = input.width;
    for (std::size_t l = 0; l < stages; ++l) {
        const int ho = out_extent(h);
        const int wo = out_extent(w);
        Matrix cols = im2col(act, input.n, h, w, ho, wo);
        const Matrix& weight = ps[base + 2 * l].value;
        const Matrix& bias = ps[base + 2 * l + 1].value;
        Matrix pre = weight * cols;
        pre.colwise() += bias.col(0);
        act = activate(cfg.activation, pre);
        if (tape != nullptr) {
            auto& st = tape->stages[l];
            st.cols = std::move(cols);
            st.pre = std::move(pre);
            st.in_height = h;
            st.in_width = w;
            st.out_height = ho;
            st.out_width = wo;
        }
        h = ho;
        w = wo;
    }

    const Eigen::Index area = static_cast<Eigen::Index>(h) * w;
    Matrix pooled(act.rows(), input.n);
    for (int s = 0; s < input.n; ++s) {
        pooled.col(s) = act.middleCols(s * area, area).rowwise().mean();
    }
    Matrix features = ps[base + 2 * stages].value * pooled;
    features.colwise() += ps[base + 2 * stages + 1].value.col(0);
    if (tape != nullptr) {
        tape->pooled = std::move(pooled);
    }
    return features;
}

void encoder_backward(const ModelParams& params, EncoderSlot slot, const EncoderTape& tape, const Matrix& d_features,
                      ParamGrads& grads, ImageBatch* d_input)
{
    check_slot(params, slot);
    const auto& ps = params.parameters();
    const std::size_t base = params.encoder_offset(slot);
    const auto& cfg = params.config();
    const std::size_t stages = cfg.stage_channels.size();
    if (tape.stages.size() != stages || d_features.cols() != tape.n) {
        throw ArgumentError("encoder_backward: tape does not match the gradient batch");
    }

    grads[base + 2 * stages].noalias() += d_features * tape.pooled.transpose();
    grads[base + 2 * stages + 1].col(0) += d_features.rowwise().sum();
    const Matrix d_pooled = ps[base + 2 * stages].value.transpose() * d_features;

    const auto& last = tape.stages.back();
    const Eigen::Index area = static_cast<Eigen::Index>(last.out_height) * last.out_width;
    Matrix d_act(d_pooled.rows(), tape.n * area);
    for (int s = 0; s < tape.n; ++s) {
        d_act.middleCols(s * area, area) = (d_pooled.col(s) / static_cast<double>(area)).replicate(1, area);
    }

    for (std::size_t l = stages; l-- > 0;) {
        const auto& st = tape.stages[l];
        const Matrix d_pre = d_act.cwiseProduct(activation_slope(cfg.activation, st.pre));
        grads[base + 2 * l].noalias() += d_pre * st.cols.transpose();
        grads[base + 2 * l + 1].col(0) += d_pre.rowwise().sum();
        if (l == 0 && d_input == nullptr) {
            break;
        }
        const Matrix& weight = ps[base + 2 * l].value;
        const Matrix d_cols = weight.transpose() * d_pre;
        const Eigen::Index in_channels = weight.cols() / kTaps;
        d_act = col2im(d_cols, in_channels, tape.n, st.in_height, st.in_width, st.out_height, st.out_width);
    }
    if (d_input != nullptr) {
        const auto& first = tape.stages.front();
        d_input->data = std::move(d_act);
        d_input->n = tape.n;
        d_input->height = first.in_height;
        d_input->width = first.in_width;
    }
}

Matrix head_forward(const ModelParams& params, ModalityId m, const Matrix& features)
{
    const auto& ps = params.parameters();
    const std::size_t base = params.head_offset(m);
    if (features.rows() != params.feature_dim()) {
        throw ArgumentError("classifier head expects features of length " + std::to_string(params.feature_dim()));
    }
    Matrix logits = ps[base].value * features;
    logits.colwise() += ps[base + 1].value.col(0);
    return logits;
}

void head_backward(const ModelParams& params, ModalityId m, const Matrix& features, const Matrix& d_logits,
                   ParamGrads& grads, Matrix* d_features)
{
    const auto& ps = params.parameters();
    const std::size_t base = params.head_offset(m);
    grads[base].noalias() += d_logits * features.transpose();
    grads[base + 1].col(0) += d_logits.rowwise().sum();
    if (d_features != nullptr) {
        *d_features = ps[base].value.transpose() * d_logits;
    }
}

namespace {

ImageBatch single_image(const Tensor& x, int expected_channels, const char* what)
{
    if (x.shape.size() != 3 || x.shape[0] != static_cast<std::uint32_t>(expected_channels) || x.shape[1] == 0 ||
        x.shape[2] == 0) {
        throw ArgumentError(std::string(what) + ": expected a " + std::to_string(expected_channels) +
                            " x H x W tensor");
    }
    const Tensor* one[] = {&x};
    return pack_images(one);
}

}  // namespace

FeatureVector encode(const ModelParams& params, const Tensor& x, ModalityId m)
{
    const ImageBatch batch = single_image(x, modality_channels(m), "encode");
    return {encoder_forward(params, slot_for(m), batch).col(0), m, false};
}

FeatureVector encode_auxiliary(const ModelParams& params, const Tensor& x_rgb, ModalityId target)
{
    if (target == ModalityId::Rgb) {
        throw ArgumentError("encode_auxiliary: target must be IR or DEPTH");
    }
    if (!params.has_auxiliary()) {
        throw ConfigError("model has no auxiliary encoders (trained in the fixed-modal scenario)");
    }
    const ImageBatch batch = single_image(x_rgb, modality_channels(ModalityId::Rgb), "encode_auxiliary");
    const auto slot = target == ModalityId::Ir ? EncoderSlot::AuxIr : EncoderSlot::AuxDepth;
    return {encoder_forward(params, slot, batch).col(0), target, true};
}

Vector classify(const ModelParams& params, const FeatureVector& f, ModalityId m)
{
    if (f.values.size() != params.feature_dim()) {
        throw ArgumentError("classify: feature length " + std::to_string(f.values.size()) + " != " +
                            std::to_string(params.feature_dim()));
    }
    return head_forward(params, m, f.values).col(0);
}

}  // namespace ctnet

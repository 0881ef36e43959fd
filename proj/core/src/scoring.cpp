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

#include "ctnet/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "ctnet/error.hpp"
#include "ctnet/transitions.hpp"

namespace ctnet {
namespace {

std::string upper(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

EncoderSlot auxiliary_slot(ModalityId m)
{
    return m == ModalityId::Ir ? EncoderSlot::AuxIr : EncoderSlot::AuxDepth;
}

void check_protocol(const ModelParams& params, TestProtocol protocol, MissingFill fill)
{
    if (fill == MissingFill::Auxiliary && protocol_needs_auxiliary(protocol) && !params.has_auxiliary()) {
        throw ConfigError("protocol " + std::string(protocol_name(protocol)) +
                          " needs auxiliary encoders; the checkpoint was trained in the fixed-modal scenario "
                          "(use protocol P4 or zero-pad filling)");
    }
}

}  // namespace

std::string_view protocol_name(TestProtocol p)
{
    switch (p) {
    case TestProtocol::P1Rgb:
        return "P1";
    case TestProtocol::P2RgbD:
        return "P2";
    case TestProtocol::P3RgbIr:
        return "P3";
    case TestProtocol::P4RgbDIr:
        return "P4";
    }
    return "?";
}

std::optional<TestProtocol> parse_protocol(std::string_view name)
{
    const std::string u = upper(name);
    static constexpr std::array<std::string_view, 4> kLong{"P1_RGB", "P2_RGB_D", "P3_RGB_IR", "P4_RGB_D_IR"};
    for (std::size_t i = 0; i < kProtocols.size(); ++i) {
        if (u == protocol_name(kProtocols[i]) || u == kLong[i]) {
            return kProtocols[i];
        }
    }
    return std::nullopt;
}

bool protocol_has(TestProtocol p, ModalityId m)
{
    switch (m) {
    case ModalityId::Rgb:
        return true;
    case ModalityId::Ir:
        return p == TestProtocol::P3RgbIr || p == TestProtocol::P4RgbDIr;
    case ModalityId::Depth:
        return p == TestProtocol::P2RgbD || p == TestProtocol::P4RgbDIr;
    }
    return false;
}

bool protocol_needs_auxiliary(TestProtocol p) { return p != TestProtocol::P4RgbDIr; }

std::string_view missing_fill_name(MissingFill f)
{
    return f == MissingFill::Auxiliary ? "auxiliary" : "zero_pad";
}

std::optional<MissingFill> parse_missing_fill(std::string_view name)
{
    if (name == "auxiliary") {
        return MissingFill::Auxiliary;
    }
    if (name == "zero_pad") {
        return MissingFill::ZeroPad;
    }
    return std::nullopt;
}

std::array<FeatureVector, kNumModalities> assemble_test_features(const ModelParams& params,
                                                                 const MultiModalSample& sample,
                                                                 TestProtocol protocol, MissingFill fill)
{
    const MultiModalSample* one[] = {&sample};
    const FeatureBatch batch = assemble_test_features(params, one, protocol, fill, 1);
    std::array<FeatureVector, kNumModalities> out;
    for (auto m : kModalities) {
        const bool aux = !protocol_has(protocol, m) && fill == MissingFill::Auxiliary;
        out[index_of(m)] = FeatureVector{batch[m].col(0), m, aux};
    }
    return out;
}

FeatureBatch assemble_test_features(const ModelParams& params, std::span<const MultiModalSample* const> samples,
                                    TestProtocol protocol, MissingFill fill, std::size_t chunk)
{
    check_protocol(params, protocol, fill);
    const auto n = static_cast<Eigen::Index>(samples.size());
    FeatureBatch out = FeatureBatch::zeros(params.feature_dim(), n);
    chunk = std::max<std::size_t>(chunk, 1);
    std::vector<const Tensor*> tensors;
    for (std::size_t begin = 0; begin < samples.size(); begin += chunk) {
        const std::size_t end = std::min(samples.size(), begin + chunk);
        const int count = static_cast<int>(end - begin);
        tensors.resize(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            tensors[i - begin] = &samples[i]->tensor(ModalityId::Rgb);
        }
        const ImageBatch rgb = pack_images(tensors);
        for (auto m : kModalities) {
            Matrix f;
            if (m == ModalityId::Rgb) {
                f = encoder_forward(params, EncoderSlot::Rgb, rgb);
            } else if (protocol_has(protocol, m)) {
                for (std::size_t i = begin; i < end; ++i) {
                    tensors[i - begin] = &samples[i]->tensor(m);
                }
                f = encoder_forward(params, slot_for(m), pack_images(tensors));
            } else if (fill == MissingFill::Auxiliary) {
                f = encoder_forward(params, auxiliary_slot(m), rgb);
            } else {
                const auto zeros = zero_images(count, modality_channels(m), rgb.height, rgb.width);
                f = encoder_forward(params, slot_for(m), zeros);
            }
            out[m].middleCols(static_cast<Eigen::Index>(begin), count) = f;
        }
    }
    return out;
}

double score_distance(const ModalityFeatures& features, const PrototypeStore& store)
{
    store.require_initialized();
    double s = 0.0;
    for (auto m : kModalities) {
        s += 1.0 - cosine_similarity(store[m], features[index_of(m)]);
    }
    return s;
}

double score_transition(const ModalityFeatures& features, const PrototypeStore& store)
{
    const auto proto = prototype_transitions(store);
    double s = 0.0;
    for (std::size_t k = 0; k < kTransitionPairs.size(); ++k) {
        s += 1.0 - pearson(proto[k], transition(features, kTransitionPairs[k]));
    }
    return s;
}

double score_ood(double sc_d, double sc_t, double lambda3)
{
    if (!(lambda3 >= 0.0 && lambda3 <= 1.0)) {
        throw ArgumentError("lambda3 must lie in [0, 1], got " + std::to_string(lambda3));
    }
    if (lambda3 == 0.0) {
        return sc_t;
    }
    if (lambda3 == 1.0) {
        return sc_d;
    }
    return (1.0 - lambda3) * sc_t + lambda3 * sc_d;
}

ScoreTriple score_sample(const ModalityFeatures& features, const PrototypeStore& store, double lambda3)
{
    ScoreTriple t;
    t.sc_d = score_distance(features, store);
    t.sc_t = score_transition(features, store);
    t.sc_ood = score_ood(t.sc_d, t.sc_t, lambda3);
    t.lambda3 = lambda3;
    return t;
}

std::vector<ScoreTriple> score_batch(const FeatureBatch& features, const PrototypeStore& store, double lambda3)
{
    std::vector<ScoreTriple> out;
    out.reserve(static_cast<std::size_t>(features.size()));
    for (Eigen::Index j = 0; j < features.size(); ++j) {
        out.push_back(score_sample(features.sample(j), store, lambda3));
    }
    return out;
}

double youden_index(std::span<const double> scores, std::span<const Label> labels, double threshold)
{
    if (scores.size() != labels.size()) {
        throw ArgumentError("youden_index: scores and labels differ in length");
    }
    std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool spoof = labels[i] == Label::Spoof;
        const bool flagged = scores[i] >= threshold;
        pos += spoof ? 1 : 0;
        neg += spoof ? 0 : 1;
        tp += (spoof && flagged) ? 1 : 0;
        tn += (!spoof && !flagged) ? 1 : 0;
    }
    if (pos == 0 || neg == 0) {
        throw ArgumentError("youden_index: both classes must be present");
    }
    return static_cast<double>(tp) / static_cast<double>(pos) + static_cast<double>(tn) / static_cast<double>(neg) -
           1.0;
}

std::vector<double> threshold_candidates(std::span<const double> scores)
{
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> out;
    if (sorted.empty()) {
        return out;
    }
    out.reserve(sorted.size() + 1);
    out.push_back(sorted.front() - 1.0);
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double mid = std::midpoint(sorted[i - 1], sorted[i]);
        // Adjacent doubles: the midpoint rounds onto the lower score.
        if (mid <= sorted[i - 1]) {
            mid = sorted[i];
        }
        out.push_back(mid);
    }
    out.push_back(sorted.back() + 1.0);
    return out;
}

ThresholdFit youden_threshold(std::span<const double> scores, std::span<const Label> labels)
{
    if (scores.size() != labels.size()) {
        throw ArgumentError("youden_threshold: scores and labels differ in length");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw ArgumentError("youden_threshold: non-finite score");
        }
        pos += labels[i] == Label::Spoof ? 1 : 0;
    }
    const std::size_t neg = scores.size() - pos;
    if (pos == 0 || neg == 0) {
        throw ArgumentError("youden_threshold: both live and spoof scores are required");
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    const auto candidates = threshold_candidates(scores);

    // Candidate k sits just above the k-th distinct score group: every sample
    // in groups 0..k-1 is called live.
    ThresholdFit best;
    bool have = false;
    std::size_t live_below = 0, spoof_below = 0, cursor = 0;
    for (double t : candidates) {
        while (cursor < order.size() && scores[order[cursor]] < t) {
            (labels[order[cursor]] == Label::Spoof ? spoof_below : live_below) += 1;
            ++cursor;
        }
        const double j = static_cast<double>(pos - spoof_below) / static_cast<double>(pos) +
                         static_cast<double>(live_below) / static_cast<double>(neg) - 1.0;
        if (!have || j > best.j) {
            best = {t, j};
            have = true;
        }
    }
    return best;
}

Label classify_ood(double score, double threshold) { return score >= threshold ? Label::Spoof : Label::Live; }

DiagnosticVotes diagnostic_votes(const ModalityFeatures& features, const PrototypeStore& store, double alpha,
                                 double beta)
{
    store.require_initialized();
    double cos_sum = 0.0;
    for (auto m : kModalities) {
        cos_sum += cosine_similarity(store[m], features[index_of(m)]);
    }
    const auto proto = prototype_transitions(store);
    double pearson_sum = 0.0;
    for (std::size_t k = 0; k < kTransitionPairs.size(); ++k) {
        pearson_sum += pearson(proto[k], transition(features, kTransitionPairs[k]));
    }
    return {cos_sum >= alpha, pearson_sum >= beta};
}

}  // namespace ctnet

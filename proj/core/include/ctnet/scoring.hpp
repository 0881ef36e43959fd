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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ctnet/data.hpp"
#include "ctnet/encoders.hpp"
#include "ctnet/prototypes.hpp"

namespace ctnet {

inline constexpr double kDefaultLambda3 = 0.5;

/// Real modalities available at test time. Missing ones are replaced by
/// auxiliary features.
enum class TestProtocol { P1Rgb, P2RgbD, P3RgbIr, P4RgbDIr };

inline constexpr std::array<TestProtocol, 4> kProtocols{TestProtocol::P1Rgb, TestProtocol::P2RgbD,
                                                        TestProtocol::P3RgbIr, TestProtocol::P4RgbDIr};

/// "P1" .. "P4".
std::string_view protocol_name(TestProtocol p);
/// Accepts "P1" .. "P4" and the long forms "P1_RGB", "P2_RGB_D", "P3_RGB_IR",
/// "P4_RGB_D_IR", case-insensitively.
std::optional<TestProtocol> parse_protocol(std::string_view name);

bool protocol_has(TestProtocol p, ModalityId m);
bool protocol_needs_auxiliary(TestProtocol p);

/// How a missing modality is filled in: the auxiliary encoder fed the RGB
/// tensor, or the real encoder fed an all-zero tensor (baseline ablation row).
enum class MissingFill { Auxiliary, ZeroPad };

std::string_view missing_fill_name(MissingFill f);
std::optional<MissingFill> parse_missing_fill(std::string_view name);

/// Feature triple of one sample under a protocol. Throws ConfigError when the
/// protocol needs auxiliary encoders the model does not have.
std::array<FeatureVector, kNumModalities> assemble_test_features(const ModelParams& params,
                                                                 const MultiModalSample& sample,
                                                                 TestProtocol protocol,
                                                                 MissingFill fill = MissingFill::Auxiliary);

/// Batched form: one d x n matrix per modality, encoded `chunk` samples at a
/// time.
FeatureBatch assemble_test_features(const ModelParams& params, std::span<const MultiModalSample* const> samples,
                                    TestProtocol protocol, MissingFill fill = MissingFill::Auxiliary,
                                    std::size_t chunk = 64);

/// Sum over modalities of 1 - cos(prototype, feature). In [0, 6].
double score_distance(const ModalityFeatures& features, const PrototypeStore& store);

/// Sum over canonical pairs of 1 - Pearson(prototype transition, sample
/// transition). In [0, 6].
double score_transition(const ModalityFeatures& features, const PrototypeStore& store);

/// (1 - lambda3) * sc_t + lambda3 * sc_d. Throws ArgumentError unless
/// lambda3 is in [0, 1].
double score_ood(double sc_d, double sc_t, double lambda3);

struct ScoreTriple {
    double sc_d = 0.0;
    double sc_t = 0.0;
    double sc_ood = 0.0;
    double lambda3 = kDefaultLambda3;
};

ScoreTriple score_sample(const ModalityFeatures& features, const PrototypeStore& store,
                         double lambda3 = kDefaultLambda3);

/// Scores of every column of a feature batch.
std::vector<ScoreTriple> score_batch(const FeatureBatch& features, const PrototypeStore& store,
                                     double lambda3 = kDefaultLambda3);

struct ThresholdFit {
    double threshold = 0.0;
    double j = 0.0;  ///< Youden index at the threshold
};

/// Youden index of the rule "SPOOF iff score >= threshold", spoof positive.
double youden_index(std::span<const double> scores, std::span<const Label> labels, double threshold);

/// Candidate thresholds: one below the minimum, the midpoints between
/// consecutive distinct scores, one above the maximum (ascending).
std::vector<double> threshold_candidates(std::span<const double> scores);

/// Candidate with the largest Youden index, smallest on ties. Throws
/// ArgumentError on single-class, empty or non-finite input.
ThresholdFit youden_threshold(std::span<const double> scores, std::span<const Label> labels);

/// SPOOF iff score >= threshold.
Label classify_ood(double score, double threshold);

struct DiagnosticVotes {
    bool distance = false;    ///< sum of prototype cosines >= alpha
    bool transition = false;  ///< sum of transition Pearsons >= beta
};

DiagnosticVotes diagnostic_votes(const ModalityFeatures& features, const PrototypeStore& store, double alpha,
                                 double beta);

}  // namespace ctnet

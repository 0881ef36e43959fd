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
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctnet/data.hpp"
#include "ctnet/encoders.hpp"
#include "ctnet/prototypes.hpp"
#include "ctnet/scoring.hpp"

namespace ctnet {

inline constexpr std::size_t kHistogramBins = 50;

/// Uniform bins over [-1, 1]; the last bin is closed on the right.
struct Histogram {
    std::string name;
    std::vector<std::size_t> counts;
    std::size_t total = 0;
    std::optional<double> mean;  ///< empty when no value was binned

    bool empty() const { return total == 0; }
    double bin_left(std::size_t k) const;
    double bin_right(std::size_t k) const;
};

/// Values outside [-1, 1] are clamped into the edge bins.
Histogram make_histogram(std::string name, std::span<const double> values, std::size_t bins = kHistogramBins);

/// Feature-similarity statistics of a dataset under a model: within-class
/// cosine similarity per modality and each sample's transition correlation
/// with the prototype transitions, by class.
struct CorrelationReport {
    std::vector<Histogram> histograms;
    std::array<std::optional<double>, kNumModalities> live_cosine_mean;
    std::array<std::optional<double>, kNumModalities> spoof_cosine_mean;
    std::array<std::optional<double>, 3> live_transition_mean;   ///< vs prototype, per canonical pair
    std::array<std::optional<double>, 3> spoof_transition_mean;  ///< vs prototype, per canonical pair
    /// Mean leave-self-out transition correlation within each class.
    std::array<std::optional<double>, 3> live_average_transition;
    std::array<std::optional<double>, 3> spoof_average_transition;
    bool live_empty = false;
    bool spoof_empty = false;

    const Histogram* find(const std::string& name) const;
};

/// Upper-triangle cosine similarities between the columns of a d x n matrix.
std::vector<double> pairwise_cosines(const Matrix& features);

CorrelationReport correlation_report(const Dataset& dataset, const ModelParams& params, const PrototypeStore& store,
                                     TestProtocol protocol = TestProtocol::P4RgbDIr,
                                     MissingFill fill = MissingFill::Auxiliary);

/// Same statistics from precomputed features (columns aligned with `labels`).
CorrelationReport correlation_report(const FeatureBatch& features, std::span<const Label> labels,
                                     const PrototypeStore& store);

/// "histogram_name,bin_left,bin_right,count" rows.
std::string report_csv(const CorrelationReport& report);
nlohmann::json report_summary(const CorrelationReport& report);

}  // namespace ctnet

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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctnet/modality.hpp"
#include "ctnet/scoring.hpp"

namespace ctnet {

/// Decision counts with LIVE as the positive class: fp is a spoof accepted as
/// live, fn a live sample rejected.
struct Confusion {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Throws ArgumentError on empty input or a length mismatch.
Confusion confusion(std::span<const Label> labels, std::span<const Label> decisions);

struct ErrorRates {
    double apcer = 0.0;
    double bpcer = 0.0;
    double acer = 0.0;
};

/// APCER = FP/(FP+TN), BPCER = FN/(FN+TP), ACER = their mean. Throws
/// MetricUndefinedError when a class is absent.
ErrorRates apcer_bpcer_acer(const Confusion& c);

/// Probability that a spoof outscores a live sample, ties counting one half.
/// Throws MetricUndefinedError when a class is absent.
double auc(std::span<const double> scores, std::span<const Label> labels);

struct EvalReport {
    TestProtocol protocol = TestProtocol::P4RgbDIr;
    double apcer = 0.0;
    double bpcer = 0.0;
    double acer = 0.0;
    double auc = 0.0;
    double threshold = 0.0;
    double lambda3 = kDefaultLambda3;
    std::string threshold_source;  ///< "validation", "refit" or "test"
    std::string missing_fill;
    std::size_t n_live = 0;
    std::size_t n_spoof = 0;
    std::vector<double> live_scores;
    std::vector<double> spoof_scores;
};

/// Decisions by `classify_ood`, then the four metrics.
EvalReport make_report(TestProtocol protocol, std::span<const double> scores, std::span<const Label> labels,
                       double threshold, double lambda3);

void to_json(nlohmann::json& j, const EvalReport& r);

/// "protocol,apcer,bpcer,acer,auc,threshold,n_live,n_spoof"
std::string report_csv_header();
std::string report_csv_row(const EvalReport& r);

}  // namespace ctnet

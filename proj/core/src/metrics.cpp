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

#include "ctnet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "ctnet/error.hpp"

namespace ctnet {

Confusion confusion(std::span<const Label> labels, std::span<const Label> decisions)
{
    if (labels.size() != decisions.size()) {
        throw ArgumentError("confusion: " + std::to_string(labels.size()) + " labels but " +
                            std::to_string(decisions.size()) + " decisions");
    }
    if (labels.empty()) {
        throw ArgumentError("confusion: no samples");
    }
    Confusion c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool live = labels[i] == Label::Live;
        const bool accepted = decisions[i] == Label::Live;
        if (live) {
            (accepted ? c.tp : c.fn) += 1;
        } else {
            (accepted ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

ErrorRates apcer_bpcer_acer(const Confusion& c)
{
    if (c.fp + c.tn == 0) {
        throw MetricUndefinedError("APCER is undefined: no spoof samples");
    }
    if (c.fn + c.tp == 0) {
        throw MetricUndefinedError("BPCER is undefined: no live samples");
    }
    ErrorRates r;
    r.apcer = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
    r.bpcer = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
    r.acer = (r.apcer + r.bpcer) / 2.0;
    return r;
}

double auc(std::span<const double> scores, std::span<const Label> labels)
{
    if (scores.size() != labels.size()) {
        throw ArgumentError("auc: scores and labels differ in length");
    }
    std::vector<double> live;
    std::vector<double> spoof;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        (labels[i] == Label::Live ? live : spoof).push_back(scores[i]);
    }
    if (live.empty()) {
        throw MetricUndefinedError("AUC is undefined: no live samples");
    }
    if (spoof.empty()) {
        throw MetricUndefinedError("AUC is undefined: no spoof samples");
    }
    std::sort(live.begin(), live.end());
    // Count in half-wins so the sum stays an exact integer.
    std::uint64_t half_wins = 0;
    for (double s : spoof) {
        const auto lo = std::lower_bound(live.begin(), live.end(), s);
        const auto hi = std::upper_bound(lo, live.end(), s);
        half_wins += 2 * static_cast<std::uint64_t>(lo - live.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    return static_cast<double>(half_wins) * 0.5 /
           (static_cast<double>(live.size()) * static_cast<double>(spoof.size()));
}

EvalReport make_report(TestProtocol protocol, std::span<const double> scores, std::span<const Label> labels,
                       double threshold, double lambda3)
{
    std::vector<Label> decisions(scores.size());
    std::transform(scores.begin(), scores.end(), decisions.begin(),
                   [threshold](double s) { return classify_ood(s, threshold); });
    const auto rates = apcer_bpcer_acer(confusion(labels, decisions));
    EvalReport r;
    r.protocol = protocol;
    r.apcer = rates.apcer;
    r.bpcer = rates.bpcer;
    r.acer = rates.acer;
    r.auc = auc(scores, labels);
    r.threshold = threshold;
    r.lambda3 = lambda3;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        (labels[i] == Label::Live ? r.live_scores : r.spoof_scores).push_back(scores[i]);
    }
    r.n_live = r.live_scores.size();
    r.n_spoof = r.spoof_scores.size();
    return r;
}

void to_json(nlohmann::json& j, const EvalReport& r)
{
    j = nlohmann::json{{"protocol", protocol_name(r.protocol)},
                       {"apcer", r.apcer},
                       {"bpcer", r.bpcer},
                       {"acer", r.acer},
                       {"auc", r.auc},
                       {"threshold", r.threshold},
                       {"threshold_source", r.threshold_source},
                       {"missing_fill", r.missing_fill},
                       {"lambda3", r.lambda3},
                       {"n_live", r.n_live},
                       {"n_spoof", r.n_spoof},
                       {"scores", {{"live", r.live_scores}, {"spoof", r.spoof_scores}}}};
}

std::string report_csv_header() { return "protocol,apcer,bpcer,acer,auc,threshold,n_live,n_spoof"; }

std::string report_csv_row(const EvalReport& r)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu", std::string(protocol_name(r.protocol)).c_str(),
                  r.apcer, r.bpcer, r.acer, r.auc, r.threshold, r.n_live, r.n_spoof);
    return buf;
}

}  // namespace ctnet

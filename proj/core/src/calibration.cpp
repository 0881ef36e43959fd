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

#include <algorithm>
#include <cmath>

#include "ctnet/error.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/trainer.hpp"

namespace ctnet {

SplitIndices validation_split(std::span<const Label> labels, double fraction, std::uint64_t seed)
{
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ArgumentError("validation fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> live;
    std::vector<std::size_t> spoof;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == Label::Live ? live : spoof).push_back(i);
    }
    Rng rng(seed);
    rng.shuffle(live);
    rng.shuffle(spoof);

    SplitIndices out;
    for (auto* cls : {&live, &spoof}) {
        const std::size_t n = cls->size();
        std::size_t n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
        // Keep at least one sample of a class on each side when possible.
        if (n >= 2) {
            n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
        } else {
            n_val = 0;
        }
        out.validation.insert(out.validation.end(), cls->begin(), cls->begin() + static_cast<std::ptrdiff_t>(n_val));
        out.train.insert(out.train.end(), cls->begin() + static_cast<std::ptrdiff_t>(n_val), cls->end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

std::vector<CalibrationEntry> calibrate(const ModelParams& params, const PrototypeStore& store,
                                        std::span<const MultiModalSample* const> samples, Scenario scenario,
                                        double lambda3)
{
    std::vector<Label> labels;
    labels.reserve(samples.size());
    for (const auto* s : samples) {
        labels.push_back(s->label);
    }
    const bool both = std::count(labels.begin(), labels.end(), Label::Live) > 0 &&
                      std::count(labels.begin(), labels.end(), Label::Spoof) > 0;
    if (!both || !store.initialized) {
        return {};
    }
    const MissingFill fill = scenario == Scenario::MissingModal ? MissingFill::Auxiliary : MissingFill::ZeroPad;
    std::vector<CalibrationEntry> out;
    for (auto protocol : kProtocols) {
        CalibrationEntry e;
        e.protocol = protocol;
        e.fill = protocol == TestProtocol::P4RgbDIr ? MissingFill::Auxiliary : fill;
        e.lambda3 = lambda3;
        e.labels = labels;
        const FeatureBatch features = assemble_test_features(params, samples, protocol, e.fill);
        std::vector<double> ood;
        for (const auto& t : score_batch(features, store, lambda3)) {
            e.sc_d.push_back(t.sc_d);
            e.sc_t.push_back(t.sc_t);
            ood.push_back(t.sc_ood);
        }
        const auto fit = youden_threshold(ood, labels);
        e.threshold = fit.threshold;
        e.youden_j = fit.j;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace ctnet

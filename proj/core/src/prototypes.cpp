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

#include "ctnet/prototypes.hpp"

#include <cmath>

#include "ctnet/error.hpp"
#include "ctnet/transitions.hpp"

namespace ctnet {

void PrototypeStore::require_initialized() const
{
    if (!initialized) {
        throw StateError("prototype store is not initialized");
    }
}

std::optional<ModalityFeatures> batch_live_mean(const FeatureBatch& live)
{
    if (live.size() == 0) {
        return std::nullopt;
    }
    ModalityFeatures mean;
    for (auto m : kModalities) {
        mean[index_of(m)] = live[m].rowwise().mean();
    }
    return mean;
}

PrototypeStore ema_update(const PrototypeStore& store, const ModalityFeatures& current, double gamma)
{
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ArgumentError("ema_update: gamma must lie in (0, 1]");
    }
    for (const auto& v : current) {
        if (!v.allFinite()) {
            throw ArgumentError("ema_update: current means must be finite");
        }
    }
    PrototypeStore next = store;
    next.gamma = gamma;
    if (!store.initialized) {
        next.prototypes = current;
        next.initialized = true;
        return next;
    }
    for (std::size_t m = 0; m < kNumModalities; ++m) {
        if (current[m].size() != store.prototypes[m].size()) {
            throw ArgumentError("ema_update: feature dimension changed");
        }
        if (gamma == 1.0) {
            next.prototypes[m] = current[m];
            continue;
        }
        // p + gamma * (c - p) keeps c == p a fixed point; the clamp removes
        // rounding excursions outside the segment [p, c].
        const Vector& pre = store.prototypes[m];
        const Vector& cur = current[m];
        Vector blended = pre + gamma * (cur - pre);
        next.prototypes[m] = blended.cwiseMax(pre.cwiseMin(cur)).cwiseMin(pre.cwiseMax(cur));
    }
    return next;
}

std::array<Vector, 3> prototype_transitions(const PrototypeStore& store)
{
    store.require_initialized();
    std::array<Vector, 3> out;
    for (std::size_t p = 0; p < kTransitionPairs.size(); ++p) {
        out[p] = transition(store.prototypes, kTransitionPairs[p]);
    }
    return out;
}

}  // namespace ctnet

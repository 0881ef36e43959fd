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

#include "ctnet/features.hpp"

namespace ctnet {

inline constexpr double kDefaultGamma = 0.1;

/// Live modality prototypes maintained by exponential moving average. The
/// store is a constant as far as gradients are concerned.
struct PrototypeStore {
    ModalityFeatures prototypes;
    bool initialized = false;
    double gamma = kDefaultGamma;

    const Vector& operator[](ModalityId m) const { return prototypes[index_of(m)]; }

    /// Throws StateError unless initialized.
    void require_initialized() const;
};

/// Per-modality mean of the live features of a batch; std::nullopt when the
/// batch holds no live sample (the caller skips the update).
std::optional<ModalityFeatures> batch_live_mean(const FeatureBatch& live);

/// First update adopts `current` verbatim; later ones blend with weight gamma.
/// Throws ArgumentError unless 0 < gamma <= 1.
PrototypeStore ema_update(const PrototypeStore& store, const ModalityFeatures& current, double gamma);

/// Prototype transition vector for each canonical pair, in kTransitionPairs order.
std::array<Vector, 3> prototype_transitions(const PrototypeStore& store);

}  // namespace ctnet

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
#include <string>
#include <string_view>

namespace ctnet {

/// The three sensing channels, in canonical iteration order.
enum class ModalityId : int { Rgb = 0, Ir = 1, Depth = 2 };

inline constexpr std::array<ModalityId, 3> kModalities{ModalityId::Rgb, ModalityId::Ir,
                                                        ModalityId::Depth};
inline constexpr std::size_t kNumModalities = kModalities.size();

constexpr std::size_t index_of(ModalityId m) { return static_cast<std::size_t>(m); }

/// Lower-case tag used in manifests and parameter names ("rgb", "ir", "depth").
std::string_view modality_name(ModalityId m);
std::optional<ModalityId> parse_modality(std::string_view name);

/// Number of tensor channels stored for a modality (RGB 3, IR 1, DEPTH 1).
constexpr int modality_channels(ModalityId m) { return m == ModalityId::Rgb ? 3 : 1; }

enum class Label : int { Live = 0, Spoof = 1 };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

enum class AttackType : int { Print = 0, Replay = 1, Mask = 2 };

inline constexpr std::array<AttackType, 3> kAttackTypes{AttackType::Print, AttackType::Replay,
                                                         AttackType::Mask};

std::string_view attack_name(AttackType attack);
std::optional<AttackType> parse_attack(std::string_view name);

/// Directional transition between two modalities, target minus source.
struct TransitionPair {
    ModalityId source;
    ModalityId target;

    friend constexpr bool operator==(TransitionPair, TransitionPair) = default;
};

/// RGB->IR, RGB->DEPTH, IR->DEPTH, in that order.
inline constexpr std::array<TransitionPair, 3> kTransitionPairs{
    TransitionPair{ModalityId::Rgb, ModalityId::Ir},
    TransitionPair{ModalityId::Rgb, ModalityId::Depth},
    TransitionPair{ModalityId::Ir, ModalityId::Depth},
};

/// "rgb_ir", "rgb_depth", "ir_depth".
std::string transition_name(TransitionPair pair);

}  // namespace ctnet

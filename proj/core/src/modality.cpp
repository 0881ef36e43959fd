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

#include "ctnet/modality.hpp"

namespace ctnet {

std::string_view modality_name(ModalityId m)
{
    switch (m) {
    case ModalityId::Rgb:
        return "rgb";
    case ModalityId::Ir:
        return "ir";
    case ModalityId::Depth:
        return "depth";
    }
    return "?";
}

std::optional<ModalityId> parse_modality(std::string_view name)
{
    for (auto m : kModalities) {
        if (modality_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

std::string_view label_name(Label label)
{
    return label == Label::Live ? "live" : "spoof";
}

std::optional<Label> parse_label(std::string_view name)
{
    if (name == "live") {
        return Label::Live;
    }
    if (name == "spoof") {
        return Label::Spoof;
    }
    return std::nullopt;
}

std::string_view attack_name(AttackType attack)
{
    switch (attack) {
    case AttackType::Print:
        return "print";
    case AttackType::Replay:
        return "replay";
    case AttackType::Mask:
        return "mask";
    }
    return "?";
}

std::optional<AttackType> parse_attack(std::string_view name)
{
    for (auto a : kAttackTypes) {
        if (attack_name(a) == name) {
            return a;
        }
    }
    return std::nullopt;
}

std::string transition_name(TransitionPair pair)
{
    return std::string(modality_name(pair.source)) + "_" + std::string(modality_name(pair.target));
}

}  // namespace ctnet

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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctnet/modality.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/tensor.hpp"

namespace ctnet {

/// One face presentation captured in all three modalities.
struct MultiModalSample {
    std::string id;
    Label label = Label::Live;
    std::optional<AttackType> attack;  ///< set iff label == Spoof
    std::string domain;
    std::array<Tensor, kNumModalities> tensors;  ///< indexed by ModalityId

    const Tensor& tensor(ModalityId m) const { return tensors[index_of(m)]; }

    friend bool operator==(const MultiModalSample&, const MultiModalSample&) = default;
};

struct Dataset {
    std::vector<MultiModalSample> samples;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string split;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::size_t count(Label label) const;
    std::vector<Label> labels() const;

    /// Throws IntegrityError when ids repeat, label/attack disagree, tensor
    /// shapes are inconsistent, or an entry is not finite.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitCounts {
    int n_live = 0;
    int n_spoof = 0;
};

/// Synthetic generator knobs. Shapes of the modality maps depend on
/// latent_dim and image_side only; the maps themselves are fixed and shared by
/// every dataset regardless of `seed`.
struct GeneratorConfig {
    int latent_dim = 16;
    int image_side = 32;
    std::map<std::string, SplitCounts> splits{{"train", {1000, 1000}}, {"test", {250, 250}}};
    std::array<double, 3> attack_mix{0.4, 0.3, 0.3};  ///< print, replay, mask
    double domain_shift_scale = 0.1;
    std::vector<std::string> domains{"d0"};
    double noise_std = 0.05;
    std::uint64_t seed = 42;

    /// Throws ConfigError.
    void validate() const;
    /// Hex FNV-1a of the canonical JSON form.
    std::string hash() const;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
/// Strict: unknown keys are a ConfigError.
void from_json(const nlohmann::json& j, GeneratorConfig& c);

/// Deterministic in (config, split, sample index). Live samples come first.
Dataset generate_synthetic_dataset(const GeneratorConfig& config, const std::string& split);

/// Generates a single sample; `generate_synthetic_dataset` is a loop over this.
MultiModalSample generate_sample(const GeneratorConfig& config, const std::string& split, std::size_t index);

void write_dataset(const Dataset& dataset, const std::filesystem::path& directory);
Dataset read_dataset(const std::filesystem::path& directory);

/// Indices into a dataset (or into a label list).
struct Batch {
    std::vector<std::size_t> indices;
};

/// Draws one stratified batch without replacement: at least two live and one
/// spoof sample whenever the labels contain them.
Batch sample_batch(std::span<const Label> labels, std::size_t batch_size, Rng& rng);
Batch sample_batch(const Dataset& dataset, std::size_t batch_size, Rng& rng);

/// Stratified epoch iterator. Every epoch is a fresh shuffle of each class; a
/// class is only revisited inside an epoch when stratification demands more of
/// it than the epoch holds.
class EpochSampler {
public:
    EpochSampler(std::vector<Label> labels, std::size_t batch_size, std::uint64_t seed);

    std::vector<Batch> next_epoch();
    std::size_t batches_per_epoch() const;

private:
    std::vector<Label> labels_;
    std::size_t batch_size_;
    Rng rng_;
    std::vector<std::size_t> live_;
    std::vector<std::size_t> spoof_;
};

}  // namespace ctnet

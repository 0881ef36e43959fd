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

#include "ctnet/data.hpp"
#include "ctnet/error.hpp"

namespace ctnet {
namespace {

struct Split {
    std::size_t live = 0;
    std::size_t spoof = 0;
};

// Live share proportional to the class ratio, clamped so a batch holds at
// least two live and one spoof sample whenever the classes can supply them.
Split batch_split(std::size_t batch_size, std::size_t n_live, std::size_t n_spoof)
{
    const std::size_t total = n_live + n_spoof;
    auto live = static_cast<std::size_t>(
        std::llround(static_cast<double>(batch_size) * static_cast<double>(n_live) / static_cast<double>(total)));
    const std::size_t min_live = std::min<std::size_t>(2, n_live);
    const std::size_t min_spoof = std::min<std::size_t>(1, n_spoof);
    live = std::clamp(live, min_live, batch_size - min_spoof);
    live = std::min(live, n_live);
    std::size_t spoof = std::min(batch_size - live, n_spoof);
    live = std::min(batch_size - spoof, n_live);
    return {live, spoof};
}

}  // namespace

Batch sample_batch(std::span<const Label> labels, std::size_t batch_size, Rng& rng)
{
    if (labels.empty()) {
        throw ArgumentError("sample_batch: dataset is empty");
    }
    if (batch_size < 2) {
        throw ArgumentError("sample_batch: batch_size must be >= 2");
    }
    if (batch_size > labels.size()) {
        throw ArgumentError("sample_batch: batch_size exceeds dataset size");
    }
    std::vector<std::size_t> live;
    std::vector<std::size_t> spoof;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == Label::Live ? live : spoof).push_back(i);
    }
    const Split split = batch_split(batch_size, live.size(), spoof.size());
    rng.shuffle(live);
    rng.shuffle(spoof);
    Batch b;
    b.indices.assign(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(split.live));
    b.indices.insert(b.indices.end(), spoof.begin(), spoof.begin() + static_cast<std::ptrdiff_t>(split.spoof));
    return b;
}

Batch sample_batch(const Dataset& dataset, std::size_t batch_size, Rng& rng)
{
    const auto labels = dataset.labels();
    return sample_batch(labels, batch_size, rng);
}

EpochSampler::EpochSampler(std::vector<Label> labels, std::size_t batch_size, std::uint64_t seed)
    : labels_(std::move(labels)), batch_size_(batch_size), rng_(seed)
{
    if (labels_.empty()) {
        throw ArgumentError("EpochSampler: dataset is empty");
    }
    if (batch_size_ < 2) {
        throw ArgumentError("EpochSampler: batch_size must be >= 2");
    }
    if (batch_size_ > labels_.size()) {
        throw ArgumentError("EpochSampler: batch_size exceeds dataset size");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        (labels_[i] == Label::Live ? live_ : spoof_).push_back(i);
    }
}

std::size_t EpochSampler::batches_per_epoch() const
{
    return std::max<std::size_t>(1, labels_.size() / batch_size_);
}

std::vector<Batch> EpochSampler::next_epoch()
{
    const Split split = batch_split(batch_size_, live_.size(), spoof_.size());
    auto live = live_;
    auto spoof = spoof_;
    rng_.shuffle(live);
    rng_.shuffle(spoof);
    std::size_t live_pos = 0;
    std::size_t spoof_pos = 0;

    auto take = [this](std::vector<std::size_t>& pool, std::size_t& pos, std::size_t count, Batch& b) {
        for (std::size_t i = 0; i < count; ++i) {
            if (pos == pool.size()) {
                rng_.shuffle(pool);
                pos = 0;
            }
            b.indices.push_back(pool[pos++]);
        }
    };

    std::vector<Batch> batches(batches_per_epoch());
    for (auto& b : batches) {
        b.indices.reserve(batch_size_);
        take(live, live_pos, split.live, b);
        take(spoof, spoof_pos, split.spoof, b);
    }
    return batches;
}

}  // namespace ctnet

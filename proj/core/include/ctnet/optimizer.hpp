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

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctnet/encoders.hpp"

namespace ctnet {

/// Adam with decoupled weight decay.
struct AdamWConfig {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;

    /// Throws ConfigError.
    void validate() const;

    friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

void to_json(nlohmann::json& j, const AdamWConfig& c);
void from_json(const nlohmann::json& j, AdamWConfig& c);

class AdamW {
public:
    AdamW(AdamWConfig config, const ModelParams& params);

    /// One update of every parameter from `grads` (aligned with
    /// params.parameters()).
    void step(ModelParams& params, const ParamGrads& grads);

    std::uint64_t step_count() const { return t_; }
    const AdamWConfig& config() const { return config_; }

private:
    AdamWConfig config_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    std::uint64_t t_ = 0;
};

}  // namespace ctnet

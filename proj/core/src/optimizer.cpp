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

#include "ctnet/optimizer.hpp"

#include <cmath>

#include "ctnet/error.hpp"
#include "json_util.hpp"

namespace ctnet {

void AdamWConfig::validate() const
{
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("optimizer.learning_rate must be > 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("optimizer.beta1 and optimizer.beta2 must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("optimizer.epsilon must be > 0");
    }
    if (!(weight_decay >= 0.0)) {
        throw ConfigError("optimizer.weight_decay must be >= 0");
    }
}

void to_json(nlohmann::json& j, const AdamWConfig& c)
{
    j = nlohmann::json{{"learning_rate", c.learning_rate},
                       {"beta1", c.beta1},
                       {"beta2", c.beta2},
                       {"epsilon", c.epsilon},
                       {"weight_decay", c.weight_decay}};
}

void from_json(const nlohmann::json& j, AdamWConfig& c)
{
    const std::string where = "optimizer";
    detail::reject_unknown(j, {"learning_rate", "beta1", "beta2", "epsilon", "weight_decay"}, where);
    detail::read_opt(j, "learning_rate", c.learning_rate, where);
    detail::read_opt(j, "beta1", c.beta1, where);
    detail::read_opt(j, "beta2", c.beta2, where);
    detail::read_opt(j, "epsilon", c.epsilon, where);
    detail::read_opt(j, "weight_decay", c.weight_decay, where);
}

AdamW::AdamW(AdamWConfig config, const ModelParams& params) : config_(config)
{
    config_.validate();
    m_ = params.zero_grads();
    v_ = params.zero_grads();
}

void AdamW::step(ModelParams& params, const ParamGrads& grads)
{
    auto& ps = params.parameters();
    if (grads.size() != ps.size() || m_.size() != ps.size()) {
        throw ArgumentError("AdamW::step: gradient count does not match the parameters");
    }
    ++t_;
    const double lr = config_.learning_rate;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double decay = 1.0 - lr * config_.weight_decay;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        auto& w = ps[i].value;
        const auto& g = grads[i];
        m_[i] = b1 * m_[i] + (1.0 - b1) * g;
        v_[i] = b2 * v_[i] + (1.0 - b2) * g.cwiseProduct(g);
        w *= decay;
        w.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
    }
}

}  // namespace ctnet

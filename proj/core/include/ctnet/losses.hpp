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
#include <span>

#include "ctnet/features.hpp"
#include "ctnet/prototypes.hpp"

namespace ctnet {

/// FIXED_MODAL: all three modalities at test time. MISSING_MODAL: IR and/or
/// depth may be absent; auxiliary encoders and the complementary loss are on.
enum class Scenario { FixedModal, MissingModal };

std::string_view scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

/// `Sum` reproduces the plain sums of the objective; `Mean` divides each
/// summed term by its number of summands.
enum class Reduction { Sum, Mean };

std::string_view reduction_name(Reduction r);
std::optional<Reduction> parse_reduction(std::string_view name);

struct LossWeights {
    double lambda1 = 0.005;  ///< weight of L_MD and L_IT
    double lambda2 = 0.5;    ///< weight of each cross-entropy term

    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Which optional terms participate in the total. Cross-entropy is always on.
struct TermMask {
    bool ms = true;
    bool md = true;
    bool ct = true;
    bool it = true;
    bool cf = true;

    friend bool operator==(const TermMask&, const TermMask&) = default;
};

/// Individual terms as computed for one batch; l_cf is present only in the
/// missing-modal scenario.
struct LossParts {
    double l_ms = 0.0;
    double l_ct = 0.0;
    double l_md = 0.0;
    double l_it = 0.0;
    std::optional<double> l_cf;
    double l_ce_rgb = 0.0;
    double l_ce_ir = 0.0;
    double l_ce_d = 0.0;
};

struct LossBreakdown {
    double l_ms = 0.0;
    double l_ct = 0.0;
    double l_md = 0.0;
    double l_it = 0.0;
    double l_cf = 0.0;
    double l_ce_rgb = 0.0;
    double l_ce_ir = 0.0;
    double l_ce_d = 0.0;
    double total = 0.0;
};

/// Auxiliary (RGB-derived) IR-like and depth-like features, d x n each.
struct AuxiliaryBatch {
    Matrix ir;
    Matrix depth;
};

// Every loss below optionally writes d(loss)/d(features) into `grad`, which is
// resized to the input shape. Empty inputs yield 0 and a zero gradient.

/// Modality-specific contrastive loss over live features. Positives are
/// ordered same-modality pairs of distinct samples; the denominator holds only
/// cross-modality live features.
double loss_ms(const FeatureBatch& live, FeatureBatch* grad = nullptr, Reduction reduction = Reduction::Sum);

/// Sum of (1 - Pearson(sample transition, prototype transition)).
double loss_ct(const FeatureBatch& live, const PrototypeStore& store, FeatureBatch* grad = nullptr,
               Reduction reduction = Reduction::Sum);

/// Sum of cos(prototype, spoof feature) over spoof samples and modalities.
double loss_md(const FeatureBatch& spoof, const PrototypeStore& store, FeatureBatch* grad = nullptr,
               Reduction reduction = Reduction::Sum);

/// Sum of Pearson(prototype transition, spoof transition).
double loss_it(const FeatureBatch& spoof, const PrototypeStore& store, FeatureBatch* grad = nullptr,
               Reduction reduction = Reduction::Sum);

/// Sum over all batch samples of (1 - cos(f_m, f_hat_m)) for m in {IR, DEPTH}.
/// With `stop_target`, no gradient is written for the target features.
double loss_cf(const FeatureBatch& targets, const AuxiliaryBatch& aux, FeatureBatch* grad_targets = nullptr,
               AuxiliaryBatch* grad_aux = nullptr, Reduction reduction = Reduction::Sum, bool stop_target = false);

/// Per-modality mean softmax cross-entropy. Logits are 2 x n (row 0 live,
/// row 1 spoof).
struct CrossEntropyResult {
    std::array<double, kNumModalities> loss{};
    std::array<Matrix, kNumModalities> d_logits;  ///< filled when requested
};

CrossEntropyResult loss_ce(const std::array<Matrix, kNumModalities>& logits, std::span<const Label> labels,
                           bool with_grad = false);

/// Weighted total. Throws StateError when l_cf presence disagrees with the
/// scenario.
LossBreakdown total_loss(const LossParts& parts, const LossWeights& weights, Scenario scenario,
                         const TermMask& mask = {});

}  // namespace ctnet

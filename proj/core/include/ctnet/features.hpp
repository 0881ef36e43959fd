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

#include <Eigen/Dense>

#include "ctnet/modality.hpp"

namespace ctnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Embedding of one modality of one sample.
struct FeatureVector {
    Vector values;
    ModalityId source = ModalityId::Rgb;
    bool is_auxiliary = false;
};

/// The three modality features of one sample, indexed by ModalityId.
using ModalityFeatures = std::array<Vector, kNumModalities>;

/// Features of a set of samples, one d x n matrix per modality (column j is
/// sample j). Losses consume and produce gradients in this layout.
struct FeatureBatch {
    std::array<Matrix, kNumModalities> by_modality;

    Eigen::Index size() const { return by_modality[0].cols(); }
    Eigen::Index dim() const { return by_modality[0].rows(); }
    const Matrix& operator[](ModalityId m) const { return by_modality[index_of(m)]; }
    Matrix& operator[](ModalityId m) { return by_modality[index_of(m)]; }

    /// Zero batch of the given shape.
    static FeatureBatch zeros(Eigen::Index dim, Eigen::Index n);
    ModalityFeatures sample(Eigen::Index j) const;
};

inline FeatureBatch FeatureBatch::zeros(Eigen::Index dim, Eigen::Index n)
{
    FeatureBatch b;
    for (auto& m : b.by_modality) {
        m = Matrix::Zero(dim, n);
    }
    return b;
}

inline ModalityFeatures FeatureBatch::sample(Eigen::Index j) const
{
    return {by_modality[0].col(j), by_modality[1].col(j), by_modality[2].col(j)};
}

}  // namespace ctnet

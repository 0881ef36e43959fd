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

#include <span>

#include "ctnet/features.hpp"

namespace ctnet {

/// Norm / variance floor below which a vector is treated as degenerate.
inline constexpr double kDegenerateEps = 1e-8;

/// <a,b> / (|a||b|); 0 when either norm is below kDegenerateEps.
double cosine_similarity(VectorRef a, VectorRef b);

/// Pearson correlation over vector components; 0 when either component
/// variance is below kDegenerateEps. Requires length >= 2.
double pearson(VectorRef a, VectorRef b);

/// Value plus partial derivatives with respect to both arguments.
struct SimilarityGrad {
    double value = 0.0;
    Vector d_a;
    Vector d_b;
};

/// Degenerate inputs yield value 0 with zero gradients.
SimilarityGrad cosine_with_grad(VectorRef a, VectorRef b);
SimilarityGrad pearson_with_grad(VectorRef a, VectorRef b);

/// target - source.
Vector transition(VectorRef source, VectorRef target);

inline Vector transition(const ModalityFeatures& f, TransitionPair pair)
{
    return transition(f[index_of(pair.source)], f[index_of(pair.target)]);
}

/// Mean Pearson correlation between the transition vectors of every ordered
/// pair of distinct samples. Requires at least two samples.
double average_transition_correlation(std::span<const ModalityFeatures> samples, TransitionPair pair);

/// For each query sample, the mean Pearson correlation between its transition
/// and those of every reference sample. With `exclude_self`, queries and
/// references are the same set and the i == j term is skipped.
std::vector<double> per_sample_transition_correlation(std::span<const ModalityFeatures> queries,
                                                      std::span<const ModalityFeatures> references,
                                                      TransitionPair pair, bool exclude_self);

}  // namespace ctnet

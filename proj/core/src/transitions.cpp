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

#include "ctnet/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctnet/error.hpp"

namespace ctnet {
namespace {

void require_same_length(VectorRef a, VectorRef b, const char* op)
{
    if (a.size() != b.size()) {
        throw ArgumentError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
    }
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Centered copy scaled to unit norm, or the zero vector when the component
// variance is below the degenerate floor.
Vector unit_centered(VectorRef v)
{
    Vector c = v.array() - v.mean();
    const double sq = c.squaredNorm();
    if (sq / static_cast<double>(v.size()) < kDegenerateEps) {
        return Vector::Zero(v.size());
    }
    return c / std::sqrt(sq);
}

}  // namespace

double cosine_similarity(VectorRef a, VectorRef b)
{
    require_same_length(a, b, "cosine_similarity");
    if (a.size() < 1) {
        throw ArgumentError("cosine_similarity: vectors must be non-empty");
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na < kDegenerateEps || nb < kDegenerateEps) {
        return 0.0;
    }
    return clamp_unit(a.dot(b) / (na * nb));
}

SimilarityGrad cosine_with_grad(VectorRef a, VectorRef b)
{
    require_same_length(a, b, "cosine_similarity");
    SimilarityGrad g{0.0, Vector::Zero(a.size()), Vector::Zero(b.size())};
    const double na = a.norm();
    const double nb = b.norm();
    if (na < kDegenerateEps || nb < kDegenerateEps) {
        return g;
    }
    const double inv = 1.0 / (na * nb);
    const double c = a.dot(b) * inv;
    g.value = clamp_unit(c);
    g.d_a = b * inv - a * (c / (na * na));
    g.d_b = a * inv - b * (c / (nb * nb));
    return g;
}

double pearson(VectorRef a, VectorRef b)
{
    require_same_length(a, b, "pearson");
    if (a.size() < 2) {
        throw ArgumentError("pearson: vectors need at least 2 components");
    }
    const auto n = static_cast<double>(a.size());
    const Vector ac = a.array() - a.mean();
    const Vector bc = b.array() - b.mean();
    const double saa = ac.squaredNorm();
    const double sbb = bc.squaredNorm();
    if (saa / n < kDegenerateEps || sbb / n < kDegenerateEps) {
        return 0.0;
    }
    return clamp_unit(ac.dot(bc) / std::sqrt(saa * sbb));
}

SimilarityGrad pearson_with_grad(VectorRef a, VectorRef b)
{
    require_same_length(a, b, "pearson");
    if (a.size() < 2) {
        throw ArgumentError("pearson: vectors need at least 2 components");
    }
    SimilarityGrad g{0.0, Vector::Zero(a.size()), Vector::Zero(b.size())};
    const auto n = static_cast<double>(a.size());
    const Vector ac = a.array() - a.mean();
    const Vector bc = b.array() - b.mean();
    const double saa = ac.squaredNorm();
    const double sbb = bc.squaredNorm();
    if (saa / n < kDegenerateEps || sbb / n < kDegenerateEps) {
        return g;
    }
    // Pearson is the cosine of the centered vectors; the cosine gradient of a
    // zero-mean pair is already zero-mean, so no extra projection is needed.
    const double inv = 1.0 / std::sqrt(saa * sbb);
    const double r = ac.dot(bc) * inv;
    g.value = clamp_unit(r);
    g.d_a = bc * inv - ac * (r / saa);
    g.d_b = ac * inv - bc * (r / sbb);
    return g;
}

Vector transition(VectorRef source, VectorRef target)
{
    require_same_length(source, target, "transition");
    return target - source;
}

std::vector<double> per_sample_transition_correlation(std::span<const ModalityFeatures> queries,
                                                      std::span<const ModalityFeatures> references,
                                                      TransitionPair pair, bool exclude_self)
{
    if (exclude_self && queries.size() != references.size()) {
        throw ArgumentError("per_sample_transition_correlation: exclude_self needs queries == references");
    }
    const std::size_t min_refs = exclude_self ? 2 : 1;
    if (references.size() < min_refs) {
        throw ArgumentError("per_sample_transition_correlation: not enough reference samples");
    }
    if (queries.empty()) {
        return {};
    }
    const auto d = queries.front()[0].size();
    if (d < 2) {
        throw ArgumentError("per_sample_transition_correlation: features need at least 2 components");
    }
    auto unit_matrix = [&](std::span<const ModalityFeatures> set) {
        Matrix u(d, static_cast<Eigen::Index>(set.size()));
        for (std::size_t i = 0; i < set.size(); ++i) {
            u.col(static_cast<Eigen::Index>(i)) = unit_centered(transition(set[i], pair));
        }
        return u;
    };
    const Matrix uq = unit_matrix(queries);
    const Matrix ur = exclude_self ? uq : unit_matrix(references);
    const Matrix corr = (uq.transpose() * ur).cwiseMax(-1.0).cwiseMin(1.0);

    std::vector<double> out(queries.size());
    const double denom = static_cast<double>(references.size() - (exclude_self ? 1 : 0));
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
        double s = corr.row(i).sum();
        if (exclude_self) {
            s -= corr(i, i);
        }
        out[static_cast<std::size_t>(i)] = s / denom;
    }
    return out;
}

double average_transition_correlation(std::span<const ModalityFeatures> samples, TransitionPair pair)
{
    if (samples.size() < 2) {
        throw ArgumentError("average_transition_correlation: need at least 2 samples");
    }
    const auto per_sample = per_sample_transition_correlation(samples, samples, pair, true);
    double s = 0.0;
    for (double v : per_sample) {
        s += v;
    }
    return s / static_cast<double>(per_sample.size());
}

}  // namespace ctnet

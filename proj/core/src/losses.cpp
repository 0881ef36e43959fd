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

#include "ctnet/losses.hpp"

#include <cmath>

#include "ctnet/error.hpp"
#include "ctnet/transitions.hpp"

namespace ctnet {
namespace {

double reduce(double sum, double count, Reduction reduction)
{
    if (reduction == Reduction::Mean && count > 0.0) {
        return sum / count;
    }
    return sum;
}

void scale_grad(FeatureBatch* grad, double count, Reduction reduction)
{
    if (grad != nullptr && reduction == Reduction::Mean && count > 0.0) {
        for (auto& m : grad->by_modality) {
            m /= count;
        }
    }
}

void prepare_grad(FeatureBatch* grad, const FeatureBatch& like)
{
    if (grad != nullptr) {
        *grad = FeatureBatch::zeros(like.dim(), like.size());
    }
}

// Columns scaled to unit norm; degenerate columns become zero so that their
// cosines (and gradients) vanish.
struct UnitColumns {
    Matrix unit;
    Vector norm;
};

UnitColumns unit_columns(const Matrix& x)
{
    UnitColumns u{Matrix::Zero(x.rows(), x.cols()), Vector::Zero(x.cols())};
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double n = x.col(j).norm();
        u.norm(j) = n;
        if (n >= kDegenerateEps) {
            u.unit.col(j) = x.col(j) / n;
        }
    }
    return u;
}

// Back-propagates d/d(unit column) to d/d(raw column).
Matrix unit_backward(const UnitColumns& u, const Matrix& d_unit)
{
    Matrix out = Matrix::Zero(d_unit.rows(), d_unit.cols());
    for (Eigen::Index j = 0; j < d_unit.cols(); ++j) {
        if (u.norm(j) >= kDegenerateEps) {
            const auto uj = u.unit.col(j);
            out.col(j) = (d_unit.col(j) - uj * uj.dot(d_unit.col(j))) / u.norm(j);
        }
    }
    return out;
}

}  // namespace

std::string_view scenario_name(Scenario s)
{
    return s == Scenario::FixedModal ? "fixed" : "missing";
}

std::optional<Scenario> parse_scenario(std::string_view name)
{
    if (name == "fixed") {
        return Scenario::FixedModal;
    }
    if (name == "missing") {
        return Scenario::MissingModal;
    }
    return std::nullopt;
}

std::string_view reduction_name(Reduction r)
{
    return r == Reduction::Sum ? "sum" : "mean";
}

std::optional<Reduction> parse_reduction(std::string_view name)
{
    if (name == "sum") {
        return Reduction::Sum;
    }
    if (name == "mean") {
        return Reduction::Mean;
    }
    return std::nullopt;
}

double loss_ms(const FeatureBatch& live, FeatureBatch* grad, Reduction reduction)
{
    prepare_grad(grad, live);
    const Eigen::Index n = live.size();
    if (n < 2) {
        return 0.0;
    }
    std::array<UnitColumns, kNumModalities> unit;
    for (auto m : kModalities) {
        unit[index_of(m)] = unit_columns(live[m]);
    }
    std::array<Matrix, kNumModalities> d_unit;
    for (auto& d : d_unit) {
        d = Matrix::Zero(live.dim(), n);
    }

    const double positives_per_anchor = static_cast<double>(n - 1);
    double loss = 0.0;
    for (std::size_t a = 0; a < kNumModalities; ++a) {
        // Same-modality cosines; every ordered i != j pair is a positive.
        const Matrix same = unit[a].unit.transpose() * unit[a].unit;
        loss -= same.sum() - same.diagonal().sum();

        // Cross-modality cosines: the anchor's negatives, n per other modality.
        std::array<Matrix, kNumModalities> cross;
        Vector row_max = Vector::Constant(n, -std::numeric_limits<double>::infinity());
        for (std::size_t b = 0; b < kNumModalities; ++b) {
            if (b == a) {
                continue;
            }
            cross[b] = unit[a].unit.transpose() * unit[b].unit;
            row_max = row_max.cwiseMax(cross[b].rowwise().maxCoeff());
        }
        Vector denom = Vector::Zero(n);
        for (std::size_t b = 0; b < kNumModalities; ++b) {
            if (b != a) {
                cross[b] = (cross[b].colwise() - row_max).array().exp();
                denom += cross[b].rowwise().sum();
            }
        }
        const Vector lse = row_max.array() + denom.array().log();
        loss += positives_per_anchor * lse.sum();

        if (grad != nullptr) {
            // d/dS_same(i, j) = -1 off the diagonal, S = U_a^T U_a.
            Matrix g_same = Matrix::Constant(n, n, -1.0);
            g_same.diagonal().setZero();
            d_unit[a] += unit[a].unit * (g_same + g_same.transpose());
            for (std::size_t b = 0; b < kNumModalities; ++b) {
                if (b == a) {
                    continue;
                }
                // softmax weights times the number of positives per anchor
                const Matrix g = (cross[b].array().colwise() / denom.array()) * positives_per_anchor;
                d_unit[a] += unit[b].unit * g.transpose();
                d_unit[b] += unit[a].unit * g;
            }
        }
    }
    const double count = 3.0 * static_cast<double>(n) * static_cast<double>(n - 1);
    if (grad != nullptr) {
        for (auto m : kModalities) {
            (*grad)[m] = unit_backward(unit[index_of(m)], d_unit[index_of(m)]);
        }
        scale_grad(grad, count, reduction);
    }
    return reduce(loss, count, reduction);
}

double loss_ct(const FeatureBatch& live, const PrototypeStore& store, FeatureBatch* grad, Reduction reduction)
{
    prepare_grad(grad, live);
    const Eigen::Index n = live.size();
    if (n == 0) {
        return 0.0;
    }
    const auto proto = prototype_transitions(store);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < kTransitionPairs.size(); ++p) {
            const auto [src, tgt] = kTransitionPairs[p];
            const Vector t = live[tgt].col(i) - live[src].col(i);
            const auto r = pearson_with_grad(t, proto[p]);
            loss += 1.0 - r.value;
            if (grad != nullptr) {
                (*grad)[tgt].col(i) -= r.d_a;
                (*grad)[src].col(i) += r.d_a;
            }
        }
    }
    const double count = 3.0 * static_cast<double>(n);
    scale_grad(grad, count, reduction);
    return reduce(loss, count, reduction);
}

double loss_md(const FeatureBatch& spoof, const PrototypeStore& store, FeatureBatch* grad, Reduction reduction)
{
    prepare_grad(grad, spoof);
    const Eigen::Index n = spoof.size();
    if (n == 0) {
        return 0.0;
    }
    store.require_initialized();
    double loss = 0.0;
    for (auto m : kModalities) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = cosine_with_grad(store[m], spoof[m].col(i));
            loss += c.value;
            if (grad != nullptr) {
                (*grad)[m].col(i) += c.d_b;
            }
        }
    }
    const double count = 3.0 * static_cast<double>(n);
    scale_grad(grad, count, reduction);
    return reduce(loss, count, reduction);
}

double loss_it(const FeatureBatch& spoof, const PrototypeStore& store, FeatureBatch* grad, Reduction reduction)
{
    prepare_grad(grad, spoof);
    const Eigen::Index n = spoof.size();
    if (n == 0) {
        return 0.0;
    }
    const auto proto = prototype_transitions(store);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < kTransitionPairs.size(); ++p) {
            const auto [src, tgt] = kTransitionPairs[p];
            const Vector t = spoof[tgt].col(i) - spoof[src].col(i);
            const auto r = pearson_with_grad(proto[p], t);
            loss += r.value;
            if (grad != nullptr) {
                (*grad)[tgt].col(i) += r.d_b;
                (*grad)[src].col(i) -= r.d_b;
            }
        }
    }
    const double count = 3.0 * static_cast<double>(n);
    scale_grad(grad, count, reduction);
    return reduce(loss, count, reduction);
}

double loss_cf(const FeatureBatch& targets, const AuxiliaryBatch& aux, FeatureBatch* grad_targets,
               AuxiliaryBatch* grad_aux, Reduction reduction, bool stop_target)
{
    prepare_grad(grad_targets, targets);
    const Eigen::Index n = targets.size();
    if (aux.ir.cols() != n || aux.depth.cols() != n || aux.ir.rows() != targets.dim() ||
        aux.depth.rows() != targets.dim()) {
        throw ArgumentError("loss_cf: auxiliary features do not match the target batch");
    }
    if (grad_aux != nullptr) {
        grad_aux->ir = Matrix::Zero(aux.ir.rows(), n);
        grad_aux->depth = Matrix::Zero(aux.depth.rows(), n);
    }
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (auto m : {ModalityId::Ir, ModalityId::Depth}) {
            const Matrix& hat = m == ModalityId::Ir ? aux.ir : aux.depth;
            const auto c = cosine_with_grad(targets[m].col(i), hat.col(i));
            loss += 1.0 - c.value;
            if (grad_targets != nullptr && !stop_target) {
                (*grad_targets)[m].col(i) -= c.d_a;
            }
            if (grad_aux != nullptr) {
                (m == ModalityId::Ir ? grad_aux->ir : grad_aux->depth).col(i) -= c.d_b;
            }
        }
    }
    const double count = 2.0 * static_cast<double>(n);
    if (reduction == Reduction::Mean && n > 0) {
        scale_grad(grad_targets, count, reduction);
        if (grad_aux != nullptr) {
            grad_aux->ir /= count;
            grad_aux->depth /= count;
        }
    }
    return reduce(loss, count, reduction);
}

CrossEntropyResult loss_ce(const std::array<Matrix, kNumModalities>& logits, std::span<const Label> labels,
                           bool with_grad)
{
    CrossEntropyResult out;
    const auto n = static_cast<Eigen::Index>(labels.size());
    for (const auto label : labels) {
        if (label != Label::Live && label != Label::Spoof) {
            throw ArgumentError("loss_ce: label outside {live, spoof}");
        }
    }
    for (std::size_t m = 0; m < kNumModalities; ++m) {
        const Matrix& z = logits[m];
        if (z.rows() != 2 || z.cols() != n) {
            throw ArgumentError("loss_ce: logits must be 2 x n");
        }
        if (with_grad) {
            out.d_logits[m] = Matrix::Zero(2, n);
        }
        if (n == 0) {
            continue;
        }
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double hi = std::max(z(0, i), z(1, i));
            const double e0 = std::exp(z(0, i) - hi);
            const double e1 = std::exp(z(1, i) - hi);
            const double lse = hi + std::log(e0 + e1);
            const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
            sum += lse - z(y, i);
            if (with_grad) {
                out.d_logits[m](0, i) = e0 / (e0 + e1);
                out.d_logits[m](1, i) = e1 / (e0 + e1);
                out.d_logits[m](y, i) -= 1.0;
            }
        }
        out.loss[m] = sum / static_cast<double>(n);
        if (with_grad) {
            out.d_logits[m] /= static_cast<double>(n);
        }
    }
    return out;
}

LossBreakdown total_loss(const LossParts& parts, const LossWeights& weights, Scenario scenario, const TermMask& mask)
{
    if (scenario == Scenario::FixedModal && parts.l_cf) {
        throw StateError("total_loss: L_CF supplied in the fixed-modal scenario");
    }
    if (scenario == Scenario::MissingModal && !parts.l_cf) {
        throw StateError("total_loss: L_CF missing in the missing-modal scenario");
    }
    LossBreakdown b;
    b.l_ms = parts.l_ms;
    b.l_ct = parts.l_ct;
    b.l_md = parts.l_md;
    b.l_it = parts.l_it;
    b.l_cf = parts.l_cf.value_or(0.0);
    b.l_ce_rgb = parts.l_ce_rgb;
    b.l_ce_ir = parts.l_ce_ir;
    b.l_ce_d = parts.l_ce_d;
    auto on = [](bool flag) { return flag ? 1.0 : 0.0; };
    b.total = on(mask.ms) * b.l_ms + on(mask.ct) * b.l_ct + on(mask.md) * weights.lambda1 * b.l_md +
              on(mask.it) * weights.lambda1 * b.l_it +
              (scenario == Scenario::MissingModal ? on(mask.cf) * b.l_cf : 0.0) +
              weights.lambda2 * (b.l_ce_rgb + b.l_ce_ir + b.l_ce_d);
    return b;
}

}  // namespace ctnet

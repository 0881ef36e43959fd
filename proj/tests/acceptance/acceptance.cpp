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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctnet/correlation_report.hpp"
#include "ctnet/data.hpp"
#include "ctnet/losses.hpp"
#include "ctnet/metrics.hpp"
#include "ctnet/trainer.hpp"
#include "ctnet/transitions.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace ctnet::acceptance {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Collects the first few failures of a property check.
class Tally {
public:
    void check(bool ok, const std::string& what)
    {
        ++checks_;
        if (!ok) {
            ++failures_;
            if (failures_ <= 3) {
                first_ += (first_.empty() ? "" : "; ") + what;
            }
        }
    }
    bool ok() const { return failures_ == 0; }
    std::string summary() const
    {
        std::ostringstream s;
        s << checks_ << " checks, " << failures_ << " failed";
        if (!first_.empty()) {
            s << " (" << first_ << ")";
        }
        return s.str();
    }

private:
    std::size_t checks_ = 0;
    std::size_t failures_ = 0;
    std::string first_;
};

std::string fmt(const char* format, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

PrototypeStore random_store(Rng& rng, Eigen::Index d)
{
    PrototypeStore s;
    for (auto& p : s.prototypes) {
        p = oracle::random_vector(rng, d);
    }
    s.initialized = true;
    return s;
}

std::array<oracle::Vec, 3> proto_vecs(const PrototypeStore& s)
{
    return {oracle::to_vec(s.prototypes[0]), oracle::to_vec(s.prototypes[1]), oracle::to_vec(s.prototypes[2])};
}

std::vector<oracle::Vec> columns(const Matrix& m)
{
    std::vector<oracle::Vec> out;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out.push_back(oracle::to_vec(m.col(j)));
    }
    return out;
}

// 1. Correlation kernels against definitional oracles.
Outcome correlation_oracles()
{
    const auto t0 = Clock::now();
    Rng rng(1001);
    Tally tally;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const auto d = 2 + static_cast<Eigen::Index>(rng.below(63));
        Vector a = oracle::random_vector(rng, d);
        Vector b = oracle::random_vector(rng, d);
        if (t % 4 == 1) {
            b = 2.5 * a + 0.01 * b;
        }
        const double ec = std::abs(cosine_similarity(a, b) - oracle::cosine(oracle::to_vec(a), oracle::to_vec(b)));
        const double ep = std::abs(pearson(a, b) - oracle::pearson(oracle::to_vec(a), oracle::to_vec(b)));
        worst = std::max({worst, ec, ep});
        tally.check(ec <= 1e-10 && ep <= 1e-10, "pair " + std::to_string(t));
    }
    double worst_avg = 0.0;
    for (int t = 0; t < 40; ++t) {
        const auto n = 2 + static_cast<Eigen::Index>(rng.below(49));
        const auto d = 2 + static_cast<Eigen::Index>(rng.below(31));
        const auto batch = oracle::random_batch(rng, d, n);
        std::vector<ModalityFeatures> samples;
        for (Eigen::Index j = 0; j < n; ++j) {
            samples.push_back(batch.sample(j));
        }
        const auto ref = oracle::from_batch(batch);
        for (auto p : kTransitionPairs) {
            const double e =
                std::abs(average_transition_correlation(samples, p) - oracle::average_transition_correlation(ref, p));
            worst_avg = std::max(worst_avg, e);
            tally.check(e <= 1e-12, "average transition n=" + std::to_string(n));
        }
    }
    const double elapsed = seconds_since(t0);
    tally.check(elapsed < 5.0, "runtime");
    return {tally.ok(), "max |cos/pearson err| " + fmt("%.2e", worst) + " (<= 1e-10), max avg-transition err " +
                            fmt("%.2e", worst_avg) + " (<= 1e-12), " + fmt("%.2f s", elapsed) + " (< 5 s); " +
                            tally.summary()};
}

// 2. Analytic feature gradients of every loss term against central differences.
Outcome gradient_checks()
{
    const auto t0 = Clock::now();
    constexpr double kStep = 1e-3;
    constexpr double kTol = 1e-4;
    Rng rng(2002);
    Tally tally;
    double worst = 0.0;

    auto probe = [&](Matrix& x, const Matrix& grad, const std::function<double()>& loss, const std::string& what) {
        for (int k = 0; k < 5; ++k) {
            const auto idx = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(x.size())));
            const double numeric = oracle::central_difference(x, idx, kStep, loss);
            const double err = oracle::relative_error(grad.data()[idx], numeric);
            worst = std::max(worst, err);
            tally.check(err < kTol, what + "[" + std::to_string(idx) + "]");
        }
    };

    for (auto reduction : {Reduction::Sum, Reduction::Mean}) {
        const std::string tag = reduction == Reduction::Sum ? " (sum)" : " (mean)";
        auto live = oracle::random_batch(rng, 16, 4);
        auto spoof = oracle::random_batch(rng, 16, 4);
        const auto store = random_store(rng, 16);
        FeatureBatch g;
        for (std::size_t m = 0; m < 3; ++m) {
            loss_ms(live, &g, reduction);
            probe(live.by_modality[m], g.by_modality[m], [&] { return loss_ms(live, nullptr, reduction); },
                  "L_MS" + tag);
            loss_ct(live, store, &g, reduction);
            probe(live.by_modality[m], g.by_modality[m], [&] { return loss_ct(live, store, nullptr, reduction); },
                  "L_CT" + tag);
            loss_md(spoof, store, &g, reduction);
            probe(spoof.by_modality[m], g.by_modality[m], [&] { return loss_md(spoof, store, nullptr, reduction); },
                  "L_MD" + tag);
            loss_it(spoof, store, &g, reduction);
            probe(spoof.by_modality[m], g.by_modality[m], [&] { return loss_it(spoof, store, nullptr, reduction); },
                  "L_IT" + tag);
        }

        auto all = oracle::random_batch(rng, 16, 8);
        AuxiliaryBatch aux{oracle::random_batch(rng, 16, 8).by_modality[0],
                           oracle::random_batch(rng, 16, 8).by_modality[0]};
        AuxiliaryBatch g_aux;
        auto cf = [&] { return loss_cf(all, aux, nullptr, nullptr, reduction); };
        loss_cf(all, aux, &g, &g_aux, reduction);
        probe(all.by_modality[1], g.by_modality[1], cf, "L_CF target ir" + tag);
        probe(all.by_modality[2], g.by_modality[2], cf, "L_CF target depth" + tag);
        probe(aux.ir, g_aux.ir, cf, "L_CF aux ir" + tag);
        probe(aux.depth, g_aux.depth, cf, "L_CF aux depth" + tag);
    }

    EncoderConfig e;
    e.feature_dim = 16;
    e.stage_channels = {4};
    const auto params = ModelParams::initialize(e, false, 2002);
    auto features = oracle::random_batch(rng, 16, 8);
    std::vector<Label> labels(4, Label::Live);
    labels.resize(8, Label::Spoof);
    for (auto m : kModalities) {
        const auto mi = index_of(m);
        auto ce = [&] {
            std::array<Matrix, 3> logits;
            for (auto k : kModalities) {
                logits[index_of(k)] = head_forward(params, k, features[k]);
            }
            return loss_ce(logits, labels).loss[mi];
        };
        std::array<Matrix, 3> logits;
        for (auto k : kModalities) {
            logits[index_of(k)] = head_forward(params, k, features[k]);
        }
        const auto result = loss_ce(logits, labels, true);
        ParamGrads grads = params.zero_grads();
        Matrix d_features;
        head_backward(params, m, features[m], result.d_logits[mi], grads, &d_features);
        probe(features.by_modality[mi], d_features, ce, "L_CE " + std::string(modality_name(m)));
    }

    const double elapsed = seconds_since(t0);
    tally.check(elapsed < 30.0, "runtime");
    return {tally.ok(), "max relative error " + fmt("%.2e", worst) + " (< 1e-4, step 1e-3), " +
                            fmt("%.2f s", elapsed) + " (< 30 s); " + tally.summary()};
}

// 3. Loss values against nested-loop oracles.
Outcome loss_oracles()
{
    Rng rng(3003);
    Tally tally;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto d = 2 + static_cast<Eigen::Index>(rng.below(31));
        const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
        const auto live = oracle::random_batch(rng, d, n);
        const auto spoof = oracle::random_batch(rng, d, n);
        const auto store = random_store(rng, d);
        const auto proto = proto_vecs(store);
        const AuxiliaryBatch aux{oracle::random_batch(rng, d, n).by_modality[0],
                                 oracle::random_batch(rng, d, n).by_modality[1]};
        const double errs[] = {
            std::abs(loss_ms(live) - oracle::loss_ms(oracle::from_batch(live))),
            std::abs(loss_ct(live, store) - oracle::loss_ct(oracle::from_batch(live), proto)),
            std::abs(loss_md(spoof, store) - oracle::loss_md(oracle::from_batch(spoof), proto)),
            std::abs(loss_it(spoof, store) - oracle::loss_it(oracle::from_batch(spoof), proto)),
            std::abs(loss_cf(live, aux) - oracle::loss_cf(oracle::from_batch(live), columns(aux.ir), columns(aux.depth))),
        };
        const char* names[] = {"L_MS", "L_CT", "L_MD", "L_IT", "L_CF"};
        for (std::size_t k = 0; k < 5; ++k) {
            worst = std::max(worst, errs[k]);
            tally.check(errs[k] <= 1e-10, std::string(names[k]) + " batch " + std::to_string(t));
        }

        std::array<Matrix, 3> logits;
        std::vector<Label> labels;
        for (Eigen::Index i = 0; i < n; ++i) {
            labels.push_back(rng.below(2) == 0 ? Label::Live : Label::Spoof);
        }
        for (auto& z : logits) {
            z = 3.0 * oracle::random_batch(rng, 2, n).by_modality[0];
        }
        const auto ce = loss_ce(logits, labels);
        for (std::size_t m = 0; m < 3; ++m) {
            std::vector<std::array<double, 2>> rows;
            for (Eigen::Index i = 0; i < n; ++i) {
                rows.push_back({logits[m](0, i), logits[m](1, i)});
            }
            const double e = std::abs(ce.loss[m] - oracle::loss_ce(rows, labels));
            worst = std::max(worst, e);
            tally.check(e <= 1e-10, "L_CE batch " + std::to_string(t));
        }
    }
    return {tally.ok(), "max |loss - oracle| " + fmt("%.2e", worst) + " (<= 1e-10) over 100 batches; " +
                            tally.summary()};
}

// 4. Prototype store invariants, exact.
Outcome prototype_invariants()
{
    Rng rng(4004);
    Tally tally;
    auto random_triple = [&](Eigen::Index d) {
        return ModalityFeatures{oracle::random_vector(rng, d), oracle::random_vector(rng, d),
                                oracle::random_vector(rng, d)};
    };
    for (int t = 0; t < 1000; ++t) {
        const auto d = 1 + static_cast<Eigen::Index>(rng.below(64));
        const auto pre = random_triple(d);
        const auto cur = random_triple(d);
        const PrototypeStore s = ema_update({}, pre, kDefaultGamma);
        tally.check(s.prototypes == pre, "first update adopts");
        const double gamma = t % 10 == 0 ? 1.0 : rng.uniform(1e-9, 1.0);
        const auto next = ema_update(s, cur, gamma);
        for (std::size_t m = 0; m < 3; ++m) {
            bool inside = true;
            for (Eigen::Index i = 0; i < d; ++i) {
                const double v = next.prototypes[m](i);
                inside = inside && v >= std::min(pre[m](i), cur[m](i)) && v <= std::max(pre[m](i), cur[m](i));
            }
            tally.check(inside, "convexity");
        }
        tally.check(ema_update(s, cur, 1.0).prototypes == cur, "gamma = 1");
        tally.check(ema_update(s, pre, gamma).prototypes == pre, "fixed point");

        // Dyadic grid: every component is k / 1024 with |k| < 2^20, so the
        // subtractions and the sum below are exact.
        ModalityFeatures grid;
        for (auto& v : grid) {
            v = Vector(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                v(i) = static_cast<double>(static_cast<std::int64_t>(rng.below(1U << 21)) - (1 << 20)) / 1024.0;
            }
        }
        const auto tr = prototype_transitions(ema_update({}, grid, 1.0));
        tally.check(tr[0] + tr[2] == tr[1], "telescoping");
    }
    return {tally.ok(), "convexity, gamma=1, fixed point, telescoping (dyadic grid); " + tally.summary()};
}

// 5. Score identities.
Outcome scoring_identities()
{
    Rng rng(5005);
    Tally tally;
    for (int t = 0; t < 1000; ++t) {
        const double d = rng.uniform(0.0, 6.0);
        const double s = rng.uniform(0.0, 6.0);
        tally.check(score_ood(d, s, 0.0) == s && score_ood(d, s, 1.0) == d, "endpoints");
    }
    double lo = 6.0;
    double hi = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const auto dim = 2 + static_cast<Eigen::Index>(rng.below(31));
        const auto store = random_store(rng, dim);
        ModalityFeatures f{oracle::random_vector(rng, dim), oracle::random_vector(rng, dim),
                           oracle::random_vector(rng, dim)};
        if (t % 7 == 0) {
            f[0] = -store.prototypes[0];
        }
        const auto triple = score_sample(f, store, static_cast<double>(t % 11) / 10.0);
        lo = std::min({lo, triple.sc_d, triple.sc_t, triple.sc_ood});
        hi = std::max({hi, triple.sc_d, triple.sc_t, triple.sc_ood});
        tally.check(triple.sc_d >= 0.0 && triple.sc_d <= 6.0 && triple.sc_t >= 0.0 && triple.sc_t <= 6.0 &&
                        triple.sc_ood >= 0.0 && triple.sc_ood <= 6.0,
                    "range");
        tally.check(score_ood(triple.sc_d, triple.sc_t, 0.0) == triple.sc_t &&
                        score_ood(triple.sc_d, triple.sc_t, 1.0) == triple.sc_d,
                    "sample endpoints");
    }
    double zero = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const auto store = random_store(rng, 2 + static_cast<Eigen::Index>(rng.below(63)));
        const auto triple = score_sample(store.prototypes, store);
        zero = std::max({zero, std::abs(triple.sc_d), std::abs(triple.sc_t), std::abs(triple.sc_ood)});
    }
    tally.check(zero <= 1e-12, "zero point");
    return {tally.ok(), "observed range [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) +
                            "] within [0, 6], endpoints exact, zero point max |score| " + fmt("%.1e", zero) + "; " +
                            tally.summary()};
}

// 6. Metrics against brute-force oracles.
Outcome metric_oracles()
{
    Rng rng(6006);
    Tally tally;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.below(499);
        std::vector<Label> labels(n);
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = i == 0 ? Label::Live : i == 1 ? Label::Spoof : rng.below(2) == 0 ? Label::Live : Label::Spoof;
            scores[i] = static_cast<double>(rng.below(t % 2 == 0 ? 20 : 100000)) / 10.0;
        }
        tally.check(auc(scores, labels) == oracle::auc(scores, labels), "auc n=" + std::to_string(n));
    }
    for (int t = 0; t < 1000; ++t) {
        const Confusion c{1 + rng.below(50), 1 + rng.below(50), rng.below(50), rng.below(50)};
        const auto r = apcer_bpcer_acer(c);
        tally.check(std::abs(r.acer - (r.apcer + r.bpcer) / 2.0) <= 1e-12, "acer identity");
    }
    for (int t = 0; t < 200; ++t) {
        const std::size_t live = 1 + rng.below(60);
        const std::size_t spoof = 1 + rng.below(60);
        std::vector<Label> labels(live, Label::Live);
        labels.resize(live + spoof, Label::Spoof);
        rng.shuffle(labels);
        std::vector<double> scores;
        for (auto l : labels) {
            const double raw = rng.normal() + (l == Label::Spoof ? 1.0 : 0.0);
            scores.push_back(t % 2 == 0 ? std::round(raw * 4.0) / 4.0 : raw);
        }
        const auto fit = youden_threshold(scores, labels);
        tally.check(fit.j == oracle::best_youden(scores, labels), "youden set " + std::to_string(t));
    }
    return {tally.ok(), "AUC exact vs brute force (n <= 500, ties), ACER identity 1e-12, Youden J = sweep max on 200 "
                        "sets; " +
                            tally.summary()};
}

// End-to-end runs share trained checkpoints.
class Runs {
public:
    explicit Runs(fs::path work) : work_(std::move(work))
    {
        const GeneratorConfig g;
        const auto t0 = Clock::now();
        train_ = generate_synthetic_dataset(g, "train");
        test_ = generate_synthetic_dataset(g, "test");
        std::printf("# data: %zu train / %zu test samples generated in %.1f s\n", train_.size(), test_.size(),
                    seconds_since(t0));
        std::fflush(stdout);
    }

    const Dataset& train_set() const { return train_; }
    const Dataset& test_set() const { return test_; }
    const fs::path& work() const { return work_; }

    /// Trains (once) the named configuration.
    const Checkpoint& get(const std::string& key, const TrainConfig& config)
    {
        if (auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
        const auto t0 = Clock::now();
        Checkpoint ckpt = train(config, train_);
        const double elapsed = seconds_since(t0);
        seconds_[key] = elapsed;
        std::printf("# trained %s in %.1f s\n", key.c_str(), elapsed);
        std::fflush(stdout);
        save_checkpoint(ckpt, work_ / key);
        return cache_.emplace(key, std::move(ckpt)).first->second;
    }

    double seconds(const std::string& key) const { return seconds_.at(key); }

private:
    fs::path work_;
    Dataset train_;
    Dataset test_;
    std::map<std::string, Checkpoint> cache_;
    std::map<std::string, double> seconds_;
};

constexpr std::array<std::uint64_t, 3> kSeeds{42, 43, 44};

TrainConfig base_config(std::uint64_t seed)
{
    TrainConfig c;
    c.seed = seed;
    return c;
}

std::string seed_key(const std::string& name, std::uint64_t seed)
{
    return name + "_seed" + std::to_string(seed);
}

const Checkpoint& full_missing(Runs& runs, std::uint64_t seed)
{
    return runs.get(seed_key("missing_full", seed), base_config(seed));
}

EvalReport eval_at(const Checkpoint& ckpt, const Dataset& test, TestProtocol p,
                   MissingFill fill = MissingFill::Auxiliary)
{
    EvalOptions o;
    o.protocol = p;
    o.fill = fill;
    return evaluate(ckpt, test, o);
}

// 7. Fixed-modal end to end.
Outcome fixed_modal(Runs& runs)
{
    TrainConfig c = base_config(42);
    c.scenario = Scenario::FixedModal;
    const auto& ckpt = runs.get("fixed_full_seed42", c);
    const auto r = eval_at(ckpt, runs.test_set(), TestProtocol::P4RgbDIr);
    const bool ok = r.acer <= 0.05 && r.auc >= 0.98;
    return {ok, "P4 ACER " + fmt("%.4f", r.acer) + " (<= 0.05), AUC " + fmt("%.4f", r.auc) + " (>= 0.98), training " +
                    fmt("%.0f s", runs.seconds("fixed_full_seed42")) + " single-threaded"};
}

// 8. Missing-modal end to end.
Outcome missing_modal(Runs& runs)
{
    std::string detail;
    int ordered = 0;
    double p1_seed42 = 1.0;
    for (auto seed : kSeeds) {
        const auto& ckpt = full_missing(runs, seed);
        std::array<double, 4> acer{};
        for (auto p : kProtocols) {
            acer[static_cast<std::size_t>(p)] = eval_at(ckpt, runs.test_set(), p).acer;
        }
        const bool order = acer[3] <= acer[1] && acer[3] <= acer[2] && acer[1] <= acer[0] && acer[2] <= acer[0];
        ordered += order ? 1 : 0;
        if (seed == 42) {
            p1_seed42 = acer[0];
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%sseed %llu ACER P1 %.4f P2 %.4f P3 %.4f P4 %.4f%s", detail.empty() ? "" : "; ",
                      static_cast<unsigned long long>(seed), acer[0], acer[1], acer[2], acer[3],
                      order ? " ordered" : " not ordered");
        detail += buf;
    }
    const bool ok = p1_seed42 <= 0.15 && ordered >= 2;
    return {ok, "seed 42 P1 ACER " + fmt("%.4f", p1_seed42) + " (<= 0.15), ordering P4 <= P2/P3 <= P1 on " +
                    std::to_string(ordered) + "/3 seeds (>= 2); " + detail};
}

// 9. Ablation direction on P1.
Outcome ablation_direction(Runs& runs)
{
    const auto rows = ablation_rows();
    const AblationSpec& ce_row = rows.front();
    const AblationSpec& cf_row = rows[1];
    int ordered = 0;
    std::string detail;
    for (auto seed : kSeeds) {
        TrainConfig ce = base_config(seed);
        ce.terms = ce_row.mask;
        ce.scenario = ce_row.scenario;
        TrainConfig cf = base_config(seed);
        cf.terms = cf_row.mask;
        cf.scenario = cf_row.scenario;
        const double auc_ce =
            eval_at(runs.get(seed_key("ablation_ce", seed), ce), runs.test_set(), TestProtocol::P1Rgb, ce_row.fill).auc;
        const double auc_cf =
            eval_at(runs.get(seed_key("ablation_ce_cf", seed), cf), runs.test_set(), TestProtocol::P1Rgb, cf_row.fill)
                .auc;
        const double auc_full = eval_at(full_missing(runs, seed), runs.test_set(), TestProtocol::P1Rgb).auc;
        const bool order = auc_ce < auc_cf && auc_cf < auc_full;
        ordered += order ? 1 : 0;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%sseed %llu AUC CE %.4f, CE+CF %.4f, full %.4f%s", detail.empty() ? "" : "; ",
                      static_cast<unsigned long long>(seed), auc_ce, auc_cf, auc_full,
                      order ? " ordered" : " not ordered");
        detail += buf;
    }
    return {ordered >= 2, "AUC(CE) < AUC(CE+CF) < AUC(full) on " + std::to_string(ordered) + "/3 seeds (>= 2); " + detail};
}

// 10. Analysis direction on the default (missing-modal, seed 42) model.
Outcome analysis_direction(Runs& runs)
{
    const auto& ckpt = full_missing(runs, 42);
    const auto report = correlation_report(runs.test_set(), ckpt.params, ckpt.prototypes, TestProtocol::P4RgbDIr,
                                           MissingFill::Auxiliary);
    bool ok = true;
    std::string detail = "within-class cosine live/spoof:";
    for (auto m : kModalities) {
        const double l = report.live_cosine_mean[index_of(m)].value_or(NAN);
        const double s = report.spoof_cosine_mean[index_of(m)].value_or(NAN);
        ok = ok && l > s;
        detail += " " + std::string(modality_name(m)) + " " + fmt("%.4f", l) + "/" + fmt("%.4f", s);
    }
    detail += "; transition Pearson vs prototype live/spoof:";
    for (std::size_t k = 0; k < kTransitionPairs.size(); ++k) {
        const double l = report.live_transition_mean[k].value_or(NAN);
        const double s = report.spoof_transition_mean[k].value_or(NAN);
        const bool required = kTransitionPairs[k].target == ModalityId::Depth &&
                              (kTransitionPairs[k].source == ModalityId::Rgb || kTransitionPairs[k].source == ModalityId::Ir);
        if (required) {
            ok = ok && l - s >= 0.1;
        }
        detail += " " + transition_name(kTransitionPairs[k]) + " " + fmt("%.4f", l) + "/" + fmt("%.4f", s) +
                  (required ? " (gap >= 0.1 required)" : "");
    }
    return {ok, detail};
}

// 11. Determinism and round trips.
Outcome determinism(Runs& runs)
{
    Tally tally;
    GeneratorConfig g;
    g.splits = {{"train", {100, 100}}};
    const Dataset small = generate_synthetic_dataset(g, "train");
    for (auto scenario : {Scenario::MissingModal, Scenario::FixedModal}) {
        TrainConfig c;
        c.scenario = scenario;
        c.epochs = 2;
        const Checkpoint a = train(c, small);
        const Checkpoint b = train(c, small);
        tally.check(bit_equal(a, b), std::string("same-seed training, ") + std::string(scenario_name(scenario)));
    }

    const fs::path data_dir = runs.work() / "dataset_roundtrip";
    fs::remove_all(data_dir);
    write_dataset(runs.test_set(), data_dir);
    tally.check(read_dataset(data_dir) == runs.test_set(), "dataset round trip");
    write_dataset(runs.train_set(), data_dir / "train");
    tally.check(read_dataset(data_dir / "train") == runs.train_set(), "train dataset round trip");

    const Checkpoint& ckpt = full_missing(runs, 42);
    const Checkpoint loaded = load_checkpoint(runs.work() / seed_key("missing_full", 42));
    tally.check(bit_equal(loaded, ckpt), "checkpoint round trip");
    for (auto p : kProtocols) {
        const auto a = eval_at(ckpt, runs.test_set(), p);
        const auto b = eval_at(loaded, runs.test_set(), p);
        tally.check(a.live_scores == b.live_scores && a.spoof_scores == b.spoof_scores && a.threshold == b.threshold,
                    "reloaded scores " + std::string(protocol_name(p)));
    }
    return {tally.ok(), "bit-identical same-seed checkpoints (both scenarios), dataset and checkpoint round trips; " +
                            tally.summary()};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(Runs*)> run;
    bool needs_runs;
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance suite: prints one PASS/FAIL line per criterion"};
    std::string work = "acceptance_work";
    std::vector<int> only;
    app.add_option("--work-dir", work, "Directory for checkpoints and datasets written by the suite")
        ->capture_default_str();
    app.add_option("--criteria", only, "Run only these criteria (default: all)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "correlation oracles", [](Runs*) { return correlation_oracles(); }, false},
        {2, "gradient checks", [](Runs*) { return gradient_checks(); }, false},
        {3, "loss oracle equivalence", [](Runs*) { return loss_oracles(); }, false},
        {4, "prototype invariants", [](Runs*) { return prototype_invariants(); }, false},
        {5, "scoring identities", [](Runs*) { return scoring_identities(); }, false},
        {6, "metrics", [](Runs*) { return metric_oracles(); }, false},
        {7, "end-to-end fixed-modal", [](Runs* r) { return fixed_modal(*r); }, true},
        {8, "end-to-end missing-modal", [](Runs* r) { return missing_modal(*r); }, true},
        {9, "ablation direction", [](Runs* r) { return ablation_direction(*r); }, true},
        {10, "analysis direction", [](Runs* r) { return analysis_direction(*r); }, true},
        {11, "determinism and round trips", [](Runs* r) { return determinism(*r); }, true},
    };
    const std::set<int> selected(only.begin(), only.end());
    fs::create_directories(work);
    std::optional<Runs> runs;
    int failed = 0;
    int ran = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.contains(c.id)) {
            continue;
        }
        if (c.needs_runs && !runs) {
            runs.emplace(work);
        }
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run(runs ? &*runs : nullptr);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        ++ran;
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %2d  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}

}  // namespace ctnet::acceptance

int main(int argc, char** argv)
{
    return ctnet::acceptance::main(argc, argv);
}

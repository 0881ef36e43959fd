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

#include "ctnet/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "ctnet/error.hpp"
#include "ctnet/rng.hpp"
#include "json_util.hpp"

namespace ctnet {
namespace {

using json = nlohmann::json;

struct StepState {
    ModelParams& params;
    PrototypeStore& store;
    AdamW& optimizer;
    const TrainConfig& config;
};

FeatureBatch gather(const FeatureBatch& all, const std::vector<Eigen::Index>& cols)
{
    FeatureBatch out = FeatureBatch::zeros(all.dim(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t m = 0; m < kNumModalities; ++m) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out.by_modality[m].col(static_cast<Eigen::Index>(j)) = all.by_modality[m].col(cols[j]);
        }
    }
    return out;
}

void scatter_add(std::array<Matrix, kNumModalities>& into, const FeatureBatch& grad,
                 const std::vector<Eigen::Index>& cols, double weight)
{
    for (std::size_t m = 0; m < kNumModalities; ++m) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            into[m].col(cols[j]) += weight * grad.by_modality[m].col(static_cast<Eigen::Index>(j));
        }
    }
}

void require_finite(double value, const char* term, std::uint64_t step)
{
    if (!std::isfinite(value)) {
        throw NumericalError(std::string("non-finite ") + term + " at step " + std::to_string(step));
    }
}

LossBreakdown train_step(StepState& s, const Dataset& data, const std::vector<std::size_t>& indices,
                         std::uint64_t step)
{
    const TrainConfig& cfg = s.config;
    const auto n = static_cast<Eigen::Index>(indices.size());
    const Reduction red = cfg.loss_reduction;
    const TermMask& mask = cfg.terms;

    std::vector<const Tensor*> tensors(indices.size());
    std::array<ImageBatch, kNumModalities> inputs;
    for (auto m : kModalities) {
        for (std::size_t i = 0; i < indices.size(); ++i) {
            tensors[i] = &data.samples[indices[i]].tensor(m);
        }
        inputs[index_of(m)] = pack_images(tensors);
    }

    std::array<EncoderTape, kNumModalities> tapes;
    FeatureBatch f;
    for (auto m : kModalities) {
        f[m] = encoder_forward(s.params, slot_for(m), inputs[index_of(m)], &tapes[index_of(m)]);
    }
    AuxiliaryBatch aux;
    std::array<EncoderTape, 2> aux_tapes;
    if (cfg.with_auxiliary()) {
        aux.ir = encoder_forward(s.params, EncoderSlot::AuxIr, inputs[0], &aux_tapes[0]);
        aux.depth = encoder_forward(s.params, EncoderSlot::AuxDepth, inputs[0], &aux_tapes[1]);
    }

    std::vector<Label> labels;
    std::vector<Eigen::Index> live_cols;
    std::vector<Eigen::Index> spoof_cols;
    for (Eigen::Index j = 0; j < n; ++j) {
        labels.push_back(data.samples[indices[static_cast<std::size_t>(j)]].label);
        (labels.back() == Label::Live ? live_cols : spoof_cols).push_back(j);
    }
    const FeatureBatch live = gather(f, live_cols);
    const FeatureBatch spoof = gather(f, spoof_cols);

    // Prototypes move first; the losses below see this step's update.
    if (const auto mean = batch_live_mean(live)) {
        s.store = ema_update(s.store, *mean, cfg.gamma);
    }

    LossParts parts;
    FeatureBatch g_ms, g_ct, g_md, g_it, g_cf;
    AuxiliaryBatch g_aux;
    parts.l_ms = loss_ms(live, mask.ms ? &g_ms : nullptr, red);
    if (s.store.initialized) {
        parts.l_ct = loss_ct(live, s.store, mask.ct ? &g_ct : nullptr, red);
        parts.l_md = loss_md(spoof, s.store, mask.md ? &g_md : nullptr, red);
        parts.l_it = loss_it(spoof, s.store, mask.it ? &g_it : nullptr, red);
    }
    if (cfg.with_auxiliary()) {
        parts.l_cf = loss_cf(f, aux, mask.cf ? &g_cf : nullptr, mask.cf ? &g_aux : nullptr, red, cfg.cf_stop_target);
    }

    std::array<Matrix, kNumModalities> logits;
    for (auto m : kModalities) {
        logits[index_of(m)] = head_forward(s.params, m, f[m]);
    }
    const auto ce = loss_ce(logits, labels, true);
    parts.l_ce_rgb = ce.loss[0];
    parts.l_ce_ir = ce.loss[1];
    parts.l_ce_d = ce.loss[2];

    const LossBreakdown b = total_loss(parts, cfg.weights, cfg.scenario, mask);
    require_finite(b.l_ms, "L_MS", step);
    require_finite(b.l_ct, "L_CT", step);
    require_finite(b.l_md, "L_MD", step);
    require_finite(b.l_it, "L_IT", step);
    require_finite(b.l_cf, "L_CF", step);
    require_finite(b.l_ce_rgb, "L_CE-RGB", step);
    require_finite(b.l_ce_ir, "L_CE-IR", step);
    require_finite(b.l_ce_d, "L_CE-D", step);
    require_finite(b.total, "total loss", step);

    ParamGrads grads = s.params.zero_grads();
    std::array<Matrix, kNumModalities> d_f;
    for (auto& d : d_f) {
        d = Matrix::Zero(f.dim(), n);
    }
    if (mask.ms) {
        scatter_add(d_f, g_ms, live_cols, 1.0);
    }
    if (mask.ct && s.store.initialized) {
        scatter_add(d_f, g_ct, live_cols, 1.0);
    }
    if (mask.md && s.store.initialized) {
        scatter_add(d_f, g_md, spoof_cols, cfg.weights.lambda1);
    }
    if (mask.it && s.store.initialized) {
        scatter_add(d_f, g_it, spoof_cols, cfg.weights.lambda1);
    }
    if (mask.cf && cfg.with_auxiliary()) {
        for (std::size_t m = 0; m < kNumModalities; ++m) {
            d_f[m] += g_cf.by_modality[m];
        }
    }
    for (auto m : kModalities) {
        Matrix d_head;
        head_backward(s.params, m, f[m], cfg.weights.lambda2 * ce.d_logits[index_of(m)], grads, &d_head);
        d_f[index_of(m)] += d_head;
    }
    for (auto m : kModalities) {
        encoder_backward(s.params, slot_for(m), tapes[index_of(m)], d_f[index_of(m)], grads);
    }
    if (cfg.with_auxiliary()) {
        if (!mask.cf) {
            g_aux.ir = Matrix::Zero(f.dim(), n);
            g_aux.depth = Matrix::Zero(f.dim(), n);
        }
        encoder_backward(s.params, EncoderSlot::AuxIr, aux_tapes[0], g_aux.ir, grads);
        encoder_backward(s.params, EncoderSlot::AuxDepth, aux_tapes[1], g_aux.depth, grads);
    }

    s.optimizer.step(s.params, grads);
    if (!s.params.all_finite()) {
        throw NumericalError("non-finite parameters after step " + std::to_string(step));
    }
    return b;
}

void quantize(PrototypeStore& store)
{
    for (auto& p : store.prototypes) {
        p = p.cast<float>().cast<double>();
    }
}

std::vector<const MultiModalSample*> pointers(const Dataset& d)
{
    std::vector<const MultiModalSample*> out;
    out.reserve(d.size());
    for (const auto& s : d.samples) {
        out.push_back(&s);
    }
    return out;
}

std::string mask_name(const TermMask& m)
{
    std::string name = "CE";
    if (m.cf) {
        name += "+CF";
    }
    if (m.ms) {
        name += "+MS";
    }
    if (m.ct) {
        name += "+CT";
    }
    if (m.md) {
        name += "+MD";
    }
    if (m.it) {
        name += "+IT";
    }
    return name;
}

}  // namespace

void TrainConfig::validate() const
{
    if (epochs < 1) {
        throw ConfigError("train.epochs must be >= 1");
    }
    if (batch_size < 2) {
        throw ConfigError("train.batch_size must be >= 2");
    }
    optimizer.validate();
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ConfigError("train.gamma must lie in (0, 1]");
    }
    if (!(weights.lambda1 >= 0.0) || !(weights.lambda2 >= 0.0)) {
        throw ConfigError("train.loss_weights must be nonnegative");
    }
    if (!(lambda3 >= 0.0 && lambda3 <= 1.0)) {
        throw ConfigError("train.lambda3 must lie in [0, 1]");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("train.validation_fraction must lie in (0, 1)");
    }
    model.validate();
}

void to_json(json& j, const TrainConfig& c)
{
    j = json{{"scenario", scenario_name(c.scenario)},
             {"epochs", c.epochs},
             {"batch_size", c.batch_size},
             {"optimizer", c.optimizer},
             {"gamma", c.gamma},
             {"loss_weights", {{"lambda1", c.weights.lambda1}, {"lambda2", c.weights.lambda2}}},
             {"lambda3", c.lambda3},
             {"seed", c.seed},
             {"validation_fraction", c.validation_fraction},
             {"loss_reduction", reduction_name(c.loss_reduction)},
             {"terms",
              {{"ms", c.terms.ms}, {"ct", c.terms.ct}, {"md", c.terms.md}, {"it", c.terms.it}, {"cf", c.terms.cf}}},
             {"cf_stop_target", c.cf_stop_target},
             {"model", c.model}};
}

void from_json(const json& j, TrainConfig& c)
{
    const std::string where = "train";
    detail::reject_unknown(j,
                           {"scenario", "epochs", "batch_size", "optimizer", "gamma", "loss_weights", "lambda3", "seed",
                            "validation_fraction", "loss_reduction", "terms", "cf_stop_target", "model"},
                           where);
    std::string scenario(scenario_name(c.scenario));
    detail::read_opt(j, "scenario", scenario, where);
    if (const auto s = parse_scenario(scenario)) {
        c.scenario = *s;
    } else {
        throw ConfigError("train.scenario: expected fixed or missing, got '" + scenario + "'");
    }
    detail::read_opt(j, "epochs", c.epochs, where);
    detail::read_opt(j, "batch_size", c.batch_size, where);
    if (auto it = j.find("optimizer"); it != j.end()) {
        from_json(*it, c.optimizer);
    }
    detail::read_opt(j, "gamma", c.gamma, where);
    if (auto it = j.find("loss_weights"); it != j.end()) {
        const std::string w = where + ".loss_weights";
        detail::reject_unknown(*it, {"lambda1", "lambda2"}, w);
        detail::read_opt(*it, "lambda1", c.weights.lambda1, w);
        detail::read_opt(*it, "lambda2", c.weights.lambda2, w);
    }
    detail::read_opt(j, "lambda3", c.lambda3, where);
    detail::read_opt(j, "seed", c.seed, where);
    detail::read_opt(j, "validation_fraction", c.validation_fraction, where);
    std::string reduction(reduction_name(c.loss_reduction));
    detail::read_opt(j, "loss_reduction", reduction, where);
    if (const auto r = parse_reduction(reduction)) {
        c.loss_reduction = *r;
    } else {
        throw ConfigError("train.loss_reduction: expected sum or mean, got '" + reduction + "'");
    }
    if (auto it = j.find("terms"); it != j.end()) {
        const std::string w = where + ".terms";
        detail::reject_unknown(*it, {"ms", "ct", "md", "it", "cf"}, w);
        detail::read_opt(*it, "ms", c.terms.ms, w);
        detail::read_opt(*it, "ct", c.terms.ct, w);
        detail::read_opt(*it, "md", c.terms.md, w);
        detail::read_opt(*it, "it", c.terms.it, w);
        detail::read_opt(*it, "cf", c.terms.cf, w);
    }
    detail::read_opt(j, "cf_stop_target", c.cf_stop_target, where);
    if (auto it = j.find("model"); it != j.end()) {
        from_json(*it, c.model);
    }
}

std::string log_csv_header()
{
    return "step,epoch,l_ms,l_ct,l_md,l_it,l_cf,l_ce_rgb,l_ce_ir,l_ce_d,total,learning_rate";
}

std::string log_csv_row(const StepRecord& r)
{
    char buf[512];
    const auto& l = r.loss;
    std::snprintf(buf, sizeof buf, "%llu,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  static_cast<unsigned long long>(r.step), r.epoch, l.l_ms, l.l_ct, l.l_md, l.l_it, l.l_cf, l.l_ce_rgb,
                  l.l_ce_ir, l.l_ce_d, l.total, r.learning_rate);
    return buf;
}

Checkpoint train(const TrainConfig& config, const Dataset& data, const TrainOptions& options)
{
    config.validate();
    if (data.count(Label::Live) == 0 || data.count(Label::Spoof) == 0) {
        throw ConfigError("training data must contain both live and spoof samples (live=" +
                          std::to_string(data.count(Label::Live)) +
                          ", spoof=" + std::to_string(data.count(Label::Spoof)) + ")");
    }
    const auto labels = data.labels();
    const SplitIndices split =
        validation_split(labels, config.validation_fraction, mix_seed(config.seed, fnv1a("validation")));
    std::vector<Label> train_labels;
    for (auto i : split.train) {
        train_labels.push_back(labels[i]);
    }
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), split.train.size());
    if (batch < 2) {
        throw ConfigError("training split is too small for a batch of two");
    }

    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.params = ModelParams::initialize(config.model, config.with_auxiliary(), config.seed);
    ckpt.prototypes.gamma = config.gamma;
    AdamW optimizer(config.optimizer, ckpt.params);
    StepState state{ckpt.params, ckpt.prototypes, optimizer, config};
    EpochSampler sampler(train_labels, batch, mix_seed(config.seed, fnv1a("batches")));

    if (options.log != nullptr) {
        *options.log << log_csv_header() << '\n';
    }
    std::uint64_t step = 0;
    std::vector<std::size_t> indices;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double epoch_total = 0.0;
        const auto batches = sampler.next_epoch();
        for (const auto& b : batches) {
            indices.clear();
            for (auto k : b.indices) {
                indices.push_back(split.train[k]);
            }
            ++step;
            StepRecord rec{step, epoch, train_step(state, data, indices, step), config.optimizer.learning_rate};
            epoch_total += rec.loss.total;
            if (options.log != nullptr) {
                *options.log << log_csv_row(rec) << '\n';
            }
        }
        if (options.on_epoch) {
            options.on_epoch(epoch, epoch_total / static_cast<double>(batches.size()));
        }
    }

    ckpt.params.quantize_to_float();
    quantize(ckpt.prototypes);
    std::vector<const MultiModalSample*> validation;
    for (auto i : split.validation) {
        validation.push_back(&data.samples[i]);
    }
    ckpt.calibration = calibrate(ckpt.params, ckpt.prototypes, validation, config.scenario, config.lambda3);
    return ckpt;
}

std::string_view threshold_source_name(ThresholdSource s)
{
    return s == ThresholdSource::Validation ? "validation" : "test";
}

std::optional<ThresholdSource> parse_threshold_source(std::string_view name)
{
    if (name == "validation") {
        return ThresholdSource::Validation;
    }
    if (name == "test") {
        return ThresholdSource::Test;
    }
    return std::nullopt;
}

std::vector<ScoreTriple> score_dataset(const Checkpoint& ckpt, const Dataset& data, TestProtocol protocol,
                                       MissingFill fill, double lambda3)
{
    ckpt.prototypes.require_initialized();
    const auto samples = pointers(data);
    return score_batch(assemble_test_features(ckpt.params, samples, protocol, fill), ckpt.prototypes, lambda3);
}

namespace {

EvalReport report_from_triples(const Checkpoint& ckpt, const std::vector<ScoreTriple>& triples,
                               const std::vector<Label>& labels, const EvalOptions& options)
{
    std::vector<double> scores;
    scores.reserve(triples.size());
    for (const auto& t : triples) {
        scores.push_back(score_ood(t.sc_d, t.sc_t, options.lambda3));
    }
    double threshold = 0.0;
    if (options.threshold_source == ThresholdSource::Test) {
        threshold = youden_threshold(scores, labels).threshold;
    } else {
        const CalibrationEntry* e = ckpt.find_calibration(options.protocol, options.fill);
        if (e == nullptr) {
            throw ConfigError("checkpoint has no validation threshold for protocol " +
                              std::string(protocol_name(options.protocol)) + " with " +
                              std::string(missing_fill_name(options.fill)) +
                              " filling; use threshold source 'test'");
        }
        if (e->lambda3 == options.lambda3) {
            threshold = e->threshold;
        } else {
            std::vector<double> val(e->sc_d.size());
            for (std::size_t i = 0; i < val.size(); ++i) {
                val[i] = score_ood(e->sc_d[i], e->sc_t[i], options.lambda3);
            }
            threshold = youden_threshold(val, e->labels).threshold;
        }
    }
    EvalReport r = make_report(options.protocol, scores, labels, threshold, options.lambda3);
    r.threshold_source = std::string(threshold_source_name(options.threshold_source));
    r.missing_fill = options.protocol == TestProtocol::P4RgbDIr ? "none" : std::string(missing_fill_name(options.fill));
    return r;
}

}  // namespace

EvalReport evaluate(const Checkpoint& ckpt, const Dataset& test, const EvalOptions& options)
{
    if (!(options.lambda3 >= 0.0 && options.lambda3 <= 1.0)) {
        throw ArgumentError("lambda3 must lie in [0, 1]");
    }
    const auto triples = score_dataset(ckpt, test, options.protocol, options.fill, options.lambda3);
    return report_from_triples(ckpt, triples, test.labels(), options);
}

std::vector<EvalReport> lambda3_sweep(const Checkpoint& ckpt, const Dataset& test, EvalOptions options)
{
    const auto triples = score_dataset(ckpt, test, options.protocol, options.fill, kDefaultLambda3);
    const auto labels = test.labels();
    std::vector<EvalReport> out;
    for (int k = 0; k <= 10; ++k) {
        options.lambda3 = k / 10.0;
        out.push_back(report_from_triples(ckpt, triples, labels, options));
    }
    return out;
}

std::vector<AblationSpec> ablation_rows()
{
    std::vector<AblationSpec> rows;
    const std::array<TermMask, 6> masks{
        TermMask{false, false, false, false, false}, TermMask{false, false, false, false, true},
        TermMask{true, false, false, false, true},   TermMask{true, false, true, false, true},
        TermMask{true, true, true, false, true},     TermMask{true, true, true, true, true},
    };
    for (const auto& m : masks) {
        AblationSpec s;
        s.name = mask_name(m);
        s.mask = m;
        s.scenario = m.cf ? Scenario::MissingModal : Scenario::FixedModal;
        s.fill = m.cf ? MissingFill::Auxiliary : MissingFill::ZeroPad;
        rows.push_back(s);
    }
    return rows;
}

std::vector<AblationResult> ablate(const TrainConfig& base, const Dataset& train_data, const Dataset& test_data,
                                   TestProtocol protocol, const std::vector<AblationSpec>& rows,
                                   const TrainOptions& options)
{
    std::vector<AblationResult> out;
    for (const auto& row : rows) {
        TrainConfig cfg = base;
        cfg.terms = row.mask;
        cfg.scenario = row.scenario;
        const Checkpoint ckpt = train(cfg, train_data, options);
        EvalOptions eval;
        eval.protocol = protocol;
        eval.lambda3 = cfg.lambda3;
        eval.fill = row.fill;
        out.push_back({row, evaluate(ckpt, test_data, eval)});
    }
    return out;
}

}  // namespace ctnet

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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctnet/data.hpp"
#include "ctnet/encoders.hpp"
#include "ctnet/losses.hpp"
#include "ctnet/metrics.hpp"
#include "ctnet/optimizer.hpp"
#include "ctnet/prototypes.hpp"
#include "ctnet/scoring.hpp"

namespace ctnet {

struct TrainConfig {
    Scenario scenario = Scenario::MissingModal;
    int epochs = 50;
    int batch_size = 32;
    AdamWConfig optimizer;
    double gamma = kDefaultGamma;
    LossWeights weights;
    double lambda3 = kDefaultLambda3;
    std::uint64_t seed = 42;
    double validation_fraction = 0.2;
    Reduction loss_reduction = Reduction::Mean;
    TermMask terms;
    bool cf_stop_target = true;
    EncoderConfig model;

    /// Throws ConfigError.
    void validate() const;

    bool with_auxiliary() const { return scenario == Scenario::MissingModal; }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Strict: unknown keys are a ConfigError.
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Validation-split scores for one (protocol, fill) combination, kept so the
/// threshold can be refit for another lambda3 without the data.
struct CalibrationEntry {
    TestProtocol protocol = TestProtocol::P4RgbDIr;
    MissingFill fill = MissingFill::Auxiliary;
    double lambda3 = kDefaultLambda3;
    double threshold = 0.0;
    double youden_j = 0.0;
    std::vector<double> sc_d;
    std::vector<double> sc_t;
    std::vector<Label> labels;

    friend bool operator==(const CalibrationEntry&, const CalibrationEntry&) = default;
};

struct Checkpoint {
    ModelParams params;
    PrototypeStore prototypes;
    TrainConfig config;
    std::vector<CalibrationEntry> calibration;
    std::string training_log;  ///< file name of the per-step log, if one was written

    const CalibrationEntry* find_calibration(TestProtocol protocol, MissingFill fill) const;
};

/// Bit-exact comparison of parameters, prototypes, config and calibration.
bool bit_equal(const Checkpoint& a, const Checkpoint& b);

/// Directory with params.bin/json, prototypes.bin/json, config.json and
/// calibration.json. Values are stored as float32; `train` already rounds
/// parameters and prototypes to float so the round trip is exact.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& directory);
Checkpoint load_checkpoint(const std::filesystem::path& directory);

/// Stratified seeded split into (train, validation) index lists.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

SplitIndices validation_split(std::span<const Label> labels, double fraction, std::uint64_t seed);

/// Scores the given samples under every calibration combination that fits
/// the scenario and fits a Youden threshold for each.
std::vector<CalibrationEntry> calibrate(const ModelParams& params, const PrototypeStore& store,
                                        std::span<const MultiModalSample* const> samples, Scenario scenario,
                                        double lambda3);

struct StepRecord {
    std::uint64_t step = 0;
    int epoch = 0;
    LossBreakdown loss;
    double learning_rate = 0.0;
};

std::string log_csv_header();
std::string log_csv_row(const StepRecord& r);

struct TrainOptions {
    /// Receives one CSV row per step (header first) when set.
    std::ostream* log = nullptr;
    /// Called after every epoch with (epoch, mean total loss of the epoch).
    std::function<void(int, double)> on_epoch;
};

/// Runs the full schedule, then rounds the model to float32 and fits the
/// validation thresholds. Throws ConfigError on single-class data and
/// NumericalError naming the term and step on a non-finite loss.
Checkpoint train(const TrainConfig& config, const Dataset& data, const TrainOptions& options = {});

enum class ThresholdSource { Validation, Test };

std::string_view threshold_source_name(ThresholdSource s);
std::optional<ThresholdSource> parse_threshold_source(std::string_view name);

struct EvalOptions {
    TestProtocol protocol = TestProtocol::P4RgbDIr;
    double lambda3 = kDefaultLambda3;
    ThresholdSource threshold_source = ThresholdSource::Validation;
    MissingFill fill = MissingFill::Auxiliary;
};

/// Throws ConfigError when the protocol needs auxiliary encoders the
/// checkpoint lacks.
EvalReport evaluate(const Checkpoint& ckpt, const Dataset& test, const EvalOptions& options);

/// One report per lambda3 in {0, 0.1, ..., 1}; features are encoded once.
std::vector<EvalReport> lambda3_sweep(const Checkpoint& ckpt, const Dataset& test, EvalOptions options);

/// Per-sample scores of a dataset under a protocol.
std::vector<ScoreTriple> score_dataset(const Checkpoint& ckpt, const Dataset& data, TestProtocol protocol,
                                       MissingFill fill, double lambda3);

struct AblationSpec {
    std::string name;
    TermMask mask;
    Scenario scenario = Scenario::MissingModal;
    MissingFill fill = MissingFill::Auxiliary;
};

/// Loss-combination rows in table order: CE, CE+CF, +MS, +CT, +MD, +IT.
/// Rows without the complementary loss train without auxiliary encoders and
/// fill missing modalities with zeros.
std::vector<AblationSpec> ablation_rows();

struct AblationResult {
    AblationSpec spec;
    EvalReport report;
};

/// Trains and evaluates one model per row, each from the same seed.
std::vector<AblationResult> ablate(const TrainConfig& base, const Dataset& train_data, const Dataset& test_data,
                                   TestProtocol protocol, const std::vector<AblationSpec>& rows,
                                   const TrainOptions& options = {});

}  // namespace ctnet

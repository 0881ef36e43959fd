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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "ctnet/correlation_report.hpp"
#include "ctnet/data.hpp"
#include "ctnet/error.hpp"
#include "ctnet/metrics.hpp"
#include "ctnet/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ctnet::cli {
namespace {

struct Settings {
    GeneratorConfig generator;
    TrainConfig train;
};

json settings_json(const Settings& s)
{
    return json{{"generator", s.generator}, {"train", s.train}};
}

Settings settings_from(const json& j, const std::string& where)
{
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "generator" && key != "train") {
            throw ConfigError(where + ": unknown key '" + key + "' (expected 'generator' and/or 'train')");
        }
    }
    Settings s;
    if (j.contains("generator")) {
        s.generator = j.at("generator").get<GeneratorConfig>();
    }
    if (j.contains("train")) {
        s.train = j.at("train").get<TrainConfig>();
    }
    return s;
}

json parse_value(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return json(text);
    }
}

/// Applies "a.b.c=value" to a fully populated settings tree. Only existing
/// keys can be set.
void apply_override(json& tree, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    json* node = &tree;
    std::stringstream path(key);
    std::string part;
    while (std::getline(path, part, '.')) {
        if (!node->is_object() || !node->contains(part)) {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
        node = &(*node)[part];
    }
    *node = parse_value(assignment.substr(eq + 1));
}

Settings load_settings(const std::string& config_path, const std::vector<std::string>& overrides,
                       std::optional<std::uint64_t> seed)
{
    Settings s;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            throw ConfigError(config_path + ": cannot open configuration file");
        }
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(config_path + ": " + e.what());
        }
        s = settings_from(j, config_path);
    }
    json tree = settings_json(s);
    for (const auto& o : overrides) {
        apply_override(tree, o);
    }
    if (seed) {
        tree["generator"]["seed"] = *seed;
        tree["train"]["seed"] = *seed;
    }
    s = settings_from(tree, "configuration");
    s.generator.validate();
    s.train.validate();
    return s;
}

/// A dataset directory, or a directory holding one per split.
fs::path split_dir(const fs::path& data, const std::string& split)
{
    if (fs::exists(data / split / "manifest.json")) {
        return data / split;
    }
    return data;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw ArgumentError(path.string() + ": cannot open for writing");
    }
    out << text;
}

TestProtocol protocol_arg(const std::string& name)
{
    const auto p = parse_protocol(name);
    if (!p) {
        throw ArgumentError("unknown protocol '" + name + "'; valid protocols: P1 (RGB), P2 (RGB+D), P3 (RGB+IR), "
                            "P4 (RGB+D+IR)");
    }
    return *p;
}

MissingFill fill_arg(const std::string& name)
{
    const auto f = parse_missing_fill(name);
    if (!f) {
        throw ArgumentError("unknown fill '" + name + "'; valid fills: auxiliary, zero_pad");
    }
    return *f;
}

Scenario scenario_arg(const std::string& name)
{
    const auto s = parse_scenario(name);
    if (!s) {
        throw ArgumentError("unknown scenario '" + name + "'; valid scenarios: fixed, missing");
    }
    return *s;
}

void print_report(const EvalReport& r)
{
    std::printf("%s  APCER %.4f  BPCER %.4f  ACER %.4f  AUC %.4f  threshold %.6g (%s, lambda3 %.2f)\n",
                std::string(protocol_name(r.protocol)).c_str(), r.apcer, r.bpcer, r.acer, r.auc, r.threshold,
                r.threshold_source.c_str(), r.lambda3);
}

struct Common {
    std::string config;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "JSON configuration with optional 'generator' and 'train' sections")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "Override a configuration key, e.g. --set train.epochs=10")
        ->take_all()
        ->allow_extra_args(false);
}

}  // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Multi-modal face anti-spoofing: contrastive transition training, scoring and analysis.\n"
                 "Defaults: lambda1=0.005, lambda2=0.5, lambda3=0.5, AdamW lr 5e-4, 50 epochs, batch 32."};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::uint64_t> seed;
    bool deterministic = false;
    app.add_option("--seed", seed, "Override generator.seed and train.seed");
    app.add_flag("--deterministic", deterministic, "Single-threaded, bit-reproducible execution");

    Common cfg_c;
    auto* config_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");
    add_common(config_cmd, cfg_c);

    Common gen_c;
    std::string gen_out;
    std::vector<std::string> gen_splits;
    auto* gen = app.add_subcommand("gen", "Generate the synthetic dataset, one directory per split");
    add_common(gen, gen_c);
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--split", gen_splits, "Splits to generate (default: every configured split)");

    Common train_c;
    std::string train_data;
    std::string train_out;
    std::string train_scenario;
    auto* train_cmd = app.add_subcommand("train", "Train a model and calibrate its thresholds");
    add_common(train_cmd, train_c);
    train_cmd->add_option("--data", train_data, "Training dataset (or a directory with a train/ split)")
        ->required()
        ->check(CLI::ExistingDirectory);
    train_cmd->add_option("--out", train_out, "Checkpoint directory")->required();
    train_cmd->add_option("--scenario", train_scenario, "fixed or missing (default: train.scenario, missing)");

    std::string eval_ckpt;
    std::string eval_data;
    std::string eval_protocol = "P4";
    double eval_lambda3 = kDefaultLambda3;
    std::string eval_fill = "auxiliary";
    std::string eval_source = "validation";
    std::string eval_report;
    bool eval_sweep = false;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a test set");
    eval->add_option("--ckpt", eval_ckpt, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--data", eval_data, "Test dataset (or a directory with a test/ split)")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--protocol", eval_protocol, "P1 (RGB), P2 (RGB+D), P3 (RGB+IR) or P4 (RGB+D+IR)")
        ->capture_default_str();
    eval->add_option("--lambda3", eval_lambda3, "Weight of the distance score in the OOD score")
        ->capture_default_str();
    eval->add_option("--fill", eval_fill, "Missing modality fill: auxiliary or zero_pad")->capture_default_str();
    eval->add_option("--threshold-source", eval_source,
                     "validation (stored calibration) or test (fit on the test scores, optimistic)")
        ->capture_default_str();
    eval->add_option("--report", eval_report, "Write the report JSON here (a sweep writes CSV)");
    eval->add_flag("--sweep", eval_sweep, "Evaluate lambda3 = 0, 0.1, ..., 1");

    std::string an_ckpt;
    std::string an_data;
    std::string an_out;
    std::string an_protocol = "P4";
    std::string an_fill = "auxiliary";
    auto* analyze = app.add_subcommand("analyze", "Correlation histograms and summary of a trained model");
    analyze->add_option("--ckpt", an_ckpt, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    analyze->add_option("--data", an_data, "Dataset (or a directory with a test/ split)")
        ->required()
        ->check(CLI::ExistingDirectory);
    analyze->add_option("--out", an_out, "Output directory")->required();
    analyze->add_option("--protocol", an_protocol, "Protocol used to assemble features")->capture_default_str();
    analyze->add_option("--fill", an_fill, "Missing modality fill")->capture_default_str();

    Common ab_c;
    std::string ab_data;
    std::string ab_out;
    std::string ab_protocol = "P1";
    auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate every loss-combination row");
    add_common(ablate_cmd, ab_c);
    ablate_cmd->add_option("--data", ab_data, "Directory with train/ and test/ splits")
        ->required()
        ->check(CLI::ExistingDirectory);
    ablate_cmd->add_option("--out", ab_out, "Output directory")->required();
    ablate_cmd->add_option("--protocol", ab_protocol, "Evaluation protocol")->capture_default_str();

    std::string sc_ckpt;
    std::string sc_samples;
    std::string sc_protocol = "P4";
    double sc_lambda3 = kDefaultLambda3;
    std::string sc_fill = "auxiliary";
    auto* score = app.add_subcommand("score", "Per-sample scores as JSON lines on standard output");
    score->add_option("--ckpt", sc_ckpt, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    score->add_option("--samples", sc_samples, "Dataset directory of samples to score")
        ->required()
        ->check(CLI::ExistingDirectory);
    score->add_option("--protocol", sc_protocol, "Protocol")->capture_default_str();
    score->add_option("--lambda3", sc_lambda3, "Weight of the distance score")->capture_default_str();
    score->add_option("--fill", sc_fill, "Missing modality fill")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (deterministic) {
        Eigen::setNbThreads(1);
    }

    if (config_cmd->parsed()) {
        std::printf("%s\n", settings_json(load_settings(cfg_c.config, cfg_c.overrides, seed)).dump(2).c_str());
        return 0;
    }

    if (gen->parsed()) {
        const auto s = load_settings(gen_c.config, gen_c.overrides, seed);
        std::vector<std::string> splits = gen_splits;
        if (splits.empty()) {
            for (const auto& [name, counts] : s.generator.splits) {
                splits.push_back(name);
            }
        }
        for (const auto& split : splits) {
            const Dataset d = generate_synthetic_dataset(s.generator, split);
            write_dataset(d, fs::path(gen_out) / split);
            std::printf("%s: %zu live, %zu spoof -> %s\n", split.c_str(), d.count(Label::Live),
                        d.count(Label::Spoof), (fs::path(gen_out) / split).string().c_str());
        }
        write_text(fs::path(gen_out) / "generator.json", json(s.generator).dump(1) + "\n");
        return 0;
    }

    if (train_cmd->parsed()) {
        auto s = load_settings(train_c.config, train_c.overrides, seed);
        if (!train_scenario.empty()) {
            s.train.scenario = scenario_arg(train_scenario);
        }
        const Dataset data = read_dataset(split_dir(train_data, "train"));
        fs::create_directories(train_out);
        const fs::path log_path = fs::path(train_out) / "train_log.csv";
        std::ofstream log(log_path, std::ios::trunc);
        TrainOptions options;
        options.log = &log;
        options.on_epoch = [&](int epoch, double loss) {
            std::printf("epoch %d/%d  mean loss %.6f\n", epoch, s.train.epochs, loss);
            std::fflush(stdout);
        };
        Checkpoint ckpt = train(s.train, data, options);
        ckpt.training_log = log_path.filename().string();
        save_checkpoint(ckpt, train_out);
        for (const auto& e : ckpt.calibration) {
            std::printf("calibration %s (%s): threshold %.6g, J %.4f\n", std::string(protocol_name(e.protocol)).c_str(),
                        std::string(missing_fill_name(e.fill)).c_str(), e.threshold, e.youden_j);
        }
        std::printf("checkpoint -> %s\n", train_out.c_str());
        return 0;
    }

    if (eval->parsed()) {
        const Checkpoint ckpt = load_checkpoint(eval_ckpt);
        const Dataset test = read_dataset(split_dir(eval_data, "test"));
        EvalOptions o;
        o.protocol = protocol_arg(eval_protocol);
        o.lambda3 = eval_lambda3;
        o.fill = fill_arg(eval_fill);
        const auto source = parse_threshold_source(eval_source);
        if (!source) {
            throw ArgumentError("unknown threshold source '" + eval_source + "'; valid: validation, test");
        }
        o.threshold_source = *source;
        if (eval_sweep) {
            const auto reports = lambda3_sweep(ckpt, test, o);
            std::string csv = "lambda3," + report_csv_header() + "\n";
            for (const auto& r : reports) {
                print_report(r);
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f,", r.lambda3);
                csv += buf + report_csv_row(r) + "\n";
            }
            if (!eval_report.empty()) {
                write_text(eval_report, csv);
            }
            return 0;
        }
        const auto r = evaluate(ckpt, test, o);
        print_report(r);
        if (!eval_report.empty()) {
            write_text(eval_report, json(r).dump(1) + "\n");
        }
        return 0;
    }

    if (analyze->parsed()) {
        const Checkpoint ckpt = load_checkpoint(an_ckpt);
        const Dataset data = read_dataset(split_dir(an_data, "test"));
        const auto report =
            correlation_report(data, ckpt.params, ckpt.prototypes, protocol_arg(an_protocol), fill_arg(an_fill));
        write_text(fs::path(an_out) / "histograms.csv", report_csv(report));
        const json summary = report_summary(report);
        write_text(fs::path(an_out) / "summary.json", summary.dump(1) + "\n");
        std::printf("within-class cosine (live / spoof)\n");
        for (auto m : kModalities) {
            const auto& l = report.live_cosine_mean[index_of(m)];
            const auto& sp = report.spoof_cosine_mean[index_of(m)];
            std::printf("  %-6s %8.4f %8.4f\n", std::string(modality_name(m)).c_str(), l.value_or(NAN),
                        sp.value_or(NAN));
        }
        std::printf("transition Pearson vs prototype (live / spoof)\n");
        for (std::size_t k = 0; k < kTransitionPairs.size(); ++k) {
            std::printf("  %-10s %8.4f %8.4f\n", transition_name(kTransitionPairs[k]).c_str(),
                        report.live_transition_mean[k].value_or(NAN), report.spoof_transition_mean[k].value_or(NAN));
        }
        std::printf("histograms -> %s\n", (fs::path(an_out) / "histograms.csv").string().c_str());
        return 0;
    }

    if (ablate_cmd->parsed()) {
        const auto s = load_settings(ab_c.config, ab_c.overrides, seed);
        const Dataset train_set = read_dataset(split_dir(ab_data, "train"));
        const Dataset test_set = read_dataset(split_dir(ab_data, "test"));
        const TestProtocol protocol = protocol_arg(ab_protocol);
        TrainOptions options;
        options.on_epoch = [&](int epoch, double loss) {
            if (epoch == s.train.epochs) {
                std::printf("  final epoch mean loss %.6f\n", loss);
            }
        };
        std::string csv = "row,ms,md,ct,it,cf,fill," + report_csv_header() + "\n";
        for (const auto& row : ablation_rows()) {
            std::printf("%s\n", row.name.c_str());
            std::fflush(stdout);
            const auto results = ablate(s.train, train_set, test_set, protocol, {row}, options);
            const auto& r = results.front().report;
            print_report(r);
            const auto& m = row.mask;
            csv += row.name + "," + std::to_string(m.ms) + "," + std::to_string(m.md) + "," + std::to_string(m.ct) +
                   "," + std::to_string(m.it) + "," + std::to_string(m.cf) + "," +
                   std::string(missing_fill_name(row.fill)) + "," + report_csv_row(r) + "\n";
        }
        write_text(fs::path(ab_out) / "ablation.csv", csv);
        return 0;
    }

    if (score->parsed()) {
        const Checkpoint ckpt = load_checkpoint(sc_ckpt);
        const Dataset data = read_dataset(sc_samples);
        const TestProtocol protocol = protocol_arg(sc_protocol);
        const MissingFill fill = fill_arg(sc_fill);
        const auto* entry = ckpt.find_calibration(protocol, fill);
        if (entry == nullptr) {
            throw ConfigError("checkpoint has no calibration for protocol " + std::string(protocol_name(protocol)));
        }
        const auto triples = score_dataset(ckpt, data, protocol, fill, sc_lambda3);
        double threshold = entry->threshold;
        if (entry->lambda3 != sc_lambda3) {
            std::vector<double> refit;
            for (std::size_t i = 0; i < entry->sc_d.size(); ++i) {
                refit.push_back(score_ood(entry->sc_d[i], entry->sc_t[i], sc_lambda3));
            }
            threshold = youden_threshold(refit, entry->labels).threshold;
        }
        for (std::size_t i = 0; i < triples.size(); ++i) {
            const auto& t = triples[i];
            const json line{{"id", data.samples[i].id},
                            {"sc_d", t.sc_d},
                            {"sc_t", t.sc_t},
                            {"sc_ood", t.sc_ood},
                            {"decision", label_name(classify_ood(t.sc_ood, threshold))},
                            {"threshold", threshold},
                            {"protocol", protocol_name(protocol)}};
            std::cout << line.dump() << '\n';
        }
        return 0;
    }
    return 2;
}

}  // namespace ctnet::cli

int main(int argc, char** argv)
{
    try {
        return ctnet::cli::run(argc, argv);
    } catch (const ctnet::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ctnet::exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

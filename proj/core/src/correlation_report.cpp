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

#include "ctnet/correlation_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ctnet/error.hpp"
#include "ctnet/transitions.hpp"

namespace ctnet {
namespace {

std::optional<double> mean_of(std::span<const double> values)
{
    if (values.empty()) {
        return std::nullopt;
    }
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    return s / static_cast<double>(values.size());
}

std::vector<ModalityFeatures> samples_of(const FeatureBatch& f)
{
    std::vector<ModalityFeatures> out;
    out.reserve(static_cast<std::size_t>(f.size()));
    for (Eigen::Index j = 0; j < f.size(); ++j) {
        out.push_back(f.sample(j));
    }
    return out;
}

}  // namespace

double Histogram::bin_left(std::size_t k) const
{
    return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(counts.size());
}

double Histogram::bin_right(std::size_t k) const
{
    return -1.0 + 2.0 * static_cast<double>(k + 1) / static_cast<double>(counts.size());
}

Histogram make_histogram(std::string name, std::span<const double> values, std::size_t bins)
{
    if (bins == 0) {
        throw ArgumentError("make_histogram: at least one bin is required");
    }
    Histogram h;
    h.name = std::move(name);
    h.counts.assign(bins, 0);
    for (double v : values) {
        const double t = (std::clamp(v, -1.0, 1.0) + 1.0) / 2.0 * static_cast<double>(bins);
        const auto k = std::min(bins - 1, static_cast<std::size_t>(std::floor(t)));
        ++h.counts[k];
    }
    h.total = values.size();
    h.mean = mean_of(values);
    return h;
}

const Histogram* CorrelationReport::find(const std::string& name) const
{
    for (const auto& h : histograms) {
        if (h.name == name) {
            return &h;
        }
    }
    return nullptr;
}

std::vector<double> pairwise_cosines(const Matrix& features)
{
    const Eigen::Index n = features.cols();
    Matrix unit = features;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double norm = unit.col(j).norm();
        if (norm < kDegenerateEps) {
            unit.col(j).setZero();
        } else {
            unit.col(j) /= norm;
        }
    }
    const Matrix gram = unit.transpose() * unit;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            out.push_back(std::clamp(gram(i, j), -1.0, 1.0));
        }
    }
    return out;
}

CorrelationReport correlation_report(const FeatureBatch& features, std::span<const Label> labels,
                                     const PrototypeStore& store)
{
    if (static_cast<std::size_t>(features.size()) != labels.size()) {
        throw ArgumentError("correlation_report: feature and label counts differ");
    }
    if (labels.empty()) {
        throw ArgumentError("correlation_report: dataset is empty");
    }
    const auto proto = prototype_transitions(store);
    std::vector<Eigen::Index> cols[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        cols[labels[i] == Label::Live ? 0 : 1].push_back(static_cast<Eigen::Index>(i));
    }

    CorrelationReport r;
    r.live_empty = cols[0].empty();
    r.spoof_empty = cols[1].empty();
    const char* class_names[2] = {"live", "spoof"};
    for (int c = 0; c < 2; ++c) {
        FeatureBatch sub = FeatureBatch::zeros(features.dim(), static_cast<Eigen::Index>(cols[c].size()));
        for (std::size_t m = 0; m < kNumModalities; ++m) {
            for (std::size_t j = 0; j < cols[c].size(); ++j) {
                sub.by_modality[m].col(static_cast<Eigen::Index>(j)) = features.by_modality[m].col(cols[c][j]);
            }
        }
        auto& cos_mean = c == 0 ? r.live_cosine_mean : r.spoof_cosine_mean;
        for (auto m : kModalities) {
            const auto values = pairwise_cosines(sub[m]);
            r.histograms.push_back(make_histogram(std::string("cosine_") + class_names[c] + "_" +
                                                      std::string(modality_name(m)),
                                                  values));
            cos_mean[index_of(m)] = r.histograms.back().mean;
        }
        const auto samples = samples_of(sub);
        auto& trans_mean = c == 0 ? r.live_transition_mean : r.spoof_transition_mean;
        auto& avg = c == 0 ? r.live_average_transition : r.spoof_average_transition;
        for (std::size_t k = 0; k < kTransitionPairs.size(); ++k) {
            std::vector<double> values;
            values.reserve(samples.size());
            for (const auto& s : samples) {
                values.push_back(pearson(transition(s, kTransitionPairs[k]), proto[k]));
            }
            r.histograms.push_back(make_histogram(std::string("transition_") + class_names[c] + "_" +
                                                      transition_name(kTransitionPairs[k]),
                                                  values));
            trans_mean[k] = r.histograms.back().mean;
            if (samples.size() >= 2) {
                avg[k] = average_transition_correlation(samples, kTransitionPairs[k]);
            }
        }
    }
    return r;
}

CorrelationReport correlation_report(const Dataset& dataset, const ModelParams& params, const PrototypeStore& store,
                                     TestProtocol protocol, MissingFill fill)
{
    if (dataset.empty()) {
        throw ArgumentError("correlation_report: dataset is empty");
    }
    store.require_initialized();
    std::vector<const MultiModalSample*> samples;
    for (const auto& s : dataset.samples) {
        samples.push_back(&s);
    }
    const auto features = assemble_test_features(params, samples, protocol, fill);
    const auto labels = dataset.labels();
    return correlation_report(features, labels, store);
}

std::string report_csv(const CorrelationReport& report)
{
    std::string out = "histogram_name,bin_left,bin_right,count\n";
    char buf[160];
    for (const auto& h : report.histograms) {
        for (std::size_t k = 0; k < h.counts.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%zu\n", h.name.c_str(), h.bin_left(k), h.bin_right(k),
                          h.counts[k]);
            out += buf;
        }
    }
    return out;
}

nlohmann::json report_summary(const CorrelationReport& report)
{
    using json = nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json cosine = json::object();
    for (auto m : kModalities) {
        cosine[std::string(modality_name(m))] = {{"live", opt(report.live_cosine_mean[index_of(m)])},
                                                 {"spoof", opt(report.spoof_cosine_mean[index_of(m)])}};
    }
    json trans = json::object();
    for (std::size_t k = 0; k < kTransitionPairs.size(); ++k) {
        trans[transition_name(kTransitionPairs[k])] = {
            {"live_vs_prototype", opt(report.live_transition_mean[k])},
            {"spoof_vs_prototype", opt(report.spoof_transition_mean[k])},
            {"live_average", opt(report.live_average_transition[k])},
            {"spoof_average", opt(report.spoof_average_transition[k])},
        };
    }
    json hist = json::array();
    for (const auto& h : report.histograms) {
        hist.push_back({{"name", h.name}, {"count", h.total}, {"mean", opt(h.mean)}, {"empty", h.empty()}});
    }
    return json{{"bins", kHistogramBins},
                {"range", {-1.0, 1.0}},
                {"live_empty", report.live_empty},
                {"spoof_empty", report.spoof_empty},
                {"within_class_cosine", cosine},
                {"transition_correlation", trans},
                {"histograms", hist}};
}

}  // namespace ctnet

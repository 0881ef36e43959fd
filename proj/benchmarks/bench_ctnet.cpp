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

#include <vector>

#include <benchmark/benchmark.h>

#include "ctnet/data.hpp"
#include "ctnet/encoders.hpp"
#include "ctnet/losses.hpp"
#include "ctnet/metrics.hpp"
#include "ctnet/scoring.hpp"
#include "ctnet/transitions.hpp"

namespace {

using namespace ctnet;

Vector random_vector(Rng& rng, Eigen::Index d)
{
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        v(i) = rng.normal();
    }
    return v;
}

FeatureBatch random_batch(Rng& rng, Eigen::Index d, Eigen::Index n)
{
    FeatureBatch b = FeatureBatch::zeros(d, n);
    for (auto& m : b.by_modality) {
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = rng.normal();
        }
    }
    return b;
}

PrototypeStore random_store(Rng& rng, Eigen::Index d)
{
    PrototypeStore s;
    for (auto& p : s.prototypes) {
        p = random_vector(rng, d);
    }
    s.initialized = true;
    return s;
}

void BM_Pearson(benchmark::State& state)
{
    Rng rng(1);
    const Vector a = random_vector(rng, state.range(0));
    const Vector b = random_vector(rng, state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pearson(a, b));
    }
}
BENCHMARK(BM_Pearson)->Arg(16)->Arg(128);

void BM_AverageTransitionCorrelation(benchmark::State& state)
{
    Rng rng(2);
    const auto batch = random_batch(rng, 128, state.range(0));
    std::vector<ModalityFeatures> samples;
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        samples.push_back(batch.sample(j));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(average_transition_correlation(samples, kTransitionPairs[1]));
    }
}
BENCHMARK(BM_AverageTransitionCorrelation)->Arg(16)->Arg(250);

void BM_LossMsWithGradient(benchmark::State& state)
{
    Rng rng(3);
    const auto live = random_batch(rng, 128, state.range(0));
    FeatureBatch grad;
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_ms(live, &grad));
    }
}
BENCHMARK(BM_LossMsWithGradient)->Arg(16)->Arg(32);

void BM_TransitionLossesWithGradient(benchmark::State& state)
{
    Rng rng(4);
    const auto batch = random_batch(rng, 128, 16);
    const auto store = random_store(rng, 128);
    FeatureBatch grad;
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_ct(batch, store, &grad));
        benchmark::DoNotOptimize(loss_it(batch, store, &grad));
    }
}
BENCHMARK(BM_TransitionLossesWithGradient);

void BM_EncoderForwardBackward(benchmark::State& state)
{
    GeneratorConfig g;
    g.splits = {{"bench", {16, 16}}};
    const Dataset d = generate_synthetic_dataset(g, "bench");
    std::vector<const Tensor*> tensors;
    for (const auto& s : d.samples) {
        tensors.push_back(&s.tensor(ModalityId::Rgb));
    }
    const ImageBatch images = pack_images(tensors);
    const auto params = ModelParams::initialize(EncoderConfig{}, false, 5);
    ParamGrads grads = params.zero_grads();
    for (auto _ : state) {
        EncoderTape tape;
        const Matrix f = encoder_forward(params, EncoderSlot::Rgb, images, &tape);
        encoder_backward(params, EncoderSlot::Rgb, tape, Matrix::Ones(f.rows(), f.cols()), grads);
        benchmark::DoNotOptimize(grads);
    }
    state.SetItemsProcessed(state.iterations() * images.n);
}
BENCHMARK(BM_EncoderForwardBackward)->Unit(benchmark::kMillisecond);

void BM_ScoreBatch(benchmark::State& state)
{
    Rng rng(6);
    const auto batch = random_batch(rng, 128, 500);
    const auto store = random_store(rng, 128);
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_batch(batch, store));
    }
}
BENCHMARK(BM_ScoreBatch)->Unit(benchmark::kMicrosecond);

void BM_AucAndYouden(benchmark::State& state)
{
    Rng rng(7);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> scores(n);
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i % 2 == 0 ? Label::Live : Label::Spoof;
        scores[i] = rng.normal() + (i % 2 == 0 ? 0.0 : 1.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(auc(scores, labels));
        benchmark::DoNotOptimize(youden_threshold(scores, labels));
    }
}
BENCHMARK(BM_AucAndYouden)->Arg(500)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();

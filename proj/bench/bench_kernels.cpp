// Copyright 2026 The qrkernel Authors
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

// Serial reference versus OpenMP kernels: window featurization and Gram assembly.

#include <benchmark/benchmark.h>

#include "qrk/kernel.hpp"
#include "qrk/measure.hpp"
#include "qrk/rng.hpp"

namespace {

struct Fixture {
    qrk::ReservoirConfig config = qrk::ReservoirConfig::make(5, 3, qrk::Topology::ring(5), 11);
    qrk::JlProjector projector = qrk::JlProjector::make(5, 3, 11);
    qrk::ObservableSet obs = qrk::ObservableSet::all_local(5, 2);
    qrk::MeasurementConfig meas;

    std::vector<qrk::Window> windows(std::size_t count) const {
        qrk::Rng rng(99);
        std::vector<qrk::Window> out;
        for (std::size_t i = 0; i < count; ++i) {
            qrk::Window w(25, 3);
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform_open(-1.0, 1.0);
            out.push_back(w);
        }
        return out;
    }
};

Eigen::MatrixXd random_features(Eigen::Index n) {
    qrk::Rng rng(5);
    Eigen::MatrixXd f(n, 315);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.uniform_open(-1.0, 1.0);
    return f;
}

void BM_FeaturizeSerial(benchmark::State& state) {
    const Fixture fx;
    const auto ws = fx.windows(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(qrk::featurize_serial(ws, fx.config, fx.projector, fx.obs, fx.meas));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FeaturizeParallel(benchmark::State& state) {
    const Fixture fx;
    const auto ws = fx.windows(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(qrk::featurize(ws, fx.config, fx.projector, fx.obs, fx.meas));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FeaturizeShadowsParallel(benchmark::State& state) {
    Fixture fx;
    fx.meas.backend = qrk::Backend::Shadows;
    const auto ws = fx.windows(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(qrk::featurize(ws, fx.config, fx.projector, fx.obs, fx.meas));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GramSerial(benchmark::State& state) {
    const Eigen::MatrixXd f = random_features(state.range(0));
    const qrk::MaternParams p{2.5, 3.0};
    for (auto _ : state) benchmark::DoNotOptimize(qrk::gram_serial(p, f));
}

void BM_GramParallel(benchmark::State& state) {
    const Eigen::MatrixXd f = random_features(state.range(0));
    const qrk::MaternParams p{2.5, 3.0};
    for (auto _ : state) benchmark::DoNotOptimize(qrk::gram(p, f));
}

void BM_GramGeneralOrder(benchmark::State& state) {
    const Eigen::MatrixXd f = random_features(state.range(0));
    const qrk::MaternParams p{1.7, 3.0};
    for (auto _ : state) benchmark::DoNotOptimize(qrk::gram(p, f));
}

}  // namespace

BENCHMARK(BM_FeaturizeSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeaturizeParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeaturizeShadowsParallel)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramSerial)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramGeneralOrder)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

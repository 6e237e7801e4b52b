// Copyright 2026 The qdots Authors.
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

#include <benchmark/benchmark.h>

#include "qdots/born_stats.hpp"
#include "qdots/circuit.hpp"
#include "qdots/linalg.hpp"
#include "qdots/stabilized_product.hpp"
#include "qdots/weak_theory.hpp"

namespace {

void BM_HaarUnitary(benchmark::State& state) {
  qdots::RngStream rng(1, 0);
  const auto n = static_cast<qdots::Index>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qdots::sample_haar_unitary(n, rng));
}
BENCHMARK(BM_HaarUnitary)->RangeMultiplier(2)->Range(8, 128);

void BM_ModelIIStep(benchmark::State& state) {
  qdots::CircuitConfig cfg;
  cfg.model = qdots::Model::kModelII;
  cfg.L = static_cast<int>(state.range(0));
  cfg.p = 0.5;
  qdots::RngStream rng(2, 0);
  qdots::StabilizedProduct prod(cfg.N());
  for (auto _ : state) benchmark::DoNotOptimize(qdots::step_projective(prod, cfg, rng));
}
BENCHMARK(BM_ModelIIStep)->DenseRange(4, 8, 2);

void BM_WeakStep(benchmark::State& state) {
  qdots::CircuitConfig cfg;
  cfg.model = qdots::Model::kWeak;
  cfg.L = static_cast<int>(state.range(0));
  cfg.p = 0.5;
  cfg.epsilon = 0.05;
  qdots::RngStream rng(3, 0);
  qdots::StabilizedProduct prod(cfg.N());
  for (auto _ : state) qdots::step_weak(prod, cfg, rng);
}
BENCHMARK(BM_WeakStep)->DenseRange(4, 6, 2);

void BM_LogBornPdf(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  double x = -20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qdots::log_born_pdf_exact(64, 8, t, x));
    x = x < -60.0 ? -20.0 : x - 0.37;
  }
}
BENCHMARK(BM_LogBornPdf)->Arg(1)->Arg(2)->Arg(5)->Arg(20);

void BM_IntegralEquation(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qdots::solve_integral_equation(0.1, 50, grid));
}
BENCHMARK(BM_IntegralEquation)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

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

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace qdots {

// Deterministic random stream keyed by (seed, stream_id). Trajectory k of an
// experiment always uses stream_id k, so results do not depend on how work is
// scheduled across threads. Not thread-safe; each worker owns its stream.
class RngStream {
 public:
  using Engine = std::mt19937_64;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Derive an independent child stream, e.g. one per Metropolis chain.
  RngStream split(std::uint64_t child) const;

  double uniform();                  // [0, 1)
  double normal();                   // N(0, 1)
  std::complex<double> complex_normal();  // density exp(-|v|^2)/pi
  bool bernoulli(double p);

  Engine& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  Engine engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace qdots

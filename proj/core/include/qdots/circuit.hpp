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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdots/linalg.hpp"
#include "qdots/rng.hpp"
#include "qdots/stabilized_product.hpp"

namespace qdots {

enum class Model {
  kModelI,   // each qubit measured independently with probability p
  kModelII,  // exactly pL qubits measured per layer
  kWeak,     // weak measurements of strength epsilon on pL qubits per layer
};

enum class OutcomePolicy {
  kFixedPlus,  // every measured qubit reports +1
  kUniform,    // outcomes drawn uniformly, independent of the state
};

const char* to_string(Model m);
Model parse_model(const std::string& name);

struct CircuitConfig {
  int L = 2;
  double p = 0.5;
  Model model = Model::kModelII;
  double epsilon = 0.0;
  int t_max = 10;
  int n_traj = 1;
  std::uint64_t seed = 0;

  OutcomePolicy outcomes = OutcomePolicy::kFixedPlus;
  // 0 selects the geometric recording grid (1, 2, 4, ..., t_max).
  int record_every = 0;
  // Born probabilities of the pure initial state |0...0>; projective models only.
  bool track_born = true;
  // Directions with log(s_n) - log(s_1) below -rank_floor are not counted in
  // SingularSpectrum::rank.
  double rank_floor = 200.0;

  Index N() const { return Index{1} << L; }
  // pL, rounded; only meaningful for ModelII and Weak.
  int measured_per_layer() const;
  // 2^{(1-p)L} for ModelII.
  Index M() const { return Index{1} << (L - measured_per_layer()); }

  // Throws DomainError (or NotImplemented for weak-model Born tracking).
  void validate() const;
};

struct SingularSpectrum {
  int t = 0;
  std::vector<double> log_sigma;  // descending
  int rank = 0;
};

struct LayerMeta {
  int measured = 0;
  std::uint64_t measured_mask = 0;
  std::uint64_t outcome_bits = 0;
  Index rank_after = 0;
  // log p(m_t | m_{t-1} ... m_1); NaN when Born tracking is off.
  double log_born_factor = 0.0;
};

struct TrajectoryRecord {
  CircuitConfig config;
  std::uint64_t stream_id = 0;
  std::vector<SingularSpectrum> spectra;
  double born_log_prob = 0.0;
  std::vector<double> born_log_factors;
  std::vector<int> outcome_counts;
  // Model I: first step at which the rank reached one.
  std::optional<int> stopping_time;
};

// Normalised pure state carried alongside the Kraus product for Born
// bookkeeping.
struct BornState {
  ComplexVector phi;
  double log_prob = 0.0;
};

// One Haar unitary layer followed by one projective measurement layer.
LayerMeta step_projective(StabilizedProduct& state, const CircuitConfig& cfg, RngStream& rng,
                          BornState* born = nullptr);

// One Haar unitary layer followed by the weak measurement layer on the first
// pL qubits (outcomes fixed to "up").
void step_weak(StabilizedProduct& state, const CircuitConfig& cfg, RngStream& rng);

// Diagonal of the weak measurement layer, 2^{-pL} (1 + Lambda), for all-up
// outcomes.
std::vector<double> weak_layer_diagonal(int L, int measured, double epsilon);

// Recording grid used by run_trajectory.
std::vector<int> recording_times(const CircuitConfig& cfg);

SingularSpectrum make_spectrum(const StabilizedProduct& state, double rank_floor);

TrajectoryRecord run_trajectory(const CircuitConfig& cfg, std::uint64_t stream_id);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean Model I rank-collapse time over cfg.n_traj trajectories, using the
// fact that a layer collapses the rank exactly when every qubit is measured.
MeanEstimate rank_collapse_time_mc(const CircuitConfig& cfg);

// Spectra of the Ginibre product G(t) = B_{t-1} ... B_1 with
// B = A / sqrt(N), A an M x M Ginibre matrix, at t = 1 .. t_max.
TrajectoryRecord run_ginibre_proxy(Index M, Index N, int t_max, std::uint64_t seed,
                                   std::uint64_t stream_id);

}  // namespace qdots

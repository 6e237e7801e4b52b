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

#include "qdots/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qdots/errors.hpp"

namespace qdots {
namespace {

constexpr double kIntegerTol = 1e-9;

std::uint64_t low_mask(int k) { return k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1; }

// Basis states b with (b & mask) == bits, ascending.
std::vector<Index> support_of(Index n, std::uint64_t mask, std::uint64_t bits) {
  std::vector<Index> out;
  for (Index b = 0; b < n; ++b) {
    if ((static_cast<std::uint64_t>(b) & mask) == bits) out.push_back(b);
  }
  return out;
}

std::uint64_t draw_outcomes(std::uint64_t mask, OutcomePolicy policy, RngStream& rng) {
  if (policy == OutcomePolicy::kFixedPlus) return 0;
  std::uint64_t bits = 0;
  for (int q = 0; q < 64; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    if ((mask & bit) && rng.bernoulli(0.5)) bits |= bit;
  }
  return bits;
}

// Rows `support` of U * [frame, extra] for a fresh Haar U, where `extra` is an
// optional unit vector. Returns the |S| x (r + extra) block.
ComplexMatrix haar_rows_times(const std::vector<Index>& support, const ComplexMatrix& frame,
                              const ComplexVector* extra, RngStream& rng) {
  const Index n = frame.rows();
  const Index r = frame.cols();
  const Index s = static_cast<Index>(support.size());
  const Index cols = r + (extra ? 1 : 0);

  if (s < cols) {
    // Rows S of a Haar unitary form the adjoint of an n x |S| Haar isometry.
    const ComplexMatrix w = sample_haar_isometry(n, s, rng);
    ComplexMatrix rhs(n, cols);
    rhs.leftCols(r) = frame;
    if (extra) rhs.col(r) = *extra;
    return w.adjoint() * rhs;
  }

  // U * [frame, extra] is itself an isometry; build it directly when the
  // extra vector lies in span(frame) or extend the frame by its complement.
  ComplexMatrix full(n, cols);
  if (!extra) {
    full = sample_haar_isometry(n, r, rng);
  } else {
    const ComplexVector c = frame.adjoint() * (*extra);
    const ComplexVector perp = *extra - frame * c;
    const double perp_norm = perp.norm();
    if (perp_norm < 1e-12) {
      const ComplexMatrix w = sample_haar_isometry(n, r, rng);
      full.leftCols(r) = w;
      full.col(r) = w * c;
    } else {
      const ComplexMatrix w = sample_haar_isometry(n, r + 1, rng);
      full.leftCols(r) = w.leftCols(r);
      full.col(r) = w.leftCols(r) * c + w.col(r) * perp_norm;
    }
  }
  ComplexMatrix out(s, cols);
  for (Index i = 0; i < s; ++i) out.row(i) = full.row(support[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

const char* to_string(Model m) {
  switch (m) {
    case Model::kModelI:
      return "model1";
    case Model::kModelII:
      return "model2";
    case Model::kWeak:
      return "weak";
  }
  return "unknown";
}

Model parse_model(const std::string& name) {
  if (name == "model1" || name == "I" || name == "ModelI") return Model::kModelI;
  if (name == "model2" || name == "II" || name == "ModelII") return Model::kModelII;
  if (name == "weak" || name == "Weak") return Model::kWeak;
  throw DomainError("unknown model '" + name + "' (expected model1, model2 or weak)");
}

int CircuitConfig::measured_per_layer() const {
  return static_cast<int>(std::lround(p * static_cast<double>(L)));
}

void CircuitConfig::validate() const {
  require(L >= 1 && L <= 14, "CircuitConfig: L must lie in [1, 14]");
  require(p >= 0.0 && p <= 1.0, "CircuitConfig: p must lie in [0, 1]");
  require(t_max >= 1, "CircuitConfig: t_max must be >= 1");
  require(n_traj >= 1, "CircuitConfig: n_traj must be >= 1");
  require(record_every >= 0, "CircuitConfig: record_every must be >= 0");
  require(rank_floor > 0.0, "CircuitConfig: rank_floor must be > 0");
  if (model != Model::kModelI) {
    const double pl = p * static_cast<double>(L);
    require(std::abs(pl - std::round(pl)) < kIntegerTol,
            "CircuitConfig: pL must be an integer for model2 and weak");
  }
  if (model == Model::kWeak) {
    require(epsilon >= 0.0 && epsilon <= 1.0, "CircuitConfig: epsilon must lie in [0, 1]");
    if (track_born) {
      throw NotImplemented("Born probabilities are not defined for the weak measurement model");
    }
  }
}

std::vector<double> weak_layer_diagonal(int L, int measured, double epsilon) {
  require(measured >= 0 && measured <= L, "weak_layer_diagonal: measured must lie in [0, L]");
  require(epsilon >= 0.0 && epsilon <= 1.0, "weak_layer_diagonal: epsilon must lie in [0, 1]");
  const std::size_t n = std::size_t{1} << L;
  std::vector<double> w(n, 1.0);
  for (std::size_t b = 0; b < n; ++b) {
    for (int q = 0; q < measured; ++q) {
      w[b] *= ((b >> q) & 1U) ? 0.5 * (1.0 - epsilon) : 0.5 * (1.0 + epsilon);
    }
  }
  return w;
}

LayerMeta step_projective(StabilizedProduct& state, const CircuitConfig& cfg, RngStream& rng,
                          BornState* born) {
  require(cfg.model != Model::kWeak, "step_projective: weak model has its own step");
  require(state.dim() == cfg.N(), "step_projective: state dimension does not match config");

  LayerMeta meta;
  if (cfg.model == Model::kModelII) {
    meta.measured = cfg.measured_per_layer();
    meta.measured_mask = low_mask(meta.measured);
  } else {
    for (int q = 0; q < cfg.L; ++q) {
      if (rng.bernoulli(cfg.p)) {
        meta.measured_mask |= std::uint64_t{1} << q;
        ++meta.measured;
      }
    }
  }
  meta.outcome_bits = draw_outcomes(meta.measured_mask, cfg.outcomes, rng);
  const auto support = support_of(cfg.N(), meta.measured_mask, meta.outcome_bits);

  const Index r = state.rank();
  const ComplexMatrix block =
      haar_rows_times(support, state.frame(), born ? &born->phi : nullptr, rng);
  state.absorb(support, block.leftCols(r));

  if (born) {
    const ComplexVector amp = block.col(r);
    const double f = amp.squaredNorm();
    if (!(f > 0.0)) throw RankCollapsed("measurement outcome has zero Born probability");
    meta.log_born_factor = std::log(f);
    born->log_prob += meta.log_born_factor;
    ComplexVector phi = ComplexVector::Zero(cfg.N());
    for (std::size_t i = 0; i < support.size(); ++i) {
      phi(support[i]) = amp(static_cast<Index>(i));
    }
    born->phi = phi / std::sqrt(f);
  } else {
    meta.log_born_factor = std::numeric_limits<double>::quiet_NaN();
  }
  meta.rank_after = state.rank();
  return meta;
}

void step_weak(StabilizedProduct& state, const CircuitConfig& cfg, RngStream& rng) {
  require(cfg.model == Model::kWeak, "step_weak: config is not a weak model");
  require(state.dim() == cfg.N(), "step_weak: state dimension does not match config");
  const auto w = weak_layer_diagonal(cfg.L, cfg.measured_per_layer(), cfg.epsilon);

  std::vector<Index> support;
  for (std::size_t b = 0; b < w.size(); ++b) {
    if (w[b] > 0.0) support.push_back(static_cast<Index>(b));
  }
  ComplexMatrix block = haar_rows_times(support, state.frame(), nullptr, rng);
  for (Index i = 0; i < block.rows(); ++i) block.row(i) *= w[static_cast<std::size_t>(support[static_cast<std::size_t>(i)])];
  state.absorb(support, block);
}

std::vector<int> recording_times(const CircuitConfig& cfg) {
  std::vector<int> out;
  if (cfg.record_every > 0) {
    for (int t = cfg.record_every; t <= cfg.t_max; t += cfg.record_every) out.push_back(t);
  } else {
    for (long t = 1; t <= cfg.t_max; t *= 2) out.push_back(static_cast<int>(t));
  }
  if (out.empty() || out.back() != cfg.t_max) out.push_back(cfg.t_max);
  return out;
}

SingularSpectrum make_spectrum(const StabilizedProduct& state, double rank_floor) {
  SingularSpectrum spec;
  spec.t = state.steps();
  spec.log_sigma = state.log_singular_values();
  const double top = spec.log_sigma.empty() ? 0.0 : spec.log_sigma.front();
  spec.rank = static_cast<int>(std::count_if(spec.log_sigma.begin(), spec.log_sigma.end(),
                                             [&](double v) { return v - top >= -rank_floor; }));
  return spec;
}

TrajectoryRecord run_trajectory(const CircuitConfig& cfg, std::uint64_t stream_id) {
  cfg.validate();
  RngStream rng(cfg.seed, stream_id);
  StabilizedProduct state(cfg.N());

  TrajectoryRecord rec;
  rec.config = cfg;
  rec.stream_id = stream_id;
  const auto times = recording_times(cfg);
  auto next = times.begin();

  std::optional<BornState> born;
  if (cfg.track_born && cfg.model != Model::kWeak) {
    born.emplace();
    born->phi = ComplexVector::Zero(cfg.N());
    born->phi(0) = 1.0;
  }

  for (int t = 1; t <= cfg.t_max; ++t) {
    if (cfg.model == Model::kWeak) {
      step_weak(state, cfg, rng);
      rec.outcome_counts.push_back(cfg.measured_per_layer());
    } else {
      const LayerMeta meta = step_projective(state, cfg, rng, born ? &*born : nullptr);
      rec.outcome_counts.push_back(meta.measured);
      if (born) rec.born_log_factors.push_back(meta.log_born_factor);
    }
    const bool collapsed =
        cfg.model == Model::kModelI && state.rank() == 1 && !rec.stopping_time;
    if (collapsed) rec.stopping_time = t;
    if ((next != times.end() && *next == t) || collapsed) {
      rec.spectra.push_back(make_spectrum(state, cfg.rank_floor));
      while (next != times.end() && *next <= t) ++next;
    }
    if (collapsed) break;
  }
  rec.born_log_prob = born ? born->log_prob : 0.0;
  return rec;
}

MeanEstimate rank_collapse_time_mc(const CircuitConfig& cfg) {
  require(cfg.model == Model::kModelI, "rank_collapse_time_mc: requires model1");
  require(cfg.n_traj >= 2, "rank_collapse_time_mc: needs at least two trajectories");
  if (!(cfg.p > 0.0)) throw DomainError("rank_collapse_time_mc: p = 0 never collapses");
  require(cfg.p <= 1.0, "rank_collapse_time_mc: p must lie in (0, 1]");
  const double q = std::pow(cfg.p, cfg.L);

  double sum = 0.0;
  double sum2 = 0.0;
  for (int k = 0; k < cfg.n_traj; ++k) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(k));
    double t = 1.0;
    if (q < 1.0) {
      std::geometric_distribution<long long> failures(q);
      t += static_cast<double>(failures(rng.engine()));
    }
    sum += t;
    sum2 += t * t;
  }
  const double n = static_cast<double>(cfg.n_traj);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

TrajectoryRecord run_ginibre_proxy(Index M, Index N, int t_max, std::uint64_t seed,
                                   std::uint64_t stream_id) {
  require(M >= 1 && N >= M, "run_ginibre_proxy: need 1 <= M <= N");
  require(t_max >= 1, "run_ginibre_proxy: t_max must be >= 1");
  RngStream rng(seed, stream_id);
  StabilizedProduct state(M);
  TrajectoryRecord rec;
  rec.stream_id = stream_id;
  rec.config.t_max = t_max;
  rec.config.seed = seed;
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (int t = 1; t <= t_max; ++t) {
    if (t > 1) state.apply(sample_ginibre(M, M, rng) * scale);
    SingularSpectrum spec = make_spectrum(state, rec.config.rank_floor);
    spec.t = t;
    rec.spectra.push_back(std::move(spec));
  }
  return rec;
}

}  // namespace qdots

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
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdots/circuit.hpp"
#include "qdots/errors.hpp"

namespace qdots::tools {

// Malformed configuration or flag combination. Maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// One or more workers threw. `failed_ids` names the trajectories (or grid
// points) that failed; `numerical` is false when every failure was a domain
// error.
class TrajectoryFailure : public Error {
 public:
  TrajectoryFailure(const std::string& what, std::vector<std::uint64_t> failed_ids,
                    bool numerical)
      : Error(what), failed_ids_(std::move(failed_ids)), numerical_(numerical) {}
  const std::vector<std::uint64_t>& failed_ids() const { return failed_ids_; }
  bool numerical() const { return numerical_; }

 private:
  std::vector<std::uint64_t> failed_ids_;
  bool numerical_;
};

enum class Artifact { kSpectra, kBorn, kLyapunov, kEntropy, kFp, kIeSolve };
enum class OutputFormat { kCsv, kJson };
enum class FpMethod { kMetropolis, kLangevin };

const char* to_string(Artifact a);
Artifact parse_artifact(const std::string& name);
const char* to_string(OutputFormat f);
OutputFormat parse_format(const std::string& name);

// Parameters of the circuit-free parts (Fokker-Planck samplers and the
// integral equation).
struct AnalyticParams {
  long N = 4;
  std::vector<double> s_grid{0.1, 1.0};
  int grid_size = 1000;
  int n_samples = 1000;
  FpMethod fp_method = FpMethod::kMetropolis;
  int burn_in_sweeps = 10000;
  int pilot_sweeps = 20000;
  int n_walkers = 200;
  double dt_s = 1e-3;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::optional<CircuitConfig> circuit;
  AnalyticParams analytic;
  std::vector<Artifact> outputs{Artifact::kSpectra};
  std::vector<double> alphas{2.0};
  // Lyapunov / purification fit window; the default is [t_max/4, t_max].
  std::optional<std::pair<int, int>> fit_window;
  std::filesystem::path output_dir = "qdots_out";
  OutputFormat format = OutputFormat::kCsv;

  bool wants(Artifact a) const;
  // Throws UsageError.
  void validate() const;
};

// INI-style file with [experiment], [circuit] and [analytic] sections.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec load_spec(const std::filesystem::path& path);

// Canonical key = value text of every field that affects numeric output
// (excludes jobs and output_dir), and its FNV-1a digest.
std::string canonical_text(const ExperimentSpec& spec);
std::string spec_hash(const ExperimentSpec& spec);

// Numeric table, written as CSV with one header row or as JSON
// {"columns": [...], "rows": [[...], ...]}. Values round-trip exactly.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::size_t column(const std::string& name) const;
};

void write_table(const Table& table, const std::filesystem::path& path, OutputFormat format);
Table read_table(const std::filesystem::path& path);

struct ManifestFile {
  std::string artifact;
  std::string path;  // relative to the output directory
  long rows = 0;
};

struct ResultManifest {
  std::string name;
  std::string spec_hash;
  std::uint64_t seed = 0;
  std::string provenance;
  OutputFormat format = OutputFormat::kCsv;
  std::vector<ManifestFile> files;
  double wall_seconds = 0.0;
  std::filesystem::path output_dir;
  // Spec parameters the report needs (N, M, model, alphas, ...).
  nlohmann::json parameters;
};

nlohmann::json to_json(const ResultManifest& m);
ResultManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& dir);
// Reads <dir>/manifest.json.
ResultManifest load_manifest(const std::filesystem::path& dir);

// Runs task(i) for i = 0..n-1 on `jobs` threads. Each index writes only its
// own slot, so the result does not depend on the thread count. Failures are
// collected and rethrown together as TrajectoryFailure after the join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task,
                  const char* label = "trajectory");

std::vector<TrajectoryRecord> run_trajectories(const CircuitConfig& cfg, int jobs);

ResultManifest run(const ExperimentSpec& spec);

struct SummaryDocument {
  std::string text;
  nlohmann::json json;
};

// Tables of estimated vs exact quantities built from the files listed in the
// manifest. Throws Error listing any missing file, and on an empty manifest.
SummaryDocument report(const ResultManifest& manifest);

}  // namespace qdots::tools

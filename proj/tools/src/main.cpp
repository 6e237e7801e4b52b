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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qdots/tools/harness.hpp"

namespace {

using namespace qdots;
using namespace qdots::tools;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment file (INI sections)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Master seed; trajectory k uses stream k");
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory (default $QDOTS_OUT_DIR or ./qdots_out)");
  cmd->add_option("--format", f.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
}

// Built-in experiment for a subcommand run without --config.
ExperimentSpec default_spec(const std::string& command) {
  ExperimentSpec spec;
  spec.name = command;
  CircuitConfig c;
  c.L = 4;
  c.p = 0.5;
  c.model = Model::kModelII;
  c.t_max = 40;
  c.n_traj = 100;
  c.record_every = 1;
  if (command == "simulate") {
    spec.circuit = c;
    spec.outputs = {Artifact::kSpectra};
  } else if (command == "lyapunov" || command == "entropy" || command == "born") {
    spec.circuit = c;
  } else if (command == "ie-solve") {
    spec.analytic.N = 50;
    spec.analytic.s_grid = {0.0002, 0.002, 0.02, 0.2};
  }
  return spec;
}

ExperimentSpec resolve_spec(const std::string& command, const CommonFlags& f,
                            std::optional<Artifact> forced) {
  ExperimentSpec spec = f.config.empty() ? default_spec(command) : load_spec(f.config);
  bool out_set = !f.config.empty() && spec.output_dir != ExperimentSpec{}.output_dir;
  if (forced) spec.outputs = {*forced};
  if (f.seed) spec.seed = *f.seed;
  if (f.jobs) spec.jobs = *f.jobs;
  if (!f.format.empty()) spec.format = parse_format(f.format);
  if (!f.out.empty()) {
    spec.output_dir = f.out;
    out_set = true;
  }
  if (!out_set) {
    const char* env = std::getenv("QDOTS_OUT_DIR");
    spec.output_dir = env && *env ? std::filesystem::path(env) / spec.name
                                  : std::filesystem::path("qdots_out") / spec.name;
  }
  return spec;
}

int print_report(const ResultManifest& m, OutputFormat format) {
  const auto doc = report(m);
  std::ofstream(m.output_dir / "report.json") << doc.json.dump(2) << "\n";
  if (format == OutputFormat::kJson) {
    std::cout << doc.json.dump(2) << "\n";
  } else {
    std::cout << doc.text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdots: monitored Haar-circuit simulator and analytics"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    std::optional<Artifact> forced;
  };
  const Command commands[] = {
      {"simulate", "Run the experiment file with its own output list", std::nullopt},
      {"lyapunov", "Lyapunov spectrum and purification time", Artifact::kLyapunov},
      {"born", "Per-layer Born factors", Artifact::kBorn},
      {"entropy", "Renyi entropy curves", Artifact::kEntropy},
      {"fp-sample", "Metropolis samples of the Fokker-Planck solution", Artifact::kFp},
      {"fp-langevin", "Langevin walkers of the Fokker-Planck equation", Artifact::kFp},
      {"ie-solve", "Level density from the integral equation", Artifact::kIeSolve},
  };

  CommonFlags flags;
  std::string selected;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, flags);
    sub->callback([&selected, name = c.name] { selected = name; });
  }
  std::string report_dir;
  std::string report_format = "csv";
  auto* rep = app.add_subcommand("report", "Summarize a finished run");
  rep->add_option("dir", report_dir, "Output directory holding manifest.json")->required();
  rep->add_option("--format", report_format, "csv prints text, json prints the JSON twin")
      ->check(CLI::IsMember({"csv", "json"}));
  rep->callback([&selected] { selected = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (selected == "report") {
      return print_report(load_manifest(report_dir), parse_format(report_format));
    }
    std::optional<Artifact> forced;
    for (const auto& c : commands) {
      if (selected == c.name) forced = c.forced;
    }
    ExperimentSpec spec = resolve_spec(selected, flags, forced);
    if (selected == "fp-sample") spec.analytic.fp_method = FpMethod::kMetropolis;
    if (selected == "fp-langevin") spec.analytic.fp_method = FpMethod::kLangevin;
    const auto manifest = run(spec);
    std::cerr << "wrote " << manifest.files.size() << " files to " << spec.output_dir.string()
              << " in " << manifest.wall_seconds << " s\n";
    return print_report(manifest, spec.format);
  } catch (const TrajectoryFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.numerical() ? kExitNumerical : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NotImplemented& e) {
    std::cerr << "not implemented: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

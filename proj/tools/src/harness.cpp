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

#include "qdots/tools/harness.hpp"

#include <algorithm>
#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "qdots/born_stats.hpp"
#include "qdots/entropy.hpp"
#include "qdots/spectral_stats.hpp"
#include "qdots/weak_theory.hpp"
#include "provenance.hpp"


namespace qdots::tools {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0') throw UsageError("config: " + key + " is not a number: '" + v + "'");
  return x;
}

long parse_long(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long x = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw UsageError("config: " + key + " is not an integer: '" + v + "'");
  }
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw UsageError("config: " + key + " is not an unsigned integer: '" + v + "'");
  }
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw UsageError("config: " + key + " is not a boolean: '" + v + "'");
}

int to_int(const std::string& key, long v) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw UsageError("config: " + key + " out of range");
  }
  return static_cast<int>(v);
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string extension(OutputFormat f) { return f == OutputFormat::kCsv ? ".csv" : ".json"; }

std::string s_tag(double s) {
  std::ostringstream os;
  os << "s" << std::setprecision(6) << s;
  return os.str();
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double json_number(const json& j) { return j.is_number() ? j.get<double>() : kNaN; }

}  // namespace

const char* to_string(Artifact a) {
  switch (a) {
    case Artifact::kSpectra: return "spectra";
    case Artifact::kBorn: return "born";
    case Artifact::kLyapunov: return "lyapunov";
    case Artifact::kEntropy: return "entropy";
    case Artifact::kFp: return "fp";
    case Artifact::kIeSolve: return "iesolve";
  }
  return "?";
}

Artifact parse_artifact(const std::string& name) {
  for (Artifact a : {Artifact::kSpectra, Artifact::kBorn, Artifact::kLyapunov, Artifact::kEntropy,
                     Artifact::kFp, Artifact::kIeSolve}) {
    if (name == to_string(a)) return a;
  }
  throw UsageError("unknown output '" + name +
                   "' (expected spectra, born, lyapunov, entropy, fp, iesolve)");
}

const char* to_string(OutputFormat f) { return f == OutputFormat::kCsv ? "csv" : "json"; }

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw UsageError("unknown format '" + name + "' (expected csv or json)");
}

bool ExperimentSpec::wants(Artifact a) const {
  return std::find(outputs.begin(), outputs.end(), a) != outputs.end();
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw UsageError("experiment: name must be nonempty");
  if (outputs.empty()) throw UsageError("experiment: no outputs requested");
  if (jobs < 1) throw UsageError("experiment: jobs must be >= 1");
  for (double a : alphas) {
    if (!(a > 0.0)) throw UsageError("experiment: alphas must be > 0");
  }
  const bool circuit_outputs = wants(Artifact::kSpectra) || wants(Artifact::kBorn) ||
                               wants(Artifact::kLyapunov) || wants(Artifact::kEntropy);
  if (circuit_outputs && !circuit) {
    throw UsageError("experiment: spectra/born/lyapunov/entropy outputs need a [circuit] section");
  }
  if (circuit) {
    try {
      circuit->validate();
    } catch (const DomainError& e) {
      throw UsageError(std::string("experiment: ") + e.what());
    }
    const Model m = circuit->model;
    if (wants(Artifact::kBorn) && (m == Model::kWeak || !circuit->track_born)) {
      throw UsageError("experiment: born output needs a projective model with track_born = true");
    }
    if ((wants(Artifact::kLyapunov) || wants(Artifact::kEntropy)) && m == Model::kModelI) {
      throw UsageError(
          "experiment: lyapunov and entropy outputs are not available for model1 (trajectories stop "
          "at rank collapse)");
    }
    if (fit_window) {
      const auto [lo, hi] = *fit_window;
      if (!(lo >= 1 && lo < hi && hi <= circuit->t_max)) {
        throw UsageError("experiment: fit_window must satisfy 1 <= lo < hi <= t_max");
      }
    }
  }
  if (wants(Artifact::kFp) || wants(Artifact::kIeSolve)) {
    const auto& a = analytic;
    if (a.N < 1) throw UsageError("experiment: analytic N must be >= 1");
    if (a.s_grid.empty()) throw UsageError("experiment: analytic s_grid is empty");
    for (double s : a.s_grid) {
      if (!(s > 0.0)) throw UsageError("experiment: every s in s_grid must be > 0");
    }
    if (wants(Artifact::kIeSolve) && (a.grid_size < 100 || a.grid_size % 2 != 0)) {
      throw UsageError("experiment: grid_size must be even and >= 100");
    }
    if (wants(Artifact::kFp)) {
      if (a.fp_method == FpMethod::kMetropolis && a.n_samples < 1) {
        throw UsageError("experiment: n_samples must be >= 1");
      }
      if (a.fp_method == FpMethod::kLangevin && (a.n_walkers < 1 || !(a.dt_s > 0.0))) {
        throw UsageError("experiment: n_walkers must be >= 1 and dt_s > 0");
      }
    }
  }
}

ExperimentSpec parse_spec(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }

  ExperimentSpec spec;
  bool track_born_set = false;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw UsageError("config: key '" + section + "' outside a section");
    }
    if (section == "circuit" && !spec.circuit) spec.circuit.emplace();
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      const std::string full = section + "." + key;
      if (section == "experiment") {
        if (key == "name") spec.name = trim(v);
        else if (key == "seed") spec.seed = parse_u64(full, v);
        else if (key == "jobs") spec.jobs = to_int(full, parse_long(full, v));
        else if (key == "output_dir") spec.output_dir = trim(v);
        else if (key == "format") spec.format = parse_format(trim(v));
        else if (key == "outputs") {
          spec.outputs.clear();
          for (const auto& item : split_list(v)) spec.outputs.push_back(parse_artifact(item));
        } else if (key == "alphas") spec.alphas = parse_doubles(full, v);
        else if (key == "fit_window") {
          const auto w = parse_doubles(full, v);
          if (w.size() != 2) throw UsageError("config: fit_window needs two steps 'lo, hi'");
          spec.fit_window = {static_cast<int>(w[0]), static_cast<int>(w[1])};
        } else throw UsageError("config: unknown key " + full);
      } else if (section == "circuit") {
        auto& c = *spec.circuit;
        try {
          if (key == "model") c.model = parse_model(trim(v));
          else if (key == "L") c.L = to_int(full, parse_long(full, v));
          else if (key == "p") c.p = parse_double(full, v);
          else if (key == "epsilon") c.epsilon = parse_double(full, v);
          else if (key == "t_max") c.t_max = to_int(full, parse_long(full, v));
          else if (key == "n_traj") c.n_traj = to_int(full, parse_long(full, v));
          else if (key == "record_every") c.record_every = to_int(full, parse_long(full, v));
          else if (key == "rank_floor") c.rank_floor = parse_double(full, v);
          else if (key == "track_born") {
            c.track_born = parse_bool(full, v);
            track_born_set = true;
          } else if (key == "outcomes") {
            const std::string o = trim(v);
            if (o == "fixed") c.outcomes = OutcomePolicy::kFixedPlus;
            else if (o == "uniform") c.outcomes = OutcomePolicy::kUniform;
            else throw UsageError("config: outcomes must be 'fixed' or 'uniform'");
          } else throw UsageError("config: unknown key " + full);
        } catch (const DomainError& e) {
          throw UsageError(std::string("config: ") + e.what());
        }
      } else if (section == "analytic") {
        auto& a = spec.analytic;
        if (key == "N") a.N = parse_long(full, v);
        else if (key == "s_grid") a.s_grid = parse_doubles(full, v);
        else if (key == "grid_size") a.grid_size = to_int(full, parse_long(full, v));
        else if (key == "n_samples") a.n_samples = to_int(full, parse_long(full, v));
        else if (key == "burn_in_sweeps") a.burn_in_sweeps = to_int(full, parse_long(full, v));
        else if (key == "pilot_sweeps") a.pilot_sweeps = to_int(full, parse_long(full, v));
        else if (key == "n_walkers") a.n_walkers = to_int(full, parse_long(full, v));
        else if (key == "dt_s") a.dt_s = parse_double(full, v);
        else if (key == "fp_method") {
          const std::string m = trim(v);
          if (m == "metropolis") a.fp_method = FpMethod::kMetropolis;
          else if (m == "langevin") a.fp_method = FpMethod::kLangevin;
          else throw UsageError("config: fp_method must be 'metropolis' or 'langevin'");
        } else throw UsageError("config: unknown key " + full);
      } else {
        throw UsageError("config: unknown section [" + section + "]");
      }
    }
  }
  if (spec.circuit && spec.circuit->model == Model::kWeak && !track_born_set) {
    spec.circuit->track_born = false;
  }
  return spec;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse_spec(in);
}

std::string canonical_text(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << "name=" << spec.name << "\nseed=" << spec.seed << "\nformat=" << to_string(spec.format)
     << "\noutputs=";
  for (Artifact a : spec.outputs) os << to_string(a) << ";";
  os << "\nalphas=";
  for (double a : spec.alphas) os << fmt(a) << ";";
  if (spec.fit_window) os << "\nfit_window=" << spec.fit_window->first << ";" << spec.fit_window->second;
  if (spec.circuit) {
    const auto& c = *spec.circuit;
    os << "\ncircuit.model=" << to_string(c.model) << "\ncircuit.L=" << c.L
       << "\ncircuit.p=" << fmt(c.p) << "\ncircuit.epsilon=" << fmt(c.epsilon)
       << "\ncircuit.t_max=" << c.t_max << "\ncircuit.n_traj=" << c.n_traj
       << "\ncircuit.outcomes=" << (c.outcomes == OutcomePolicy::kUniform ? "uniform" : "fixed")
       << "\ncircuit.record_every=" << c.record_every << "\ncircuit.track_born=" << c.track_born
       << "\ncircuit.rank_floor=" << fmt(c.rank_floor);
  }
  if (spec.wants(Artifact::kFp) || spec.wants(Artifact::kIeSolve)) {
    const auto& a = spec.analytic;
    os << "\nanalytic.N=" << a.N << "\nanalytic.s_grid=";
    for (double s : a.s_grid) os << fmt(s) << ";";
    os << "\nanalytic.grid_size=" << a.grid_size << "\nanalytic.n_samples=" << a.n_samples
       << "\nanalytic.fp_method=" << (a.fp_method == FpMethod::kLangevin ? "langevin" : "metropolis")
       << "\nanalytic.burn_in_sweeps=" << a.burn_in_sweeps
       << "\nanalytic.pilot_sweeps=" << a.pilot_sweeps << "\nanalytic.n_walkers=" << a.n_walkers
       << "\nanalytic.dt_s=" << fmt(a.dt_s);
  }
  os << "\n";
  return os.str();
}

std::string spec_hash(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical_text(spec));
  return os.str();
}

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error("Table::add: row width does not match header");
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

void write_table(const Table& table, const fs::path& path, OutputFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  if (format == OutputFormat::kCsv) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      out << (i ? "," : "") << table.columns[i];
    }
    out << "\n";
    std::string line;
    for (const auto& row : table.rows) {
      line.clear();
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) line += ',';
        line += fmt(row[i]);
      }
      out << line << "\n";
    }
  } else {
    json j;
    j["columns"] = table.columns;
    j["rows"] = json::array();
    for (const auto& row : table.rows) {
      json r = json::array();
      for (double v : row) r.push_back(nan_safe(v));
      j["rows"].push_back(std::move(r));
    }
    out << j.dump() << "\n";
  }
  if (!out) throw Error("write failed for " + path.string());
}

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  Table t;
  if (path.extension() == ".json") {
    const json j = json::parse(in);
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
      std::vector<double> row;
      for (const auto& v : r) row.push_back(json_number(v));
      t.add(std::move(row));
    }
    return t;
  }
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header row");
  t.columns = split_list(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      row.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str()) throw Error(path.string() + ": bad number '" + cell + "'");
    }
    t.add(std::move(row));
  }
  return t;
}

json to_json(const ResultManifest& m) {
  json j;
  j["name"] = m.name;
  j["spec_hash"] = m.spec_hash;
  j["seed"] = m.seed;
  j["provenance"] = m.provenance;
  j["format"] = to_string(m.format);
  j["wall_seconds"] = m.wall_seconds;
  j["files"] = json::array();
  for (const auto& f : m.files) {
    j["files"].push_back({{"artifact", f.artifact}, {"path", f.path}, {"rows", f.rows}});
  }
  j["parameters"] = m.parameters;
  return j;
}

ResultManifest manifest_from_json(const json& j, const fs::path& dir) {
  ResultManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.spec_hash = j.at("spec_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.provenance = j.value("provenance", "");
    m.format = parse_format(j.value("format", "csv"));
    m.wall_seconds = j.value("wall_seconds", 0.0);
    for (const auto& f : j.at("files")) {
      m.files.push_back({f.at("artifact").get<std::string>(), f.at("path").get<std::string>(),
                         f.at("rows").get<long>()});
    }
    m.parameters = j.value("parameters", json::object());
  } catch (const json::exception& e) {
    throw UsageError(std::string("manifest: ") + e.what());
  }
  m.output_dir = dir;
  return m;
}

ResultManifest load_manifest(const fs::path& dir) {
  const fs::path p = dir / "manifest.json";
  std::ifstream in(p);
  if (!in) throw UsageError("no manifest at " + p.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("manifest " + p.string() + ": " + e.what());
  }
  return manifest_from_json(j, dir);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task,
                  const char* label) {
  std::vector<std::string> errors(n);
  std::vector<char> failed(n, 0);
  std::vector<char> numerical(n, 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (const DomainError& e) {
        failed[i] = 1;
        errors[i] = e.what();
      } catch (const NotImplemented& e) {
        failed[i] = 1;
        errors[i] = e.what();
      } catch (const std::exception& e) {
        failed[i] = 1;
        numerical[i] = 1;
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<std::uint64_t> ids;
  bool any_numerical = false;
  std::ostringstream msg;
  for (std::size_t i = 0; i < n; ++i) {
    if (!failed[i]) continue;
    if (ids.size() < 10) msg << "\n  " << label << " " << i << ": " << errors[i];
    ids.push_back(i);
    any_numerical = any_numerical || numerical[i];
  }
  if (!ids.empty()) {
    std::ostringstream head;
    head << ids.size() << " of " << n << " " << label << "(s) failed" << msg.str();
    if (ids.size() > 10) head << "\n  ...";
    throw TrajectoryFailure(head.str(), std::move(ids), any_numerical);
  }
}

std::vector<TrajectoryRecord> run_trajectories(const CircuitConfig& cfg, int jobs) {
  cfg.validate();
  std::vector<TrajectoryRecord> records(static_cast<std::size_t>(cfg.n_traj));
  parallel_for(records.size(), jobs, [&](std::size_t k) {
    records[k] = run_trajectory(cfg, static_cast<std::uint64_t>(k));
  });
  return records;
}

namespace {

struct RunContext {
  const ExperimentSpec& spec;
  ResultManifest& manifest;
  json& summary;

  void emit(const std::string& artifact, const std::string& stem, const Table& table) {
    const std::string file = stem + extension(spec.format);
    write_table(table, spec.output_dir / file, spec.format);
    manifest.files.push_back({artifact, file, static_cast<long>(table.rows.size())});
  }
};

std::vector<double> exact_lyapunov(const CircuitConfig& c) {
  if (c.model == Model::kModelII) return lyapunov_exact_projective(c.N(), c.M());
  if (c.model == Model::kWeak) return lyapunov_exact_weak(compute_gamma(c.L, c.p, c.epsilon));
  return {};
}

void circuit_outputs(RunContext& ctx, const CircuitConfig& cfg) {
  const auto& spec = ctx.spec;
  const auto records = run_trajectories(cfg, spec.jobs);

  if (spec.wants(Artifact::kSpectra)) {
    Table t{{"trajectory_id", "t", "mode_index", "value"}, {}};
    for (std::size_t k = 0; k < records.size(); ++k) {
      for (const auto& sp : records[k].spectra) {
        for (std::size_t n = 0; n < sp.log_sigma.size(); ++n) {
          t.add({static_cast<double>(k), static_cast<double>(sp.t), static_cast<double>(n + 1),
                 sp.log_sigma[n]});
        }
      }
    }
    ctx.emit("spectra", "spectra", t);
  }

  if (spec.wants(Artifact::kBorn)) {
    Table t{{"trajectory_id", "t", "log_factor"}, {}};
    for (std::size_t k = 0; k < records.size(); ++k) {
      const auto& f = records[k].born_log_factors;
      for (std::size_t i = 0; i < f.size(); ++i) {
        t.add({static_cast<double>(k), static_cast<double>(i + 1), f[i]});
      }
    }
    ctx.emit("born", "born", t);
  }

  if (spec.wants(Artifact::kLyapunov)) {
    const auto est = lyapunov_fit(records, spec.fit_window);
    const auto exact = exact_lyapunov(cfg);
    Table t{{"mode_index", "lambda_hat", "std_error", "lambda_exact", "z_score"}, {}};
    for (std::size_t n = 0; n < est.lambda_hat.size(); ++n) {
      const double ex = n < exact.size() ? exact[n] : kNaN;
      const double z = (est.lambda_hat[n] - ex) / est.std_error[n];
      t.add({static_cast<double>(n + 1), est.lambda_hat[n], est.std_error[n], ex, z});
    }
    ctx.emit("lyapunov", "lyapunov", t);

    const auto pur = purification_fit(records, spec.fit_window);
    Table p{{"t", "mean_log_nu", "log_mean_nu"}, {}};
    for (std::size_t i = 0; i < pur.t_grid.size(); ++i) {
      p.add({static_cast<double>(pur.t_grid[i]), pur.log_nu_series[i], pur.log_mean_nu_series[i]});
    }
    ctx.emit("purification", "purification", p);
    ctx.summary["purification"] = {{"tau_p_hat", nan_safe(pur.tau_p_hat)},
                                   {"tau_p_std_error", nan_safe(pur.tau_p_std_error)},
                                   {"tau_p_exact", nan_safe(pur.tau_p_exact)},
                                   {"tau_p_from_mean_nu", nan_safe(pur.tau_p_from_mean_nu)},
                                   {"t_window", {est.t_window.first, est.t_window.second}}};
  }

  if (spec.wants(Artifact::kEntropy)) {
    Table t{{"alpha", "t", "mean_S", "var_S", "mean_log_S", "theory"}, {}};
    std::optional<WeakParams> weak;
    if (cfg.model == Model::kWeak) weak = compute_gamma(cfg.L, cfg.p, cfg.epsilon);
    for (double alpha : spec.alphas) {
      const auto series = renyi_series(records, alpha);
      for (std::size_t i = 0; i < series.t_grid.size(); ++i) {
        const int ti = series.t_grid[i];
        // The projective short-time law only holds for t < M; past that the column is NaN.
        double theory = std::numeric_limits<double>::quiet_NaN();
        if (weak) {
          theory = vst_renyi(cfg.N(), weak->gamma, ti, alpha);
        } else if (ti < cfg.M()) {
          theory = renyi_short_time_prediction(cfg.M(), ti, alpha);
        }
        t.add({alpha, static_cast<double>(ti), series.mean_S[i], series.var_S[i],
               series.mean_log_S[i], theory});
      }
    }
    ctx.emit("entropy", "entropy", t);
  }

  if (cfg.model == Model::kModelI) {
    double sum = 0.0;
    double sum2 = 0.0;
    long collapsed = 0;
    for (const auto& r : records) {
      if (!r.stopping_time) continue;
      sum += *r.stopping_time;
      sum2 += static_cast<double>(*r.stopping_time) * *r.stopping_time;
      ++collapsed;
    }
    json rc{{"collapsed", collapsed},
            {"censored", static_cast<long>(records.size()) - collapsed},
            {"exact", 1.0 / std::pow(cfg.p, cfg.L)}};
    if (collapsed >= 2) {
      const double n = static_cast<double>(collapsed);
      const double mean = sum / n;
      rc["mean"] = mean;
      rc["std_error"] = std::sqrt(std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) / n);
    }
    ctx.summary["rank_collapse"] = rc;
  }
}

void fp_outputs(RunContext& ctx) {
  const auto& spec = ctx.spec;
  const auto& a = spec.analytic;
  const std::size_t ns = a.s_grid.size();
  std::vector<std::vector<ZState>> samples(ns);
  std::vector<json> diag(ns);
  parallel_for(ns, spec.jobs, [&](std::size_t i) {
    const double s = a.s_grid[i];
    if (a.fp_method == FpMethod::kMetropolis) {
      RngStream rng(spec.seed, i);
      FpSamplerOptions opts;
      opts.burn_in_sweeps = a.burn_in_sweeps;
      opts.pilot_sweeps = a.pilot_sweeps;
      auto res = fp_exact_sample(a.N, s, a.n_samples, rng, opts);
      diag[i] = {{"acceptance", res.acceptance},
                 {"tau_int", res.tau_int},
                 {"thin", res.thin},
                 {"diagnostics_flagged", res.diagnostics_flagged}};
      samples[i] = std::move(res.samples);
    } else {
      const std::uint64_t seed = spec.seed + 0x9E3779B97F4A7C15ULL * (i + 1);
      samples[i] = langevin_ensemble(a.N, s, a.n_walkers, a.dt_s, seed);
      diag[i] = json::object();
    }
  }, "s-grid point");

  const auto c = drift_velocities(a.N);
  json per_s = json::array();
  for (std::size_t i = 0; i < ns; ++i) {
    const double s = a.s_grid[i];
    Table t{{"sample_id", "mode_index", "z"}, {}};
    const auto& smp = samples[i];
    const std::size_t n_modes = static_cast<std::size_t>(a.N);
    std::vector<double> sum(n_modes, 0.0);
    std::vector<double> sum2(n_modes, 0.0);
    for (std::size_t k = 0; k < smp.size(); ++k) {
      for (std::size_t n = 0; n < n_modes; ++n) {
        const double z = smp[k].z[n];
        t.add({static_cast<double>(k), static_cast<double>(n + 1), z});
        sum[n] += z;
        sum2[n] += z * z;
      }
    }
    ctx.emit("fp", "fp_" + s_tag(s), t);
    const double cnt = static_cast<double>(smp.size());
    json modes = json::array();
    for (std::size_t n = 0; n < n_modes; ++n) {
      const double mean = sum[n] / cnt;
      const double var = cnt > 1.0 ? std::max(0.0, (sum2[n] - cnt * mean * mean) / (cnt - 1.0)) : 0.0;
      modes.push_back({{"mode_index", n + 1},
                       {"mean", mean},
                       {"std_error", std::sqrt(var / cnt)},
                       {"variance", var},
                       {"drift_c_n_s", c[n] * s}});
    }
    json entry{{"s", s}, {"n_samples", smp.size()}, {"modes", modes}};
    entry.update(diag[i]);
    per_s.push_back(entry);
  }
  ctx.summary["fp"] = {{"N", a.N},
                       {"method", a.fp_method == FpMethod::kLangevin ? "langevin" : "metropolis"},
                       {"grid", per_s}};
}

void ie_outputs(RunContext& ctx) {
  const auto& spec = ctx.spec;
  const auto& a = spec.analytic;
  const std::size_t ns = a.s_grid.size();
  std::vector<IeSolution> sol(ns);
  parallel_for(ns, spec.jobs, [&](std::size_t i) {
    sol[i] = solve_integral_equation(a.s_grid[i], a.N, a.grid_size);
  }, "s-grid point");

  json per_s = json::array();
  for (std::size_t i = 0; i < ns; ++i) {
    const auto& d = sol[i].density;
    Table t{{"z", "density"}, {}};
    for (std::size_t k = 0; k < d.grid.size(); ++k) t.add({d.grid[k], d.values[k]});
    ctx.emit("iesolve", "iesolve_" + s_tag(a.s_grid[i]), t);
    per_s.push_back({{"s", sol[i].s},
                     {"a", sol[i].a},
                     {"mass", d.mass},
                     {"rcond", sol[i].rcond},
                     {"clipped_mass", sol[i].clipped_mass},
                     {"clipping_flagged", sol[i].clipping_flagged}});
  }
  ctx.summary["iesolve"] = {{"N", a.N}, {"grid_size", a.grid_size}, {"grid", per_s}};
}

json parameters_of(const ExperimentSpec& spec) {
  json p;
  p["outputs"] = json::array();
  for (Artifact a : spec.outputs) p["outputs"].push_back(to_string(a));
  p["alphas"] = spec.alphas;
  if (spec.circuit) {
    const auto& c = *spec.circuit;
    p["model"] = to_string(c.model);
    p["L"] = c.L;
    p["p"] = c.p;
    p["epsilon"] = c.epsilon;
    p["t_max"] = c.t_max;
    p["n_traj"] = c.n_traj;
    p["N"] = c.N();
    if (c.model != Model::kModelI) p["M"] = c.M();
  }
  if (spec.wants(Artifact::kFp) || spec.wants(Artifact::kIeSolve)) {
    p["analytic_N"] = spec.analytic.N;
    p["s_grid"] = spec.analytic.s_grid;
  }
  return p;
}

}  // namespace

ResultManifest run(const ExperimentSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec || !fs::is_directory(spec.output_dir)) {
    throw UsageError("cannot create output directory " + spec.output_dir.string());
  }

  ResultManifest manifest;
  manifest.name = spec.name;
  manifest.spec_hash = spec_hash(spec);
  manifest.seed = spec.seed;
  manifest.provenance = kProvenance;
  manifest.format = spec.format;
  manifest.output_dir = spec.output_dir;
  manifest.parameters = parameters_of(spec);

  json summary{{"name", spec.name}, {"spec_hash", manifest.spec_hash}, {"seed", spec.seed}};
  RunContext ctx{spec, manifest, summary};

  if (spec.circuit) {
    CircuitConfig cfg = *spec.circuit;
    cfg.seed = spec.seed;
    circuit_outputs(ctx, cfg);
  }
  if (spec.wants(Artifact::kFp)) fp_outputs(ctx);
  if (spec.wants(Artifact::kIeSolve)) ie_outputs(ctx);

  {
    std::ofstream out(spec.output_dir / "summary.json");
    out << summary.dump(2) << "\n";
    if (!out) throw Error("cannot write summary.json");
    manifest.files.push_back({"summary", "summary.json", 1});
  }
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream out(spec.output_dir / "manifest.json");
  out << to_json(manifest).dump(2) << "\n";
  if (!out) throw Error("cannot write manifest.json");
  return manifest;
}

namespace {

std::string num(double v, int prec = 6) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

const ManifestFile* find_file(const ResultManifest& m, const std::string& artifact) {
  for (const auto& f : m.files) {
    if (f.artifact == artifact) return &f;
  }
  return nullptr;
}

void report_lyapunov(const ResultManifest& m, std::ostream& os, json& out) {
  const auto* f = find_file(m, "lyapunov");
  if (!f) return;
  const Table t = read_table(m.output_dir / f->path);
  const auto cn = t.column("mode_index");
  const auto ch = t.column("lambda_hat");
  const auto cs = t.column("std_error");
  const auto ce = t.column("lambda_exact");
  const auto cz = t.column("z_score");
  os << "Lyapunov exponents\n"
     << std::setw(4) << "n" << std::setw(14) << "lambda_hat" << std::setw(12) << "std_err"
     << std::setw(14) << "lambda_exact" << std::setw(9) << "z" << "\n";
  json rows = json::array();
  for (const auto& r : t.rows) {
    os << std::setw(4) << r[cn] << std::setw(14) << num(r[ch]) << std::setw(12) << num(r[cs], 3)
       << std::setw(14) << num(r[ce]) << std::setw(9) << num(r[cz], 3) << "\n";
    rows.push_back({{"n", r[cn]},
                    {"lambda_hat", nan_safe(r[ch])},
                    {"std_error", nan_safe(r[cs])},
                    {"lambda_exact", nan_safe(r[ce])},
                    {"z_score", nan_safe(r[cz])}});
  }
  out["lyapunov"] = rows;
  os << "\n";
}

void report_purification(const json& summary, std::ostream& os, json& out) {
  if (!summary.contains("purification")) return;
  const auto& p = summary["purification"];
  os << "Purification time\n  tau_p fit      " << num(json_number(p["tau_p_hat"])) << " +- "
     << num(json_number(p["tau_p_std_error"]), 3) << "\n  tau_p exact    "
     << num(json_number(p["tau_p_exact"])) << "\n  from log E[nu] "
     << num(json_number(p["tau_p_from_mean_nu"])) << "\n\n";
  out["purification"] = p;
}

void report_born(const ResultManifest& m, std::ostream& os, json& out) {
  const auto* f = find_file(m, "born");
  if (!f) return;
  const Table t = read_table(m.output_dir / f->path);
  const auto cid = t.column("trajectory_id");
  const auto cf = t.column("log_factor");
  std::vector<double> factors;
  std::map<long, double> totals;
  for (const auto& r : t.rows) {
    factors.push_back(std::exp(r[cf]));
    totals[static_cast<long>(r[cid])] += r[cf];
  }
  json b{{"layers", factors.size()}, {"trajectories", totals.size()}};
  os << "Born probabilities\n  layers " << factors.size() << ", trajectories " << totals.size()
     << "\n";
  const auto& par = m.parameters;
  if (par.value("model", "") == "model2" && par.contains("M") && factors.size() >= 20) {
    const long N = par["N"].get<long>();
    const long M = par["M"].get<long>();
    const BetaLaw law{static_cast<double>(M), static_cast<double>(N - M)};
    const auto ks = born_ks_test(factors, [&](double x) { return beta_cdf(law, x); });
    os << "  per-layer KS vs Beta(" << M << ", " << N - M << ")\n"
       << std::setw(12) << "D" << std::setw(12) << "p_value" << "\n"
       << std::setw(12) << num(ks.D, 4) << std::setw(12) << num(ks.p_value, 4) << "\n";
    b["ks_D"] = ks.D;
    b["ks_p_value"] = ks.p_value;
    if (totals.size() >= 2 && M < N) {
      const int t_layers = static_cast<int>(factors.size() / totals.size());
      const auto clt = log_born_clt_params(N, M, t_layers);
      double s1 = 0.0;
      double s2 = 0.0;
      for (const auto& [id, v] : totals) {
        s1 += v;
        s2 += v * v;
      }
      const double n = static_cast<double>(totals.size());
      const double mean = s1 / n;
      const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
      os << "  log p(m) after " << t_layers << " layers: mean " << num(mean) << " (exact "
         << num(clt.mean()) << "), variance " << num(var) << " (exact " << num(clt.variance())
         << ")\n";
      b["log_p_mean"] = mean;
      b["log_p_mean_exact"] = clt.mean();
      b["log_p_variance"] = var;
      b["log_p_variance_exact"] = clt.variance();
    }
  }
  out["born"] = b;
  os << "\n";
}

void report_entropy(const ResultManifest& m, std::ostream& os, json& out) {
  const auto* f = find_file(m, "entropy");
  if (!f) return;
  const Table t = read_table(m.output_dir / f->path);
  const auto ca = t.column("alpha");
  const auto ct = t.column("t");
  const auto cm = t.column("mean_S");
  const auto cth = t.column("theory");
  os << "Renyi entropies\n"
     << std::setw(7) << "alpha" << std::setw(7) << "t" << std::setw(13) << "mean_S"
     << std::setw(13) << "theory" << std::setw(11) << "rel_diff" << "\n";
  json rows = json::array();
  for (const auto& r : t.rows) {
    const double rel = (r[cm] - r[cth]) / r[cth];
    os << std::setw(7) << r[ca] << std::setw(7) << r[ct] << std::setw(13) << num(r[cm])
       << std::setw(13) << num(r[cth]) << std::setw(11) << num(rel, 3) << "\n";
    rows.push_back({{"alpha", r[ca]},
                    {"t", r[ct]},
                    {"mean_S", nan_safe(r[cm])},
                    {"theory", nan_safe(r[cth])},
                    {"rel_diff", nan_safe(rel)}});
  }
  out["entropy"] = rows;
  os << "\n";
}

void report_fp(const json& summary, std::ostream& os, json& out) {
  if (!summary.contains("fp")) return;
  const auto& fp = summary["fp"];
  os << "Fokker-Planck samples (" << fp["method"].get<std::string>() << ", N = " << fp["N"]
     << ")\n";
  for (const auto& e : fp["grid"]) {
    os << "  s = " << num(e["s"].get<double>()) << "\n"
       << std::setw(6) << "n" << std::setw(13) << "mean" << std::setw(11) << "std_err"
       << std::setw(13) << "c_n s" << std::setw(13) << "variance" << "\n";
    for (const auto& md : e["modes"]) {
      os << std::setw(6) << md["mode_index"].get<int>() << std::setw(13)
         << num(md["mean"].get<double>()) << std::setw(11) << num(md["std_error"].get<double>(), 3)
         << std::setw(13) << num(md["drift_c_n_s"].get<double>()) << std::setw(13)
         << num(md["variance"].get<double>()) << "\n";
    }
  }
  out["fp"] = fp;
  os << "\n";
}

void report_ie(const json& summary, std::ostream& os, json& out) {
  if (!summary.contains("iesolve")) return;
  const auto& ie = summary["iesolve"];
  os << "Integral equation (N = " << ie["N"] << ", grid " << ie["grid_size"] << ")\n"
     << std::setw(12) << "s" << std::setw(12) << "a" << std::setw(12) << "mass" << std::setw(12)
     << "rcond" << "\n";
  for (const auto& e : ie["grid"]) {
    os << std::setw(12) << num(e["s"].get<double>()) << std::setw(12)
       << num(e["a"].get<double>()) << std::setw(12) << num(e["mass"].get<double>())
       << std::setw(12) << num(e["rcond"].get<double>(), 3) << "\n";
  }
  out["iesolve"] = ie;
  os << "\n";
}

void report_rank_collapse(const json& summary, std::ostream& os, json& out) {
  if (!summary.contains("rank_collapse")) return;
  const auto& rc = summary["rank_collapse"];
  os << "Rank collapse\n  collapsed " << rc["collapsed"] << ", censored " << rc["censored"];
  if (rc.contains("mean")) {
    os << "\n  mean stopping time " << num(rc["mean"].get<double>()) << " +- "
       << num(rc["std_error"].get<double>(), 3);
  }
  os << " (1/p^L = " << num(rc["exact"].get<double>()) << ")\n\n";
  out["rank_collapse"] = rc;
}

}  // namespace

SummaryDocument report(const ResultManifest& manifest) {
  if (manifest.files.empty()) throw UsageError("report: manifest lists no files");
  std::vector<std::string> missing;
  for (const auto& f : manifest.files) {
    if (!fs::exists(manifest.output_dir / f.path)) missing.push_back(f.path);
  }
  if (!missing.empty()) {
    std::string msg = "report: missing files:";
    for (const auto& p : missing) msg += " " + p;
    throw UsageError(msg);
  }

  json summary = json::object();
  if (const auto* f = find_file(manifest, "summary")) {
    std::ifstream in(manifest.output_dir / f->path);
    summary = json::parse(in);
  }

  std::ostringstream os;
  SummaryDocument doc;
  doc.json = {{"name", manifest.name},
              {"spec_hash", manifest.spec_hash},
              {"seed", manifest.seed},
              {"provenance", manifest.provenance}};
  os << "Experiment " << manifest.name << "  (spec " << manifest.spec_hash << ", seed "
     << manifest.seed << ")\n\n";
  report_lyapunov(manifest, os, doc.json);
  report_purification(summary, os, doc.json);
  report_born(manifest, os, doc.json);
  report_entropy(manifest, os, doc.json);
  report_rank_collapse(summary, os, doc.json);
  report_fp(summary, os, doc.json);
  report_ie(summary, os, doc.json);
  os << "Files\n";
  for (const auto& f : manifest.files) {
    os << "  " << std::left << std::setw(28) << f.path << std::right << std::setw(10) << f.rows
       << " rows\n";
  }
  doc.text = os.str();
  return doc;
}

}  // namespace qdots::tools

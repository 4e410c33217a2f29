// Copyright 2026 The falqon-mst Authors
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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "falqon_mst/dataset.hpp"
#include "falqon_mst/diagnostics.hpp"
#include "falqon_mst/falqon.hpp"
#include "falqon_mst/graph.hpp"
#include "falqon_mst/opf.hpp"
#include "falqon_mst/pubo.hpp"
#include "falqon_mst/rng.hpp"

namespace falqon_mst::experiments {

using ordered_json = nlohmann::ordered_json;

struct ExperimentConfig {
  std::string dataset;
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  double dt = 0.01;
  std::size_t layers = 10000;
  double a_scale = 0.1;
  double b = 0.1;
  double boost = 3.0;
  std::size_t top_k = 10;
  std::string out_dir = ".";
  std::vector<std::string> methods = {"prim", "falqon-pubo"};
  std::vector<std::size_t> samples;  // source rows for `trace`; empty = seeded draw
  std::string instance;              // instance JSON for `trace`
  std::string data_dir;              // empty = FALQON_MST_DATA or build default
  double min_delta = 0.0;
  std::string feedback = "after-layer";  // or "before-driver"
  std::string normalize = "none";        // none, minmax or zscore

  void validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (!(dt > 0.0) || layers < 1 || top_k < 1) throw std::invalid_argument("dt, layers and top_k must be positive");
    if (!(a_scale > 0.0) || !(b > 0.0) || !(boost >= 1.0)) {
      throw std::invalid_argument("a_scale and b must be positive and boost >= 1");
    }
    for (const auto& m : methods)
      if (m != "prim" && m != "falqon-pubo") throw std::invalid_argument("unknown method '" + m + "'");
    data::parse_scaling(normalize);
    if (feedback != "after-layer" && feedback != "before-driver") {
      throw std::invalid_argument("feedback must be after-layer or before-driver");
    }
  }

  bool wants(const std::string& method) const {
    return std::find(methods.begin(), methods.end(), method) != methods.end();
  }

  FalqonConfig falqon() const {
    FalqonConfig f;
    f.dt = dt;
    f.layers = layers;
    f.top_k = top_k;
    f.min_delta = min_delta;
    f.feedback = feedback == "before-driver" ? FeedbackPoint::BeforeDriver : FeedbackPoint::AfterLayer;
    return f;
  }

  PenaltyConfig penalty(const WeightedGraph& g) const { return PenaltyConfig::defaults(g, a_scale, b, boost); }
};

inline ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["dataset"] = c.dataset;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["dt"] = c.dt;
  j["layers"] = c.layers;
  j["a_scale"] = c.a_scale;
  j["b"] = c.b;
  j["boost"] = c.boost;
  j["top_k"] = c.top_k;
  j["methods"] = c.methods;
  if (!c.samples.empty()) j["samples"] = c.samples;
  if (!c.instance.empty()) j["instance"] = c.instance;
  if (c.min_delta > 0.0) j["min_delta"] = c.min_delta;
  j["feedback"] = c.feedback;
  j["normalize"] = c.normalize;
  return j;
}

// Fields mirror ExperimentConfig; unknown fields are rejected.
inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset") c.dataset = value.get<std::string>();
    else if (key == "runs") c.runs = value.get<std::size_t>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "dt") c.dt = value.get<double>();
    else if (key == "layers") c.layers = value.get<std::size_t>();
    else if (key == "a_scale") c.a_scale = value.get<double>();
    else if (key == "b") c.b = value.get<double>();
    else if (key == "boost") c.boost = value.get<double>();
    else if (key == "top_k") c.top_k = value.get<std::size_t>();
    else if (key == "out" || key == "out_dir") c.out_dir = value.get<std::string>();
    else if (key == "methods") c.methods = value.get<std::vector<std::string>>();
    else if (key == "samples") c.samples = value.get<std::vector<std::size_t>>();
    else if (key == "instance") c.instance = value.get<std::string>();
    else if (key == "data_dir") c.data_dir = value.get<std::string>();
    else if (key == "min_delta") c.min_delta = value.get<double>();
    else if (key == "feedback") c.feedback = value.get<std::string>();
    else if (key == "normalize") c.normalize = value.get<std::string>();
    else throw std::invalid_argument("unknown config field '" + key + "'");
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  ExperimentConfig c;
  apply_json(c, nlohmann::json::parse(in));
  return c;
}

inline ordered_json edges_to_json(std::span<const Edge> edges) {
  auto a = ordered_json::array();
  for (const auto& e : edges) a.push_back({e.u, e.v});
  return a;
}

inline ordered_json decoded_to_json(const DecodedSolution& d, BasisIndex s, const VariableLayout& layout) {
  ordered_json j;
  j["bitstring"] = basis_to_text(s, static_cast<int>(layout.total()));
  j["valid"] = d.valid();
  j["root"] = d.root ? ordered_json(*d.root) : ordered_json(nullptr);
  auto levels = ordered_json::array();
  for (const auto& l : d.level_of) levels.push_back(l ? ordered_json(*l) : ordered_json(nullptr));
  j["level_of"] = std::move(levels);
  j["edges"] = edges_to_json(d.edges);
  auto viol = ordered_json::array();
  for (const auto& v : d.violations) {
    ordered_json e;
    e["term"] = v.term;
    e["message"] = v.message;
    if (v.vertex) e["vertex"] = *v.vertex;
    if (v.edge) e["edge"] = {v.edge->u, v.edge->v};
    if (v.level) e["level"] = *v.level;
    e["count"] = v.count;
    viol.push_back(std::move(e));
  }
  j["violations"] = std::move(viol);
  j["energy"] = d.energy;
  return j;
}

// One sampled problem instance: a graph with its compiled Hamiltonian.
struct Instance {
  std::vector<Sample> samples;
  WeightedGraph graph;
  VariableLayout layout;
  PenaltyConfig penalty;
  DiagonalOperator diagonal;
  SpanningTree prim;

  Instance(std::vector<Sample> s, const ExperimentConfig& c)
      : samples(std::move(s)),
        graph(build_complete_graph(samples)),
        layout(graph),
        penalty(c.penalty(graph)),
        diagonal(compile_diagonal(graph, layout, penalty)),
        prim(prim_mst(graph)) {}

  ValidityOracle validity() const {
    return [this](BasisIndex s) { return decode(s, graph, layout, penalty).valid(); };
  }

  FalqonResult run(const ExperimentConfig& c) const { return run_falqon(diagonal, validity(), c.falqon()); }
};

inline std::string join_sources(std::span<const Sample> samples) {
  std::string out;
  for (const auto& s : samples) {
    if (!out.empty()) out += ';';
    out += std::to_string(s.source_index);
  }
  return out;
}

inline std::string fmt_real(double v) { return falqon_mst::detail::format_real(v); }

struct Outputs {
  ordered_json report;
  std::string runs_csv;
  ordered_json metadata;  // timings only; excluded from determinism checks
};

inline void write_outputs(const Outputs& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "report.json") << o.report.dump(2) << '\n';
  std::ofstream(dir / "runs.csv") << o.runs_csv;
  std::ofstream(dir / "metadata.json") << o.metadata.dump(2) << '\n';
}

inline data::Dataset load_dataset(const ExperimentConfig& c) {
  if (c.dataset.empty()) throw std::invalid_argument("no dataset given");
  auto ds = data::load_named(c.dataset, c.data_dir);
  data::scale_features(ds, data::parse_scaling(c.normalize));
  return ds;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Per run: stratified 4-sample draw, compile H_MST, run FALQON, score the
// top-1 and top-k states against the exact ground energy.
inline Outputs success_rate(const ExperimentConfig& c, const data::Dataset& ds) {
  c.validate();
  std::ostringstream csv;
  csv << "run,seed,samples,mst_weight,ground_energy,final_energy,top1_energy,top1_valid,"
         "ground_probability,success,in_top_k\n";
  std::size_t successes = 0, in_top = 0;
  auto seeds = ordered_json::array();
  auto timings = ordered_json::array();
  const auto t_all = std::chrono::steady_clock::now();
  for (std::size_t r = 0; r < c.runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = derive_run_seed(c.seed, r);
    seeds.push_back(seed);
    const auto subset = data::sample_subset(ds, {seed});
    const Instance inst(subset.train, c);
    const auto res = inst.run(c);
    successes += res.success;
    in_top += res.in_top_k;
    csv << r << ',' << seed << ',' << join_sources(inst.samples) << ',' << fmt_real(inst.prim.total_weight) << ','
        << fmt_real(res.ground_energy) << ',' << fmt_real(res.final_energy) << ',' << fmt_real(res.top1_energy)
        << ',' << int(res.top1_valid) << ',' << fmt_real(res.ground_probability) << ',' << int(res.success) << ','
        << int(res.in_top_k) << '\n';
    timings.push_back(seconds_since(t0));
  }
  Outputs o;
  o.report["command"] = "success-rate";
  o.report["config"] = to_json(c);
  o.report["runs"] = c.runs;
  o.report["success_rate"] = double(successes) / double(c.runs);
  o.report["top_k_rate"] = double(in_top) / double(c.runs);
  o.report["run_seeds"] = std::move(seeds);
  o.runs_csv = csv.str();
  o.metadata["run_seconds"] = std::move(timings);
  o.metadata["total_seconds"] = seconds_since(t_all);
  return o;
}

struct AccuracyRun {
  double prim_accuracy = 0.0;
  std::optional<double> falqon_accuracy;      // with the Prim fallback
  std::optional<double> falqon_raw_accuracy;  // decoded tree whenever it is valid
  bool top1_valid = false;
  bool success = false;
  bool tree_equal = false;     // tree used for scoring, after any fallback
  bool decoded_equal = false;  // decoded top-1 tree, no fallback
  bool fallback = false;
};

inline double opf_accuracy(const std::vector<Sample>& train, const std::vector<Sample>& test,
                           std::span<const Edge> tree) {
  std::vector<int> labels;
  for (const auto& s : train) labels.push_back(s.label);
  const auto model = opf::train(train, opf::select_prototypes(tree, labels));
  std::vector<int> truth;
  for (const auto& s : test) truth.push_back(s.label);
  return opf::accuracy(opf::predict(model, test), truth);
}

// Prim tree and/or FALQON top-1 tree -> prototypes -> OPF -> test accuracy.
// The FALQON tree is used only when the top-1 state is a violation-free
// ground state; otherwise the run falls back to the Prim tree and is flagged.
inline AccuracyRun accuracy_run(const data::Subset& subset, const ExperimentConfig& c) {
  AccuracyRun out;
  const auto graph = build_complete_graph(subset.train);
  const auto prim = prim_mst(graph);
  out.prim_accuracy = opf_accuracy(subset.train, subset.test, prim.edges);
  if (!c.wants("falqon-pubo")) return out;

  const Instance inst(subset.train, c);
  const auto res = inst.run(c);
  const BasisIndex top1 = res.top_states.front().state;
  const auto decoded = decode(top1, inst.graph, inst.layout, inst.penalty);
  out.top1_valid = decoded.valid();
  out.success = res.success;
  if (decoded.valid()) {
    out.falqon_raw_accuracy = opf_accuracy(subset.train, subset.test, decoded.edges);
    out.decoded_equal = decoded.edges == prim.edges;
  }
  if (res.success) {
    out.tree_equal = decoded.edges == prim.edges;
    out.falqon_accuracy = *out.falqon_raw_accuracy;
  } else {
    out.fallback = true;
    out.tree_equal = true;
    out.falqon_accuracy = out.prim_accuracy;
    diagnose("FALQON top-1 state is not a valid ground state; using the Prim tree");
  }
  return out;
}

inline Outputs accuracy(const ExperimentConfig& c, const data::Dataset& ds) {
  c.validate();
  const bool prim = c.wants("prim");
  const bool pubo = c.wants("falqon-pubo");
  std::ostringstream csv;
  csv << "run,seed,train,test,prim_accuracy,falqon_accuracy,falqon_raw_accuracy,top1_valid,success,tree_equal,"
         "fallback\n";
  double prim_sum = 0.0, pubo_sum = 0.0;
  std::size_t fallbacks = 0, equal = 0;
  auto seeds = ordered_json::array();
  auto timings = ordered_json::array();
  const auto t_all = std::chrono::steady_clock::now();
  auto opt = [](const std::optional<double>& v) { return v ? fmt_real(*v) : std::string(); };
  for (std::size_t r = 0; r < c.runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = derive_run_seed(c.seed, r);
    seeds.push_back(seed);
    const auto subset = data::sample_subset(ds, {seed});
    const auto run = accuracy_run(subset, c);
    prim_sum += run.prim_accuracy;
    if (pubo) {
      pubo_sum += *run.falqon_accuracy;
      fallbacks += run.fallback;
      equal += run.tree_equal;
    }
    csv << r << ',' << seed << ',' << join_sources(subset.train) << ',' << join_sources(subset.test) << ','
        << (prim ? fmt_real(run.prim_accuracy) : std::string()) << ',' << opt(run.falqon_accuracy) << ','
        << opt(run.falqon_raw_accuracy) << ',';
    if (pubo) {
      csv << int(run.top1_valid) << ',' << int(run.success) << ',' << int(run.tree_equal) << ','
          << int(run.fallback);
    } else {
      csv << ",,,";
    }
    csv << '\n';
    timings.push_back(seconds_since(t0));
  }
  Outputs o;
  o.report["command"] = "accuracy";
  o.report["config"] = to_json(c);
  o.report["runs"] = c.runs;
  ordered_json means;
  if (prim) means["prim"] = prim_sum / double(c.runs);
  if (pubo) means["falqon-pubo"] = pubo_sum / double(c.runs);
  o.report["mean_accuracy"] = std::move(means);
  if (pubo) {
    o.report["fallback_runs"] = fallbacks;
    o.report["tree_equal_runs"] = equal;
  }
  o.report["run_seeds"] = std::move(seeds);
  o.runs_csv = csv.str();
  o.metadata["run_seconds"] = std::move(timings);
  o.metadata["total_seconds"] = seconds_since(t_all);
  return o;
}

// Samples of a shipped instance file: {"features": [[...]], "labels": [...]}.
inline std::vector<Sample> load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance " + path.string());
  const auto j = nlohmann::json::parse(in);
  const auto features = j.at("features").get<std::vector<std::vector<double>>>();
  const auto labels = j.at("labels").get<std::vector<int>>();
  if (features.size() != labels.size()) throw std::runtime_error("instance features/labels length mismatch");
  std::vector<std::size_t> rows(features.size());
  if (j.contains("source_rows")) rows = j.at("source_rows").get<std::vector<std::size_t>>();
  std::vector<Sample> out;
  for (std::size_t i = 0; i < features.size(); ++i) out.push_back({features[i], labels[i], rows.at(i)});
  return out;
}

struct TraceOutputs {
  std::string trace_csv;
  ordered_json result;
  ordered_json decoded;
};

inline std::vector<Sample> trace_samples(const ExperimentConfig& c) {
  if (!c.instance.empty()) return load_instance(c.instance);
  const auto ds = load_dataset(c);
  if (!c.samples.empty()) {
    std::vector<Sample> out;
    for (auto row : c.samples) {
      const auto it = std::find_if(ds.samples.begin(), ds.samples.end(),
                                   [&](const Sample& s) { return s.source_index == row; });
      if (it == ds.samples.end()) throw std::invalid_argument("no usable sample at source row " + std::to_string(row));
      out.push_back(*it);
    }
    return out;
  }
  return data::sample_subset(ds, {derive_run_seed(c.seed, 0)}).train;
}

inline TraceOutputs trace(const ExperimentConfig& c, std::vector<Sample> samples) {
  c.validate();
  const Instance inst(std::move(samples), c);
  const auto res = inst.run(c);
  TraceOutputs o;
  std::ostringstream csv;
  write_trace_csv(csv, res.trace);
  o.trace_csv = csv.str();
  o.result = result_to_json(res);
  const BasisIndex top1 = res.top_states.front().state;
  const auto decoded = decode(top1, inst.graph, inst.layout, inst.penalty);
  o.decoded["top1"] = decoded_to_json(decoded, top1, inst.layout);
  o.decoded["top1_is_ground"] = is_ground_energy(decoded.energy, res.ground_energy);
  o.decoded["top1_equals_prim"] = decoded.valid() && decoded.edges == inst.prim.edges;
  o.decoded["prim_edges"] = edges_to_json(inst.prim.edges);
  o.decoded["mst_weight"] = inst.prim.total_weight;
  o.decoded["ground_energy"] = res.ground_energy;
  o.decoded["ground_probability"] = res.ground_probability;
  o.decoded["qubits"] = inst.layout.total();
  o.decoded["dt_bound"] = dt_bound(inst.diagonal, DriverSpec::all(static_cast<int>(inst.layout.total())));
  o.decoded["samples"] = join_sources(inst.samples);
  return o;
}

inline void write_trace_outputs(const TraceOutputs& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "trace.csv") << o.trace_csv;
  std::ofstream(dir / "result.json") << o.result.dump(2) << '\n';
  std::ofstream(dir / "decoded.json") << o.decoded.dump(2) << '\n';
}

// Square weight matrix, one comma-separated row per line.
inline WeightedGraph read_weight_matrix(std::istream& in) {
  std::vector<double> w;
  std::size_t n = 0;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (data::detail::trim(line).empty()) continue;
    const auto fields = data::detail::split_csv_line(line);
    if (n == 0) n = fields.size();
    if (fields.size() != n) throw std::invalid_argument("weight matrix rows differ in length");
    for (const auto& f : fields) {
      const auto v = data::detail::parse_real(f);
      if (!v) throw std::invalid_argument("non-numeric weight '" + f + "'");
      w.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0 || rows != n) throw std::invalid_argument("weight matrix must be square and non-empty");
  return WeightedGraph(n, std::move(w));
}

}  // namespace falqon_mst::experiments

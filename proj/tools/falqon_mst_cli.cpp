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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "falqon_mst/falqon_mst.hpp"

namespace fm = falqon_mst;
namespace ex = falqon_mst::experiments;

namespace {

struct Flags {
  std::string config;
  std::string dataset;
  std::size_t runs = 0;
  double dt = 0, a_scale = 0, b = 0, boost = 0, min_delta = 0;
  std::size_t layers = 0, top_k = 0;
  std::uint64_t seed = 0;
  std::string out, methods, samples, instance, data_dir, feedback, normalize;
  int threads = 0;
  // mst / decode
  std::string weights, bits, export_poly;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

void add_experiment_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (flags override it)")->check(CLI::ExistingFile);
  cmd->add_option("--dataset", f.dataset, "dataset name from the manifest");
  cmd->add_option("--runs", f.runs, "number of runs");
  cmd->add_option("--dt", f.dt, "FALQON time step");
  cmd->add_option("--layers", f.layers, "FALQON layers");
  cmd->add_option("--a-scale", f.a_scale, "A = a_scale * sum of edge weights");
  cmd->add_option("--b", f.b, "cost weight B");
  cmd->add_option("--boost", f.boost, "multiplier on the root and level terms");
  cmd->add_option("--top-k", f.top_k, "size of the top-state summary");
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--methods", f.methods, "comma-separated subset of prim,falqon-pubo");
  cmd->add_option("--data-dir", f.data_dir, "dataset directory (default: $FALQON_MST_DATA)");
  cmd->add_option("--min-delta", f.min_delta, "stop when the energy changes less than this (0 = off)");
  cmd->add_option("--feedback", f.feedback, "where beta is measured")
      ->check(CLI::IsMember({"after-layer", "before-driver"}));
  cmd->add_option("--normalize", f.normalize, "feature scaling before distances")
      ->check(CLI::IsMember({"none", "minmax", "zscore"}));
  cmd->add_option("--threads", f.threads, "worker threads (0 = runtime default)");
}

ex::ExperimentConfig resolve(CLI::App* cmd, const Flags& f) {
  ex::ExperimentConfig c;
  if (!f.config.empty()) c = ex::load_config(f.config);
  auto given = [cmd](const char* name) { return cmd->count(name) > 0; };
  if (given("--dataset")) c.dataset = f.dataset;
  if (given("--runs")) c.runs = f.runs;
  if (given("--dt")) c.dt = f.dt;
  if (given("--layers")) c.layers = f.layers;
  if (given("--a-scale")) c.a_scale = f.a_scale;
  if (given("--b")) c.b = f.b;
  if (given("--boost")) c.boost = f.boost;
  if (given("--top-k")) c.top_k = f.top_k;
  if (given("--seed")) c.seed = f.seed;
  if (given("--out")) c.out_dir = f.out;
  if (given("--methods")) c.methods = split(f.methods, ',');
  if (given("--data-dir")) c.data_dir = f.data_dir;
  if (given("--min-delta")) c.min_delta = f.min_delta;
  if (given("--feedback")) c.feedback = f.feedback;
  if (given("--normalize")) c.normalize = f.normalize;
  if (cmd->get_option_no_throw("--samples") && given("--samples")) {
    c.samples.clear();
    for (const auto& s : split(f.samples, ',')) c.samples.push_back(std::stoull(s));
  }
  if (cmd->get_option_no_throw("--instance") && given("--instance")) c.instance = f.instance;
#ifdef _OPENMP
  if (f.threads > 0) omp_set_num_threads(f.threads);
#endif
  c.validate();
  return c;
}

fm::WeightedGraph read_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weight file " + path);
  return ex::read_weight_matrix(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PUBO minimum spanning trees minimized with FALQON, and OPF prototype selection"};
  app.require_subcommand(1);
  Flags f;

  auto* success = app.add_subcommand("success-rate", "ground-state success rate over seeded 4-sample graphs");
  add_experiment_options(success, f);

  auto* accuracy = app.add_subcommand("accuracy", "OPF accuracy with Prim and FALQON prototypes");
  add_experiment_options(accuracy, f);

  auto* trace = app.add_subcommand("trace", "single FALQON run: trace.csv, result.json, decoded.json");
  add_experiment_options(trace, f);
  trace->add_option("--samples", f.samples, "comma-separated source rows (default: seeded draw)");
  trace->add_option("--instance", f.instance, "instance JSON with embedded features")->check(CLI::ExistingFile);

  auto* mst = app.add_subcommand("mst", "Prim minimum spanning tree of a weight matrix");
  mst->add_option("--weights", f.weights, "CSV square weight matrix")->required()->check(CLI::ExistingFile);

  auto* dec = app.add_subcommand("decode", "decode a bitstring of the PUBO layout as JSON");
  dec->add_option("--bits", f.bits, "0/1 text, variable 0 first")->required();
  dec->add_option("--weights", f.weights, "CSV square weight matrix")->check(CLI::ExistingFile);
  add_experiment_options(dec, f);
  dec->add_option("--samples", f.samples, "comma-separated source rows of --dataset");
  dec->add_option("--instance", f.instance, "instance JSON with embedded features")->check(CLI::ExistingFile);
  dec->add_option("--export-poly", f.export_poly, "write the H_MST polynomial to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*success) {
      const auto c = resolve(success, f);
      const auto ds = ex::load_dataset(c);
      const auto out = ex::success_rate(c, ds);
      ex::write_outputs(out, c.out_dir);
      std::cout << out.report.dump(2) << '\n';
    } else if (*accuracy) {
      const auto c = resolve(accuracy, f);
      const auto ds = ex::load_dataset(c);
      const auto out = ex::accuracy(c, ds);
      ex::write_outputs(out, c.out_dir);
      std::cout << out.report.dump(2) << '\n';
    } else if (*trace) {
      const auto c = resolve(trace, f);
      const auto out = ex::trace(c, ex::trace_samples(c));
      ex::write_trace_outputs(out, c.out_dir);
      std::cout << out.decoded.dump(2) << '\n';
    } else if (*mst) {
      const auto g = read_weights(f.weights);
      const auto t = fm::prim_mst(g);
      for (const auto& e : t.edges) std::cout << e.u << ' ' << e.v << ' ' << ex::fmt_real(g.weight(e)) << '\n';
      std::cout << "weight " << ex::fmt_real(t.total_weight) << '\n';
    } else if (*dec) {
      const auto c = resolve(dec, f);
      const fm::WeightedGraph g = f.weights.empty() ? fm::build_complete_graph(ex::trace_samples(c))
                                                    : read_weights(f.weights);
      const fm::VariableLayout layout(g);
      if (f.bits.size() != layout.total()) {
        throw std::invalid_argument("bitstring has " + std::to_string(f.bits.size()) + " bits; layout needs " +
                                    std::to_string(layout.total()));
      }
      const auto penalty = c.penalty(g);
      const auto s = fm::basis_from_text(f.bits);
      if (!f.export_poly.empty()) {
        std::ofstream(f.export_poly) << fm::build_h_mst(g, penalty).polynomial.to_text();
      }
      std::cout << ex::decoded_to_json(fm::decode(s, g, layout, penalty), s, layout).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

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

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "falqon_mst/diagnostics.hpp"
#include "falqon_mst/graph.hpp"

namespace falqon_mst::opf {

// Sorted, duplicate-free training-vertex indices.
struct PrototypeSet {
  std::vector<Vertex> members;

  bool contains(Vertex v) const { return std::binary_search(members.begin(), members.end(), v); }
  friend bool operator==(const PrototypeSet&, const PrototypeSet&) = default;
};

// Both endpoints of every tree edge joining different labels. A tree with no
// such edge yields {0}.
inline PrototypeSet select_prototypes(std::span<const Edge> tree, std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (n == 0) throw std::invalid_argument("no labeled vertices");
  if (tree.size() != n - 1) throw std::invalid_argument("tree edge count does not match label count");
  std::set<Vertex> found;
  for (const auto& e : tree) {
    if (e.u >= n || e.v >= n) throw std::invalid_argument("tree references an unlabeled vertex");
    if (labels[e.u] != labels[e.v]) {
      found.insert(e.u);
      found.insert(e.v);
    }
  }
  if (found.empty()) {
    diagnose("all tree edges join equal labels; using vertex 0 as the only prototype");
    found.insert(0);
  }
  return {{found.begin(), found.end()}};
}

inline PrototypeSet select_prototypes(const SpanningTree& tree, std::span<const int> labels) {
  return select_prototypes(std::span<const Edge>(tree.edges), labels);
}

struct TrainedOpf {
  std::vector<Sample> samples;
  std::vector<double> cost;
  std::vector<int> label;  // propagated from the conquering prototype
  std::vector<std::optional<Vertex>> predecessor;
  std::vector<bool> is_prototype;
  std::vector<Vertex> order;  // non-decreasing cost, ties by index
  std::size_t mislabeled = 0;  // vertices conquered across classes

  std::size_t size() const noexcept { return samples.size(); }
};

// Minimax path costs from the prototype set over `g`: repeatedly fix the
// cheapest open vertex (lowest index on ties) and relax every other vertex z
// with max(C(s), w(s, z)).
inline TrainedOpf train_on_graph(const WeightedGraph& g, std::span<const int> labels,
                                 const PrototypeSet& prototypes) {
  const std::size_t n = g.size();
  if (n == 0) throw std::invalid_argument("empty training set");
  if (labels.size() != n) throw std::invalid_argument("label count does not match graph size");
  if (prototypes.members.empty()) throw std::invalid_argument("empty prototype set");
  for (Vertex p : prototypes.members)
    if (p >= n) throw std::invalid_argument("prototype index out of range");

  constexpr double inf = std::numeric_limits<double>::infinity();
  TrainedOpf model;
  model.cost.assign(n, inf);
  model.label.assign(labels.begin(), labels.end());
  model.predecessor.assign(n, std::nullopt);
  model.is_prototype.assign(n, false);
  for (Vertex p : prototypes.members) {
    model.cost[p] = 0.0;
    model.is_prototype[p] = true;
  }

  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    Vertex s = n;
    for (Vertex v = 0; v < n; ++v)
      if (!done[v] && (s == n || model.cost[v] < model.cost[s])) s = v;
    done[s] = true;
    model.order.push_back(s);
    for (Vertex z = 0; z < n; ++z) {
      if (done[z]) continue;
      const double offer = std::max(model.cost[s], g.weight(s, z));
      if (offer < model.cost[z]) {
        model.cost[z] = offer;
        model.predecessor[z] = s;
        model.label[z] = model.label[s];
      }
    }
  }

  for (Vertex v = 0; v < n; ++v) {
    if (model.label[v] != labels[v]) ++model.mislabeled;
  }
  if (model.mislabeled > 0) {
    diagnose(std::to_string(model.mislabeled) +
             " training sample(s) conquered by another class (degenerate minimum spanning tree?)");
  }
  return model;
}

// Same, over the complete Euclidean graph of `samples`.
inline TrainedOpf train(std::vector<Sample> samples, const PrototypeSet& prototypes) {
  if (samples.empty()) throw std::invalid_argument("empty training set");
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  TrainedOpf model = train_on_graph(build_complete_graph(samples), labels, prototypes);
  model.samples = std::move(samples);
  return model;
}

struct Classification {
  int label = 0;
  double cost = 0.0;
  Vertex conqueror = 0;
};

// min over training s of max(C(s), d(s, test)); ties go to the lowest index.
inline Classification classify(const TrainedOpf& model, const Sample& test) {
  if (model.size() == 0) throw std::invalid_argument("untrained model");
  if (test.features.size() != model.samples.front().features.size()) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  Classification best{0, std::numeric_limits<double>::infinity(), model.size()};
  for (Vertex s : model.order) {
    if (model.cost[s] > best.cost) break;
    const double c = std::max(model.cost[s], euclidean_distance(model.samples[s].features, test.features));
    if (c < best.cost || (c == best.cost && s < best.conqueror)) best = {model.label[s], c, s};
  }
  return best;
}

inline std::vector<int> predict(const TrainedOpf& model, std::span<const Sample> tests) {
  std::vector<int> out;
  out.reserve(tests.size());
  for (const auto& t : tests) out.push_back(classify(model, t).label);
  return out;
}

inline double accuracy(std::span<const int> predictions, std::span<const int> truths) {
  if (predictions.empty()) throw std::invalid_argument("accuracy of an empty set");
  if (predictions.size() != truths.size()) throw std::invalid_argument("prediction/truth length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == truths[i];
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace falqon_mst::opf

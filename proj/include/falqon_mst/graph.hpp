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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace falqon_mst {

using Vertex = std::size_t;

struct Sample {
  std::vector<double> features;
  int label = 0;
  std::size_t source_index = 0;
};

// Undirected edge, always stored with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  Edge() = default;
  Edge(Vertex a, Vertex b) : u(std::min(a, b)), v(std::max(a, b)) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Complete undirected graph held as a dense symmetric matrix.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  // `weights` is row-major n x n. Throws std::invalid_argument unless the
  // matrix is symmetric, zero on the diagonal and non-negative elsewhere.
  WeightedGraph(std::size_t n, std::vector<double> weights,
                std::vector<int> labels = {})
      : n_(n), weights_(std::move(weights)), labels_(std::move(labels)) {
    if (weights_.size() != n_ * n_) {
      throw std::invalid_argument("weight matrix must be n*n");
    }
    if (labels_.empty()) labels_.assign(n_, 0);
    if (labels_.size() != n_) {
      throw std::invalid_argument("label count differs from vertex count");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (weights_[i * n_ + i] != 0.0) {
        throw std::invalid_argument("diagonal weight must be zero");
      }
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double w = weights_[i * n_ + j];
        if (!std::isfinite(w) || w < 0.0 || w != weights_[j * n_ + i]) {
          throw std::invalid_argument("weights must be finite, non-negative and symmetric");
        }
      }
    }
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return n_ * (n_ - 1) / 2; }
  double weight(Vertex a, Vertex b) const noexcept { return weights_[a * n_ + b]; }
  double weight(const Edge& e) const noexcept { return weight(e.u, e.v); }
  const std::vector<int>& labels() const noexcept { return labels_; }

  // Edges in lexicographic (u, v) order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (Vertex u = 0; u < n_; ++u)
      for (Vertex v = u + 1; v < n_; ++v) out.emplace_back(u, v);
    return out;
  }

  double total_weight() const noexcept {
    double sum = 0.0;
    for (Vertex u = 0; u < n_; ++u)
      for (Vertex v = u + 1; v < n_; ++v) sum += weight(u, v);
    return sum;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> weights_;
  std::vector<int> labels_;
};

struct SpanningTree {
  std::vector<Edge> edges;  // sorted
  double total_weight = 0.0;

  friend bool operator==(const SpanningTree& a, const SpanningTree& b) {
    return a.edges == b.edges;
  }
};

inline double euclidean_distance(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

inline WeightedGraph build_complete_graph(std::span<const Sample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("at least one sample is required");
  }
  const std::size_t n = samples.size();
  const std::size_t dim = samples.front().features.size();
  if (dim == 0) throw std::invalid_argument("samples need at least one feature");
  std::vector<double> w(n * n, 0.0);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i].features.size() != dim) {
      throw std::invalid_argument("feature dimension mismatch");
    }
    labels[i] = samples[i].label;
    for (std::size_t j = 0; j < i; ++j) {
      w[i * n + j] = w[j * n + i] =
          euclidean_distance(samples[i].features, samples[j].features);
    }
  }
  return WeightedGraph(n, std::move(w), std::move(labels));
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  // False when a and b were already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline SpanningTree make_tree(const WeightedGraph& g, std::vector<Edge> edges) {
  std::sort(edges.begin(), edges.end());
  SpanningTree t;
  for (const auto& e : edges) t.total_weight += g.weight(e);
  t.edges = std::move(edges);
  return t;
}

}  // namespace detail

inline bool is_spanning_tree(const WeightedGraph& g, std::span<const Edge> edges) {
  const std::size_t n = g.size();
  if (n == 0 || edges.size() != n - 1) return false;
  detail::DisjointSets sets(n);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n || e.u == e.v) return false;
    if (!sets.unite(e.u, e.v)) return false;
  }
  return true;  // n-1 successful unions leave one component
}

// Prim from vertex 0. Equal-weight candidates are ordered by the
// (min vertex, max vertex) pair of the connecting edge.
inline SpanningTree prim_mst(const WeightedGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw std::invalid_argument("graph has no vertices");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<bool> in_tree(n, false);
  std::vector<double> key(n, inf);
  std::vector<Edge> via(n);
  std::vector<Edge> chosen;
  chosen.reserve(n - 1);

  auto relax_from = [&](Vertex p) {
    for (Vertex v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const Edge e(p, v);
      const double w = g.weight(p, v);
      if (w < key[v] || (w == key[v] && e < via[v])) {
        key[v] = w;
        via[v] = e;
      }
    }
  };

  in_tree[0] = true;
  relax_from(0);
  for (std::size_t step = 1; step < n; ++step) {
    Vertex best = n;
    for (Vertex v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (best == n || key[v] < key[best] ||
          (key[v] == key[best] && via[v] < via[best])) {
        best = v;
      }
    }
    in_tree[best] = true;
    chosen.push_back(via[best]);
    relax_from(best);
  }
  return detail::make_tree(g, std::move(chosen));
}

struct ExhaustiveMst {
  double min_weight = 0.0;
  std::vector<SpanningTree> trees;
};

inline constexpr std::size_t kExhaustiveMstMaxVertices = 7;

// Enumerates all (n-1)-edge subsets. Trees whose weight lies within a
// relative 1e-12 of the minimum count as minimal.
inline ExhaustiveMst exhaustive_mst(const WeightedGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw std::invalid_argument("graph has no vertices");
  if (n > kExhaustiveMstMaxVertices) {
    throw std::invalid_argument("exhaustive_mst supports at most " +
                                std::to_string(kExhaustiveMstMaxVertices) +
                                " vertices");
  }
  if (n == 1) return {0.0, {SpanningTree{}}};

  const auto all = g.edges();
  const std::size_t k = n - 1;
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  std::vector<SpanningTree> trees;
  std::vector<Edge> subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = all[pick[i]];
    if (is_spanning_tree(g, subset)) trees.push_back(detail::make_tree(g, subset));
    // next combination
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == all.size() - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : trees) best = std::min(best, t.total_weight);
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  ExhaustiveMst out{best, {}};
  for (auto& t : trees)
    if (t.total_weight - best <= tol) out.trees.push_back(std::move(t));
  return out;
}

}  // namespace falqon_mst

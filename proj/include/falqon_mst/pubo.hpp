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
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "falqon_mst/diagnostics.hpp"
#include "falqon_mst/graph.hpp"
#include "falqon_mst/statevector.hpp"

namespace falqon_mst {

// Multilinear polynomial over binary variables 0..variables()-1. Terms are
// keyed by their ascending variable-index set; the empty set is the constant.
class BinaryPolynomial {
 public:
  using Term = std::vector<std::uint32_t>;

  BinaryPolynomial() = default;
  explicit BinaryPolynomial(std::size_t variables) : variables_(variables) {}

  static BinaryPolynomial constant(std::size_t variables, double c) {
    BinaryPolynomial p(variables);
    p.add({}, c);
    return p;
  }

  static BinaryPolynomial variable(std::size_t variables, std::uint32_t index) {
    BinaryPolynomial p(variables);
    p.add({index}, 1.0);
    return p;
  }

  // x^2 = x: repeated indices collapse.
  void add(Term vars, double coefficient) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    if (!vars.empty() && vars.back() >= variables_) {
      throw std::out_of_range("variable index beyond polynomial size");
    }
    if (coefficient == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(vars), coefficient);
    if (!inserted) {
      it->second += coefficient;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  BinaryPolynomial& operator+=(const BinaryPolynomial& other) {
    match(other);
    for (const auto& [vars, c] : other.terms_) add(vars, c);
    return *this;
  }

  BinaryPolynomial& operator-=(const BinaryPolynomial& other) {
    match(other);
    for (const auto& [vars, c] : other.terms_) add(vars, -c);
    return *this;
  }

  BinaryPolynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [vars, c] : terms_) c *= s;
    return *this;
  }

  friend BinaryPolynomial operator+(BinaryPolynomial a, const BinaryPolynomial& b) { return a += b; }
  friend BinaryPolynomial operator-(BinaryPolynomial a, const BinaryPolynomial& b) { return a -= b; }
  friend BinaryPolynomial operator*(BinaryPolynomial a, double s) { return a *= s; }
  friend BinaryPolynomial operator*(double s, BinaryPolynomial a) { return a *= s; }

  friend BinaryPolynomial operator*(const BinaryPolynomial& a, const BinaryPolynomial& b) {
    a.match(b);
    BinaryPolynomial out(a.variables_);
    Term merged;
    for (const auto& [va, ca] : a.terms_) {
      for (const auto& [vb, cb] : b.terms_) {
        merged.clear();
        std::set_union(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(merged));
        out.add(merged, ca * cb);
      }
    }
    return out;
  }

  std::size_t variables() const noexcept { return variables_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::map<Term, double>& terms() const noexcept { return terms_; }

  double coefficient(const Term& vars) const {
    const auto it = terms_.find(vars);
    return it == terms_.end() ? 0.0 : it->second;
  }

  std::size_t degree() const noexcept {
    std::size_t d = 0;
    for (const auto& [vars, c] : terms_) d = std::max(d, vars.size());
    return d;
  }

  double evaluate(std::span<const std::uint8_t> bits) const {
    if (bits.size() != variables_) throw std::invalid_argument("bitstring length differs from variable count");
    double sum = 0.0;
    for (const auto& [vars, c] : terms_) {
      bool on = true;
      for (auto v : vars) on = on && bits[v] != 0;
      if (on) sum += c;
    }
    return sum;
  }

  // Bit j of `s` is variable j.
  double evaluate(BasisIndex s) const {
    if (variables_ < 64 && (s >> variables_) != 0) {
      throw std::invalid_argument("basis index has bits beyond the variable count");
    }
    double sum = 0.0;
    for (const auto& [vars, c] : terms_) {
      bool on = true;
      for (auto v : vars) on = on && ((s >> v) & 1U);
      if (on) sum += c;
    }
    return sum;
  }

  // One term per line, "coefficient: i1 i2 ...", constant as "coefficient:".
  void write(std::ostream& os) const {
    char buf[40];
    for (const auto& [vars, c] : terms_) {
      std::snprintf(buf, sizeof buf, "%.17g:", c);
      os << buf;
      for (auto v : vars) os << ' ' << v;
      os << '\n';
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

  static BinaryPolynomial read(std::istream& is, std::size_t variables) {
    BinaryPolynomial p(variables);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto colon = line.find(':');
      if (colon == std::string::npos) {
        throw std::invalid_argument("polynomial line " + std::to_string(line_no) + " lacks ':'");
      }
      std::size_t used = 0;
      const std::string head = line.substr(0, colon);
      double c = 0.0;
      try {
        c = std::stod(head, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad coefficient on polynomial line " + std::to_string(line_no));
      }
      if (head.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument("bad coefficient on polynomial line " + std::to_string(line_no));
      }
      std::istringstream rest(line.substr(colon + 1));
      Term vars;
      long long v = 0;
      while (rest >> v) {
        if (v < 0) throw std::invalid_argument("negative variable index");
        vars.push_back(static_cast<std::uint32_t>(v));
      }
      if (!rest.eof()) throw std::invalid_argument("bad variable list on polynomial line " + std::to_string(line_no));
      p.add(std::move(vars), c);
    }
    return p;
  }

 private:
  void match(const BinaryPolynomial& other) const {
    if (other.variables_ != variables_) throw std::invalid_argument("polynomials over different variable sets");
  }

  std::size_t variables_ = 0;
  std::map<Term, double> terms_;
};

// Variable order: x(v, i) vertex-major and level-minor, then y(u, v) in
// lexicographic edge order.
class VariableLayout {
 public:
  VariableLayout() = default;

  explicit VariableLayout(std::size_t n) : n_(n), levels_(n / 2 + 1) {
    if (n < 2) throw std::invalid_argument("PUBO layout needs at least two vertices");
  }

  explicit VariableLayout(const WeightedGraph& g) : VariableLayout(g.size()) {}

  std::size_t vertices() const noexcept { return n_; }
  std::size_t levels() const noexcept { return levels_; }
  std::size_t max_level() const noexcept { return levels_ - 1; }
  std::size_t edge_count() const noexcept { return n_ * (n_ - 1) / 2; }
  std::size_t x_count() const noexcept { return n_ * levels_; }
  std::size_t total() const noexcept { return x_count() + edge_count(); }

  std::uint32_t x(Vertex v, std::size_t level) const noexcept {
    return static_cast<std::uint32_t>(v * levels_ + level);
  }

  std::uint32_t y(Vertex a, Vertex b) const noexcept {
    const Vertex u = std::min(a, b), v = std::max(a, b);
    const std::size_t rank = u * n_ - u * (u + 1) / 2 + (v - u - 1);
    return static_cast<std::uint32_t>(x_count() + rank);
  }

  std::uint32_t y(const Edge& e) const noexcept { return y(e.u, e.v); }

 private:
  std::size_t n_ = 0;
  std::size_t levels_ = 0;
};

inline VariableLayout make_layout(const WeightedGraph& g) { return VariableLayout(g); }

struct PenaltyConfig {
  double a = 1.0;
  double b = 1.0;
  double root_level_boost = 3.0;

  // A = 0.1 * (sum of edge weights), B = 0.1, boost 3.
  static PenaltyConfig defaults(const WeightedGraph& g, double a_scale = 0.1,
                                      double b = 0.1, double boost = 3.0) {
    return {a_scale * g.total_weight(), b, boost};
  }

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("penalty weights A and B must be positive");
    if (!(root_level_boost >= 1.0)) throw std::invalid_argument("root/level boost must be >= 1");
  }
};

// Unboosted values of the four constraint terms and the edge cost.
struct PenaltyTerms {
  double root = 0.0;       // (1 - sum_v x_{v,0})^2
  double levels = 0.0;     // sum_v (1 - sum_i x_{v,i})^2
  double consecutive = 0.0;  // sum_uv y_uv (1 - sum_i [x_{u,i-1} x_{v,i} + x_{v,i-1} x_{u,i}])^2
  double parent = 0.0;     // sum_u sum_{i>=1} x_{u,i} (1 - sum_v y_uv x_{v,i-1})^2
  double cost = 0.0;       // sum_uv w(u,v) y_uv

  double h_a(double boost) const noexcept { return boost * (root + levels) + consecutive + parent; }
  double h_mst(const PenaltyConfig& c) const noexcept { return c.a * h_a(c.root_level_boost) + c.b * cost; }
};

// Direct evaluation of the constraint terms; `bit(j)` returns variable j.
template <typename BitFn>
PenaltyTerms evaluate_penalties(const WeightedGraph& g, const VariableLayout& layout, BitFn bit) {
  const std::size_t n = layout.vertices();
  const std::size_t top = layout.max_level();
  PenaltyTerms t;

  double roots = 0.0;
  for (Vertex v = 0; v < n; ++v) roots += bit(layout.x(v, 0));
  t.root = (1.0 - roots) * (1.0 - roots);

  for (Vertex v = 0; v < n; ++v) {
    double k = 0.0;
    for (std::size_t i = 0; i <= top; ++i) k += bit(layout.x(v, i));
    t.levels += (1.0 - k) * (1.0 - k);
  }

  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      if (!bit(layout.y(u, v))) continue;
      t.cost += g.weight(u, v);
      double links = 0.0;
      for (std::size_t i = 1; i <= top; ++i) {
        links += bit(layout.x(u, i - 1)) * bit(layout.x(v, i)) +
                 bit(layout.x(v, i - 1)) * bit(layout.x(u, i));
      }
      t.consecutive += (1.0 - links) * (1.0 - links);
    }
  }

  for (Vertex u = 0; u < n; ++u) {
    for (std::size_t i = 1; i <= top; ++i) {
      if (!bit(layout.x(u, i))) continue;
      double parents = 0.0;
      for (Vertex v = 0; v < n; ++v) {
        if (v != u) parents += bit(layout.y(u, v)) * bit(layout.x(v, i - 1));
      }
      t.parent += (1.0 - parents) * (1.0 - parents);
    }
  }
  return t;
}

inline PenaltyTerms evaluate_penalties(const WeightedGraph& g, const VariableLayout& layout, BasisIndex s) {
  return evaluate_penalties(g, layout, [s](std::uint32_t j) { return static_cast<double>((s >> j) & 1U); });
}

namespace detail {

inline void check_layout(const WeightedGraph& g, const VariableLayout& layout) {
  if (layout.vertices() != g.size()) throw std::invalid_argument("layout does not match graph");
}

// 1 - sum of the given polynomials
inline BinaryPolynomial one_minus(std::size_t vars, const std::vector<BinaryPolynomial>& parts) {
  auto p = BinaryPolynomial::constant(vars, 1.0);
  for (const auto& q : parts) p -= q;
  return p;
}

}  // namespace detail

// boost * (root + levels) + consecutive + parent, expanded to multilinear form.
inline BinaryPolynomial build_h_a(const WeightedGraph& g, const VariableLayout& layout,
                                  const PenaltyConfig& config) {
  detail::check_layout(g, layout);
  const std::size_t m = layout.total();
  const std::size_t n = layout.vertices();
  const std::size_t top = layout.max_level();
  auto var = [m](std::uint32_t j) { return BinaryPolynomial::variable(m, j); };

  std::vector<BinaryPolynomial> parts;
  for (Vertex v = 0; v < n; ++v) parts.push_back(var(layout.x(v, 0)));
  auto r = detail::one_minus(m, parts);
  BinaryPolynomial boosted = r * r;

  for (Vertex v = 0; v < n; ++v) {
    parts.clear();
    for (std::size_t i = 0; i <= top; ++i) parts.push_back(var(layout.x(v, i)));
    auto q = detail::one_minus(m, parts);
    boosted += q * q;
  }

  BinaryPolynomial h = boosted * config.root_level_boost;

  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      parts.clear();
      for (std::size_t i = 1; i <= top; ++i) {
        parts.push_back(var(layout.x(u, i - 1)) * var(layout.x(v, i)));
        parts.push_back(var(layout.x(v, i - 1)) * var(layout.x(u, i)));
      }
      auto q = detail::one_minus(m, parts);
      h += var(layout.y(u, v)) * (q * q);
    }
  }

  for (Vertex u = 0; u < n; ++u) {
    for (std::size_t i = 1; i <= top; ++i) {
      parts.clear();
      for (Vertex v = 0; v < n; ++v) {
        if (v != u) parts.push_back(var(layout.y(u, v)) * var(layout.x(v, i - 1)));
      }
      auto q = detail::one_minus(m, parts);
      h += var(layout.x(u, i)) * (q * q);
    }
  }
  return h;
}

inline BinaryPolynomial build_h_b(const WeightedGraph& g, const VariableLayout& layout) {
  detail::check_layout(g, layout);
  BinaryPolynomial h(layout.total());
  for (const auto& e : g.edges()) h.add({layout.y(e)}, g.weight(e));
  return h;
}

struct CompiledHamiltonian {
  BinaryPolynomial polynomial;
  VariableLayout layout;
};

// A * H_A + B * H_B. Warns when A <= B * sum(w), where a single constraint
// violation is no longer guaranteed to cost more than any edge selection.
inline CompiledHamiltonian build_h_mst(const WeightedGraph& g, const PenaltyConfig& config) {
  config.validate();
  const VariableLayout layout(g);
  const double bound = config.b * g.total_weight();
  if (config.a <= bound) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "penalty weight A = %.6g does not exceed B * sum(w) = %.6g; "
                  "constraint violations may compete with feasible trees",
                  config.a, bound);
    diagnose(buf);
  }
  BinaryPolynomial h = build_h_a(g, layout, config) * config.a;
  h += build_h_b(g, layout) * config.b;
  return {std::move(h), layout};
}

// Diagonal of H_MST over all 2^total basis states, evaluated from the
// constraint terms directly.
inline DiagonalOperator compile_diagonal(const WeightedGraph& g, const VariableLayout& layout,
                                         const PenaltyConfig& config,
                                         int ceiling = kDefaultQubitCeiling) {
  detail::check_layout(g, layout);
  config.validate();
  const int m = static_cast<int>(layout.total());
  detail::check_qubits(m, ceiling);
  std::vector<double> d(std::size_t{1} << m);
  const auto count = static_cast<std::int64_t>(d.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < count; ++s) {
    d[static_cast<std::size_t>(s)] =
        evaluate_penalties(g, layout, static_cast<BasisIndex>(s)).h_mst(config);
  }
  return DiagonalOperator(std::move(d));
}

struct Violation {
  enum class Kind { RootCount, LevelCount, NonConsecutiveEdge, ParentCount };

  Kind kind = Kind::RootCount;
  int term = 1;  // 1..4, the constraint term that is nonzero
  std::optional<Vertex> vertex;
  std::optional<Edge> edge;
  std::optional<std::size_t> level;
  int count = 0;  // offending count (roots, levels, level links or parents)
  std::string message;
};

struct DecodedSolution {
  std::optional<Vertex> root;
  std::vector<std::optional<std::size_t>> level_of;
  std::vector<Edge> edges;
  std::vector<Violation> violations;
  double energy = 0.0;

  bool valid() const noexcept { return violations.empty(); }
};

inline DecodedSolution decode(BasisIndex s, const WeightedGraph& g, const VariableLayout& layout,
                              const PenaltyConfig& config) {
  detail::check_layout(g, layout);
  if (layout.total() < 64 && (s >> layout.total()) != 0) {
    throw std::invalid_argument("bitstring longer than the layout");
  }
  auto bit = [s](std::uint32_t j) { return static_cast<int>((s >> j) & 1U); };
  const std::size_t n = layout.vertices();
  const std::size_t top = layout.max_level();
  DecodedSolution out;
  out.level_of.resize(n);

  std::vector<Vertex> roots;
  for (Vertex v = 0; v < n; ++v)
    if (bit(layout.x(v, 0))) roots.push_back(v);
  if (roots.size() == 1) out.root = roots.front();
  else {
    Violation viol;
    viol.kind = Violation::Kind::RootCount;
    viol.term = 1;
    viol.count = static_cast<int>(roots.size());
    viol.message = roots.empty() ? "no root" : std::to_string(roots.size()) + " roots at level 0";
    out.violations.push_back(std::move(viol));
  }

  for (Vertex v = 0; v < n; ++v) {
    std::vector<std::size_t> lv;
    for (std::size_t i = 0; i <= top; ++i)
      if (bit(layout.x(v, i))) lv.push_back(i);
    if (lv.size() == 1) {
      out.level_of[v] = lv.front();
      continue;
    }
    Violation viol;
    viol.kind = Violation::Kind::LevelCount;
    viol.term = 2;
    viol.vertex = v;
    viol.count = static_cast<int>(lv.size());
    viol.message = lv.empty() ? "vertex " + std::to_string(v) + " has no level"
                              : "vertex " + std::to_string(v) + " has " + std::to_string(lv.size()) + " levels";
    out.violations.push_back(std::move(viol));
  }

  for (const auto& e : g.edges()) {
    if (!bit(layout.y(e))) continue;
    out.edges.push_back(e);
    int links = 0;
    for (std::size_t i = 1; i <= top; ++i) {
      links += bit(layout.x(e.u, i - 1)) * bit(layout.x(e.v, i)) +
               bit(layout.x(e.v, i - 1)) * bit(layout.x(e.u, i));
    }
    if (links == 1) continue;
    Violation viol;
    viol.kind = Violation::Kind::NonConsecutiveEdge;
    viol.term = 3;
    viol.edge = e;
    viol.count = links;
    viol.message = "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has " +
                   std::to_string(links) + " consecutive-level links (expected 1)";
    out.violations.push_back(std::move(viol));
  }

  for (Vertex u = 0; u < n; ++u) {
    for (std::size_t i = 1; i <= top; ++i) {
      if (!bit(layout.x(u, i))) continue;
      int parents = 0;
      for (Vertex v = 0; v < n; ++v)
        if (v != u) parents += bit(layout.y(u, v)) * bit(layout.x(v, i - 1));
      if (parents == 1) continue;
      Violation viol;
      viol.kind = Violation::Kind::ParentCount;
      viol.term = 4;
      viol.vertex = u;
      viol.level = i;
      viol.count = parents;
      viol.message = "vertex " + std::to_string(u) + " at level " + std::to_string(i) + " has " +
                     std::to_string(parents) + " parents at level " + std::to_string(i - 1) +
                     " (expected 1)";
      out.violations.push_back(std::move(viol));
    }
  }

  out.energy = evaluate_penalties(g, layout, s).h_mst(config);
  return out;
}

// Basis state encoding `tree` rooted at `root` with breadth-first levels.
// Throws when the depth from `root` exceeds the layout's level range.
inline BasisIndex encode_tree(const WeightedGraph& g, const VariableLayout& layout,
                              std::span<const Edge> tree, Vertex root) {
  detail::check_layout(g, layout);
  if (!is_spanning_tree(g, tree)) throw std::invalid_argument("edges do not form a spanning tree");
  const std::size_t n = g.size();
  std::vector<std::vector<Vertex>> adj(n);
  for (const auto& e : tree) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<std::optional<std::size_t>> level(n);
  std::vector<Vertex> queue{root};
  level[root] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex u = queue[head];
    for (Vertex v : adj[u]) {
      if (level[v]) continue;
      level[v] = *level[u] + 1;
      queue.push_back(v);
    }
  }
  BasisIndex s = 0;
  for (Vertex v = 0; v < n; ++v) {
    if (*level[v] > layout.max_level()) throw std::invalid_argument("tree too deep for the level range from this root");
    s |= BasisIndex{1} << layout.x(v, *level[v]);
  }
  for (const auto& e : tree) s |= BasisIndex{1} << layout.y(e);
  return s;
}

}  // namespace falqon_mst

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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "falqon_mst/graph.hpp"
#include "falqon_mst/rng.hpp"

namespace falqon_mst::data {

enum class LabelMapping {
  Identity,          // distinct labels -> 0..k-1 in sorted order
  ZeroVsPositive,    // numeric labels: 0 -> 0, anything > 0 -> 1
};

struct LoadOptions {
  // Index (negative counts from the end) or header name.
  std::variant<int, std::string> label_column = -1;
  std::string missing_marker = "?";
  LabelMapping label_mapping = LabelMapping::Identity;
};

struct Dataset {
  std::string name;
  std::vector<Sample> samples;
  std::size_t class_count = 0;
  std::vector<std::string> class_names;  // by class id
  std::size_t raw_rows = 0;
  std::size_t dropped_rows = 0;

  std::size_t feature_count() const { return samples.empty() ? 0 : samples.front().features.size(); }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"'");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"'");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

// Comma-separated numeric features plus one label column. A first row that
// does not parse as numbers is taken as a header. Rows holding the missing
// marker are dropped and counted.
inline Dataset load_csv(const std::filesystem::path& path, const LoadOptions& options,
                        std::string name = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file " + path.string());

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    rows.push_back(detail::split_csv_line(line));
  }
  if (rows.empty()) throw std::runtime_error("dataset file " + path.string() + " is empty");

  const std::size_t width = rows.front().size();
  if (width < 2) throw std::runtime_error("dataset rows need a label and at least one feature");

  std::optional<std::vector<std::string>> header;
  auto resolve_label = [&]() -> std::size_t {
    if (const int* idx = std::get_if<int>(&options.label_column)) {
      const long long i = *idx < 0 ? static_cast<long long>(width) + *idx : *idx;
      if (i < 0 || i >= static_cast<long long>(width)) throw std::invalid_argument("label column out of range");
      return static_cast<std::size_t>(i);
    }
    const auto& col = std::get<std::string>(options.label_column);
    if (!header) throw std::invalid_argument("label column named '" + col + "' but the file has no header");
    const auto it = std::find(header->begin(), header->end(), col);
    if (it == header->end()) throw std::invalid_argument("no column named '" + col + "'");
    return static_cast<std::size_t>(it - header->begin());
  };

  // Header detection needs the label index, which may itself need the header.
  {
    const auto& first = rows.front();
    bool numeric = true;
    std::size_t label_guess = width - 1;
    if (const int* idx = std::get_if<int>(&options.label_column)) {
      const long long i = *idx < 0 ? static_cast<long long>(width) + *idx : *idx;
      if (i >= 0 && i < static_cast<long long>(width)) label_guess = static_cast<std::size_t>(i);
    } else {
      numeric = false;
    }
    for (std::size_t c = 0; numeric && c < first.size(); ++c) {
      if (c == label_guess || first[c] == options.missing_marker) continue;
      numeric = detail::parse_real(first[c]).has_value();
    }
    if (!numeric) {
      header = first;
      rows.erase(rows.begin());
    }
  }
  const std::size_t label_col = resolve_label();

  Dataset ds;
  ds.name = name.empty() ? path.stem().string() : std::move(name);
  std::vector<std::string> raw_labels;
  std::size_t row_index = 0;
  for (const auto& row : rows) {
    const std::size_t source = row_index++;
    ++ds.raw_rows;
    if (row.size() != width) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(source) + " has " +
                               std::to_string(row.size()) + " fields, expected " + std::to_string(width));
    }
    if (std::find(row.begin(), row.end(), options.missing_marker) != row.end()) {
      ++ds.dropped_rows;
      continue;
    }
    Sample s;
    s.source_index = source;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      const auto v = detail::parse_real(row[c]);
      if (!v) {
        throw std::runtime_error(path.string() + ": non-numeric feature '" + row[c] + "' in row " +
                                 std::to_string(source));
      }
      s.features.push_back(*v);
    }
    raw_labels.push_back(row[label_col]);
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) throw std::runtime_error(path.string() + ": no rows left after dropping missing values");

  if (options.label_mapping == LabelMapping::ZeroVsPositive) {
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      const auto v = detail::parse_real(raw_labels[i]);
      if (!v) throw std::runtime_error("non-numeric label '" + raw_labels[i] + "' cannot be binarized");
      ds.samples[i].label = *v > 0.0 ? 1 : 0;
    }
    ds.class_names = {"0", ">0"};
  } else {
    bool all_numeric = std::all_of(raw_labels.begin(), raw_labels.end(),
                                   [](const std::string& l) { return detail::parse_real(l).has_value(); });
    std::vector<std::string> distinct = raw_labels;
    std::sort(distinct.begin(), distinct.end(), [&](const std::string& a, const std::string& b) {
      return all_numeric ? *detail::parse_real(a) < *detail::parse_real(b) : a < b;
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end(), [&](const std::string& a, const std::string& b) {
                     return all_numeric ? *detail::parse_real(a) == *detail::parse_real(b) : a == b;
                   }),
                   distinct.end());
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      const auto it = std::find_if(distinct.begin(), distinct.end(), [&](const std::string& d) {
        return all_numeric ? *detail::parse_real(d) == *detail::parse_real(raw_labels[i]) : d == raw_labels[i];
      });
      ds.samples[i].label = static_cast<int>(it - distinct.begin());
    }
    ds.class_names = std::move(distinct);
  }
  int max_label = 0;
  for (const auto& s : ds.samples) max_label = std::max(max_label, s.label);
  ds.class_count = static_cast<std::size_t>(max_label) + 1;
  return ds;
}

// Entry of the dataset manifest shipped in data/datasets.json.
struct ManifestEntry {
  std::string name;
  std::string filename;
  LoadOptions options;
  std::size_t expected_rows = 0;      // raw rows, before dropping
  std::size_t expected_features = 0;
  std::size_t expected_classes = 0;
};

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  const auto j = nlohmann::json::parse(in);
  std::vector<ManifestEntry> out;
  for (const auto& e : j.at("datasets")) {
    ManifestEntry m;
    m.name = e.at("name").get<std::string>();
    m.filename = e.at("filename").get<std::string>();
    const auto& lc = e.at("label_column");
    if (lc.is_string()) m.options.label_column = lc.get<std::string>();
    else m.options.label_column = lc.get<int>();
    m.options.missing_marker = e.value("missing_marker", std::string("?"));
    const auto mapping = e.value("label_mapping", std::string("identity"));
    if (mapping == "identity") m.options.label_mapping = LabelMapping::Identity;
    else if (mapping == "zero-vs-positive") m.options.label_mapping = LabelMapping::ZeroVsPositive;
    else throw std::runtime_error("unknown label_mapping '" + mapping + "'");
    m.expected_rows = e.at("expected_rows").get<std::size_t>();
    m.expected_features = e.at("expected_features").get<std::size_t>();
    m.expected_classes = e.at("expected_classes").get<std::size_t>();
    out.push_back(std::move(m));
  }
  return out;
}

// FALQON_MST_DATA when set, otherwise the build-time default.
inline std::filesystem::path data_directory() {
  if (const char* env = std::getenv("FALQON_MST_DATA"); env && *env) return env;
#ifdef FALQON_MST_DEFAULT_DATA_DIR
  return FALQON_MST_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

class DatasetNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loads `name` from `dir` using the manifest in `dir` (falling back to the
// build-time data directory for the manifest) and checks the expected shape.
inline Dataset load_named(const std::string& name, std::filesystem::path dir = {}) {
  if (dir.empty()) dir = data_directory();
  auto manifest_path = dir / "datasets.json";
  if (!std::filesystem::exists(manifest_path)) manifest_path = data_directory() / "datasets.json";
#ifdef FALQON_MST_DEFAULT_DATA_DIR
  if (!std::filesystem::exists(manifest_path))
    manifest_path = std::filesystem::path(FALQON_MST_DEFAULT_DATA_DIR) / "datasets.json";
#endif
  const auto manifest = load_manifest(manifest_path);
  const auto it = std::find_if(manifest.begin(), manifest.end(), [&](const auto& e) { return e.name == name; });
  if (it == manifest.end()) throw std::invalid_argument("dataset '" + name + "' is not in the manifest");
  const auto file = dir / it->filename;
  if (!std::filesystem::exists(file)) {
    throw DatasetNotFound("dataset file " + file.string() + " not found (set FALQON_MST_DATA)");
  }
  Dataset ds = load_csv(file, it->options, name);
  if (ds.raw_rows != it->expected_rows || ds.feature_count() != it->expected_features ||
      ds.class_count != it->expected_classes) {
    throw std::runtime_error("dataset '" + name + "' has " + std::to_string(ds.raw_rows) + " rows, " +
                             std::to_string(ds.feature_count()) + " features, " +
                             std::to_string(ds.class_count) + " classes; manifest expects " +
                             std::to_string(it->expected_rows) + ", " + std::to_string(it->expected_features) +
                             ", " + std::to_string(it->expected_classes));
  }
  return ds;
}

inline bool dataset_available(const std::string& name, std::filesystem::path dir = {}) {
  try {
    load_named(name, std::move(dir));
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

enum class FeatureScaling { None, MinMax, ZScore };

inline FeatureScaling parse_scaling(std::string_view name) {
  if (name == "none") return FeatureScaling::None;
  if (name == "minmax") return FeatureScaling::MinMax;
  if (name == "zscore") return FeatureScaling::ZScore;
  throw std::invalid_argument("unknown feature scaling '" + std::string(name) + "'");
}

// Rescales every feature column over the whole dataset, to [0, 1] or to zero
// mean and unit (population) variance. Constant columns become 0.
inline void scale_features(Dataset& ds, FeatureScaling mode) {
  if (mode == FeatureScaling::None || ds.samples.empty()) return;
  const std::size_t dim = ds.feature_count();
  const double n = static_cast<double>(ds.samples.size());
  for (std::size_t k = 0; k < dim; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
    for (const auto& s : ds.samples) {
      lo = std::min(lo, s.features[k]);
      hi = std::max(hi, s.features[k]);
      mean += s.features[k];
    }
    mean /= n;
    double var = 0.0;
    for (const auto& s : ds.samples) var += (s.features[k] - mean) * (s.features[k] - mean);
    const double sd = std::sqrt(var / n);
    for (auto& s : ds.samples) {
      double& x = s.features[k];
      if (mode == FeatureScaling::MinMax) x = hi > lo ? (x - lo) / (hi - lo) : 0.0;
      else x = sd > 0.0 ? (x - mean) / sd : 0.0;
    }
  }
}

struct SubsetSpec {
  std::uint64_t seed = 0;
  std::size_t train_size = 4;
  std::size_t test_size = 4;
};

struct Subset {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

namespace detail {

// Largest-remainder apportionment of `slots` over class sizes. Equal
// remainders are ordered by a seeded permutation of the classes.
inline std::vector<std::size_t> apportion(std::span<const std::size_t> sizes, std::size_t slots,
                                          SplitMix64& rng) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  const std::size_t k = sizes.size();
  std::vector<std::size_t> alloc(k);
  std::vector<double> rem(k);
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double q = static_cast<double>(slots) * static_cast<double>(sizes[c]) / static_cast<double>(total);
    alloc[c] = static_cast<std::size_t>(std::floor(q));
    rem[c] = q - std::floor(q);
    used += alloc[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; used < slots; ++i, ++used) ++alloc[order[i % k]];
  return alloc;
}

}  // namespace detail

// Class-stratified disjoint train/test draw. Train and test counts per class
// are apportioned independently by largest remainder; members are drawn from
// a seeded shuffle of each class and both halves are shuffled at the end.
inline Subset sample_subset(const Dataset& ds, const SubsetSpec& spec) {
  const std::size_t need = spec.train_size + spec.test_size;
  if (ds.samples.size() < need) throw std::invalid_argument("dataset too small for the requested subset");
  if (spec.train_size == 0 || spec.test_size == 0) throw std::invalid_argument("subset halves must be non-empty");

  std::vector<std::vector<std::size_t>> members(ds.class_count);
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    members[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());

  SplitMix64 rng(spec.seed);
  const auto train_alloc = detail::apportion(sizes, spec.train_size, rng);
  const auto test_alloc = detail::apportion(sizes, spec.test_size, rng);

  Subset out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto pool = members[c];
    if (pool.size() < train_alloc[c] + test_alloc[c]) {
      throw std::invalid_argument("class " + std::to_string(c) + " has too few samples for the subset");
    }
    rng.shuffle(pool);
    for (std::size_t i = 0; i < train_alloc[c]; ++i) out.train.push_back(ds.samples[pool[i]]);
    for (std::size_t i = 0; i < test_alloc[c]; ++i) out.test.push_back(ds.samples[pool[train_alloc[c] + i]]);
  }
  rng.shuffle(out.train);
  rng.shuffle(out.test);
  return out;
}

}  // namespace falqon_mst::data

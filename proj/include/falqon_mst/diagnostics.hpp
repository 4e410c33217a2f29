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

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace falqon_mst {

// Receives non-fatal notices (penalty bound not met, prototype fallback,
// invalid FALQON state replaced by Prim, ...). Defaults to std::clog.
using DiagnosticSink = std::function<void(std::string_view)>;

namespace detail {

struct DiagnosticState {
  std::mutex mutex;
  DiagnosticSink sink = [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };
};

inline DiagnosticState& diagnostic_state() {
  static DiagnosticState state;
  return state;
}

}  // namespace detail

// Returns the previous sink.
inline DiagnosticSink set_diagnostic_sink(DiagnosticSink sink) {
  auto& st = detail::diagnostic_state();
  std::lock_guard lock(st.mutex);
  return std::exchange(st.sink, std::move(sink));
}

inline void diagnose(std::string_view message) {
  auto& st = detail::diagnostic_state();
  std::lock_guard lock(st.mutex);
  if (st.sink) st.sink(message);
}

// Collects diagnostics for the lifetime of the object.
class ScopedDiagnosticCapture {
 public:
  ScopedDiagnosticCapture()
      : previous_(set_diagnostic_sink([this](std::string_view m) { messages_.emplace_back(m); })) {}
  ~ScopedDiagnosticCapture() { set_diagnostic_sink(std::move(previous_)); }
  ScopedDiagnosticCapture(const ScopedDiagnosticCapture&) = delete;
  ScopedDiagnosticCapture& operator=(const ScopedDiagnosticCapture&) = delete;

  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  std::vector<std::string> messages_;
  DiagnosticSink previous_;
};

}  // namespace falqon_mst

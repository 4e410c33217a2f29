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

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "falqon_mst/statevector.hpp"

namespace falqon_mst {

// Where the commutator feeding beta_{k+1} is measured. AfterLayer uses the
// state at the end of layer k. BeforeDriver uses the state after the problem
// step of layer k+1, which makes dt <= dt_bound a strict descent guarantee.
enum class FeedbackPoint { AfterLayer, BeforeDriver };

struct FalqonConfig {
  double dt = 0.01;
  std::size_t layers = 10000;
  double beta_init = 0.0;
  std::optional<DriverSpec> driver;  // all qubits when empty
  std::size_t top_k = 10;
  bool enforce_dt_bound = false;
  // Stop once |energy_k - energy_{k-1}| < min_delta. Zero disables.
  double min_delta = 0.0;
  int qubit_ceiling = kDefaultQubitCeiling;
  FeedbackPoint feedback = FeedbackPoint::AfterLayer;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (layers < 1) throw std::invalid_argument("layers must be >= 1");
    if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
    if (!(min_delta >= 0.0)) throw std::invalid_argument("min_delta must be non-negative");
  }
};

struct LayerRecord {
  std::size_t layer = 0;
  double beta = 0.0;
  double energy = 0.0;
};

using FalqonTrace = std::vector<LayerRecord>;

struct FalqonResult {
  FalqonTrace trace;
  std::vector<BasisProbability> top_states;
  int qubits = 0;
  double final_energy = 0.0;
  double ground_energy = 0.0;
  double ground_probability = 0.0;
  double top1_energy = 0.0;
  bool top1_valid = false;
  bool success = false;
  bool in_top_k = false;
};

// Sufficient step for monotone decrease: 1 / (4 ||H_p|| ||H_d||^2), with
// ||H_p|| = max|diag| and ||H_d|| = number of driver qubits.
inline double dt_bound(const DiagonalOperator& d, const DriverSpec& driver) {
  const double hp = d.max_abs();
  const double hd = static_cast<double>(driver.qubits.size());
  if (hp == 0.0 || hd == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (4.0 * hp * hd * hd);
}

// True when `energy` is a ground energy, absolute tolerance 1e-9 scaled by
// max(1, |ground|).
inline bool is_ground_energy(double energy, double ground) {
  return std::abs(energy - ground) <= 1e-9 * std::max(1.0, std::abs(ground));
}

using ValidityOracle = std::function<bool(BasisIndex)>;

// Layer k applies exp(-i H_p dt), then exp(-i beta_k H_d dt), records
// <H_p>, and feeds back beta_{k+1} = -<i[H_d, H_p]> measured at
// config.feedback. beta_1 = beta_init.
inline FalqonResult run_falqon(const DiagonalOperator& diag, const ValidityOracle& is_valid,
                               const FalqonConfig& config,
                               std::optional<StateVector> initial = std::nullopt) {
  config.validate();
  const int m = diag.qubits();
  detail::check_qubits(m, config.qubit_ceiling);
  const DriverSpec driver = config.driver.value_or(DriverSpec::all(m));
  driver.validate(m);
  if (config.enforce_dt_bound) {
    const double bound = dt_bound(diag, driver);
    if (config.dt > bound) {
      throw std::invalid_argument("dt " + std::to_string(config.dt) + " exceeds the monotonicity bound " +
                                  std::to_string(bound));
    }
  }

  StateVector psi = initial ? std::move(*initial) : init_plus_state(m, config.qubit_ceiling);
  if (psi.size() != diag.size()) throw std::invalid_argument("initial state dimension mismatch");
  const DiagonalPropagator problem(diag, config.dt);

  FalqonResult result;
  result.qubits = m;
  result.trace.reserve(config.layers);
  double beta = config.beta_init;
  for (std::size_t k = 1; k <= config.layers; ++k) {
    problem.apply(psi);
    if (config.feedback == FeedbackPoint::BeforeDriver && k > 1) beta = -commutator_expectation(psi, diag, driver);
    apply_driver_rotation(psi, driver, beta, config.dt);
    const double e = energy(psi, diag);
    if (!std::isfinite(e)) throw std::runtime_error("non-finite energy at layer " + std::to_string(k));
    result.trace.push_back({k, beta, e});
    if (config.min_delta > 0.0 && k > 1 &&
        std::abs(e - result.trace[k - 2].energy) < config.min_delta) {
      break;
    }
    if (config.feedback == FeedbackPoint::AfterLayer) beta = -commutator_expectation(psi, diag, driver);
  }

  result.final_energy = result.trace.back().energy;
  result.ground_energy = diag.min();
  const auto amp = psi.amplitudes();
  for (std::size_t s = 0; s < diag.size(); ++s) {
    if (is_ground_energy(diag[s], result.ground_energy)) result.ground_probability += std::norm(amp[s]);
  }

  result.top_states = top_k_probabilities(psi, std::min<std::size_t>(config.top_k, psi.size()));
  auto is_solution = [&](BasisIndex s) {
    return is_ground_energy(diag[s], result.ground_energy) && (!is_valid || is_valid(s));
  };
  const BasisIndex top1 = result.top_states.front().state;
  result.top1_energy = diag[top1];
  result.top1_valid = !is_valid || is_valid(top1);
  result.success = is_solution(top1);
  for (const auto& st : result.top_states) result.in_top_k = result.in_top_k || is_solution(st.state);
  return result;
}

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Header "layer,beta,energy".
inline void write_trace_csv(std::ostream& os, const FalqonTrace& trace) {
  os << "layer,beta,energy\n";
  for (const auto& r : trace)
    os << r.layer << ',' << detail::format_real(r.beta) << ',' << detail::format_real(r.energy) << '\n';
}

// Fields: top_states [{bitstring, probability}], final_energy, ground_energy,
// success, in_top_k.
inline nlohmann::ordered_json result_to_json(const FalqonResult& r) {
  nlohmann::ordered_json j;
  auto states = nlohmann::ordered_json::array();
  for (const auto& st : r.top_states) {
    nlohmann::ordered_json e;
    e["bitstring"] = basis_to_text(st.state, r.qubits);
    e["probability"] = st.probability;
    states.push_back(std::move(e));
  }
  j["top_states"] = std::move(states);
  j["final_energy"] = r.final_energy;
  j["ground_energy"] = r.ground_energy;
  j["success"] = r.success;
  j["in_top_k"] = r.in_top_k;
  return j;
}

}  // namespace falqon_mst

// Copyright 2026 The vqsep Authors
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

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqsep/circuits.hpp"
#include "vqsep/qcore.hpp"

namespace vqsep {

class NonFiniteCost : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A deterministic scalar cost over a flat parameter vector, optionally with
/// an analytic gradient. Evaluation is const and safe to call concurrently.
class Objective {
 public:
  using CostFn = std::function<double(std::span<const double>)>;
  /// Returns the cost and writes the gradient into the second argument.
  using ValueGradFn = std::function<double(std::span<const double>, std::span<double>)>;

  Objective(std::size_t arity, std::string tag, CostFn cost, ValueGradFn value_grad = {});

  std::size_t arity() const { return arity_; }
  const std::string& tag() const { return tag_; }
  bool has_analytic_gradient() const { return static_cast<bool>(value_grad_); }

  double evaluate(std::span<const double> params) const;
  /// Analytic gradient when available, central differences otherwise.
  double value_and_gradient(std::span<const double> params, std::span<double> grad) const;

 private:
  std::size_t arity_;
  std::string tag_;
  CostFn cost_;
  ValueGradFn value_grad_;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Central finite-difference gradient of obj.evaluate.
std::vector<double> gradient(const Objective& obj, std::span<const double> params,
                             double step = kFiniteDifferenceStep);

struct OptimizerConfig {
  int max_iterations = 2000;
  int restarts = 10;
  double learning_rate = 0.05;
  /// A restart stops once the cost moved less than this over `stall_window`
  /// iterations.
  double tolerance = 1e-9;
  int stall_window = 50;
  std::uint64_t seed = 0;
  /// Success threshold epsilon; a restart exits as soon as its cost is below.
  double threshold = 1e-4;
  /// Skip the remaining restarts after the first one that reaches threshold.
  bool stop_on_success = true;

  void validate() const;
};

struct OptResult {
  std::vector<double> best_params;
  double best_cost = 0.0;
  int iterations_used = 0;
  int restart_index = 0;
  bool converged_below_threshold = false;
  /// Best cost of every restart that ran, in restart order. NaN marks a
  /// restart aborted by a non-finite cost.
  std::vector<double> restart_costs;
};

struct TracePoint {
  /// Caller-defined stage id (candidate index, round number); 0 from minimize.
  int stage = 0;
  int restart = 0;
  int iteration = 0;
  double cost = 0.0;
};
using TraceSink = std::function<void(const TracePoint&)>;

/// Produces the starting point of restart r. The default draws every
/// coordinate uniformly from [0, 2pi).
using Initializer = std::function<std::vector<double>(int restart, std::mt19937_64& rng)>;

std::vector<double> uniform_angles(std::size_t count, std::mt19937_64& rng);

/// Multi-restart Adam descent. Ties between restarts go to the lower index.
OptResult minimize(const Objective& obj, const OptimizerConfig& cfg,
                   const Initializer& init = {}, const TraceSink& trace = {});

/// Softmax with max subtraction.
std::vector<double> simplex_map(std::span<const double> raw);

/// 1 - |<psi| U(params) |0...0>|.
Objective vqsr_objective(const PureState& target, const ParamCircuit& c);

/// rho^m / tr(rho^m), computed once and shared between objectives.
struct NoisyTarget {
  std::shared_ptr<const CMatrix> normalized_power;
  int m = 1;
  double denominator = 1.0;
};
NoisyTarget make_noisy_target(const DensityMatrix& rho, int m);

/// 1 - sqrt(<phi| rho^m |phi> / tr rho^m) with phi = U(params)|0...0>.
Objective vqsr_noisy_objective(const DensityMatrix& rho, int m, const ParamCircuit& c);
Objective vqsr_noisy_objective(const NoisyTarget& target, const ParamCircuit& c);

/// Parameter layout of an ensemble objective: each member's circuit slots
/// back to back, then one raw (pre-softmax) weight per member.
struct EnsembleLayout {
  std::vector<std::size_t> offsets;
  std::size_t weights_offset = 0;
  std::size_t arity = 0;
};
EnsembleLayout ensemble_layout(const std::vector<ParamCircuit>& members);

/// ||sum_m q_m |phi_m><phi_m| - rho||_HS^2 with q = simplex_map(raw weights).
/// One evaluation builds the member Gram matrix, O(M^2) overlaps.
Objective ensemble_objective(const DensityMatrix& target, std::vector<ParamCircuit> members);

/// The ensemble encoded by `params` under `ensemble_layout(members)`.
Ensemble decode_ensemble(const std::vector<ParamCircuit>& members, std::span<const double> params);

}  // namespace vqsep

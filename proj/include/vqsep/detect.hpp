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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vqsep/circuits.hpp"
#include "vqsep/optim.hpp"
#include "vqsep/qcore.hpp"

namespace vqsep {

using Partition = std::vector<std::vector<int>>;

/// Undirected graph on qubits; edges only between distinct valid vertices.
class EntanglementGraph {
 public:
  explicit EntanglementGraph(int n_vertices) : n_(n_vertices) {}

  void add_edge(int a, int b);
  int n_vertices() const { return n_; }
  const std::vector<QubitPair>& edges() const { return edges_; }

 private:
  int n_;
  std::vector<QubitPair> edges_;
};

struct PairPurity {
  QubitPair pair;
  /// Purity of qubit pair.first in the reconstructed state.
  double purity = 1.0;
  /// Same quantity evaluated on the target, when one is available.
  std::optional<double> target_purity;
  bool edge = false;
};

/// Purities of every entangling pair of `winner` and the resulting graph.
struct GraphAnalysis {
  EntanglementGraph graph;
  std::vector<PairPurity> purities;
};

GraphAnalysis analyze_entanglement(const PureState& reconstructed, const ParamCircuit& winner,
                                   double purity_tol);

EntanglementGraph entanglement_graph(const PureState& reconstructed, const ParamCircuit& winner,
                                     std::span<const double> params, double purity_tol);

/// Connected components (k, blocks sorted by smallest member).
std::pair<int, Partition> k_from_graph(const EntanglementGraph& g);

struct AdaptiveConfig {
  double epsilon = 1e-4;
  /// Defaults to n^2 when unset.
  std::optional<int> s_max;
  double purity_tol = 1e-4;
  int m_max = 8;
  OptimizerConfig optimizer;
  bool include_p1_member_per_round = false;
  /// Members lighter than this are reported but ignored when taking min k_m.
  double member_weight_floor = 1e-4;
  /// After a candidate first drops below epsilon it is polished with a
  /// small-step single-restart descent down to this cost, so that the
  /// purity read-out is not dominated by reconstruction error.
  double refine_threshold = 1e-9;
  int refine_iterations = 2000;
  double refine_learning_rate = 1e-3;

  void validate() const;
  int effective_s_max(int n_qubits) const;
};

enum class VerdictStatus { Detected, Inconclusive };
std::string to_string(VerdictStatus s);

struct CircuitRef {
  PoolTag pool = PoolTag::P1;
  int index = 0;
  WMode w_mode = WMode::Full3;
  std::vector<QubitPair> pairs;

  static CircuitRef of(const ParamCircuit& c);
};

struct CandidateCost {
  std::string circuit;
  int m = 0;  // 0 when no power is involved
  double best_cost = 0.0;
  int restart_index = 0;
  int iterations = 0;
};

struct MemberReport {
  CircuitRef circuit;
  double weight = 0.0;
  int k = 0;
  Partition partition;
  std::vector<PairPurity> purities;
  bool counted = true;  // false when below the weight floor
};

struct RoundReport {
  int s = 0;
  std::size_t member_count = 0;
  std::size_t param_count = 0;
  double best_cost = 0.0;
};

struct SeparabilityVerdict {
  std::string pipeline;
  int n_qubits = 0;
  VerdictStatus status = VerdictStatus::Inconclusive;
  std::optional<int> k;
  std::optional<Partition> partition;
  std::optional<CircuitRef> winning_circuit;
  std::optional<std::vector<double>> optimal_params;
  double final_cost = 0.0;
  double epsilon = 0.0;

  std::optional<int> m_used;
  std::optional<int> rounds_used;
  std::vector<CandidateCost> candidates;
  std::vector<PairPurity> pair_purities;
  std::vector<MemberReport> members;
  std::vector<RoundReport> rounds;

  /// Member-count bounds quoted for fixed-size ensembles: 4^n and 2^n.
  std::optional<std::uint64_t> caratheodory_members;
  std::optional<std::uint64_t> fixed_members_2n;

  bool detected() const { return status == VerdictStatus::Detected; }
};

SeparabilityVerdict detect_pure(const PureState& psi, const AdaptiveConfig& cfg,
                                const TraceSink& trace = {});
SeparabilityVerdict detect_noisy_pure(const DensityMatrix& rho_noise, const AdaptiveConfig& cfg,
                                      const TraceSink& trace = {});
SeparabilityVerdict algorithm1(const DensityMatrix& rho, const AdaptiveConfig& cfg,
                               const TraceSink& trace = {});
SeparabilityVerdict algorithm2(const DensityMatrix& rho, const AdaptiveConfig& cfg,
                               const TraceSink& trace = {});

/// Member circuits of Algorithm 1 at round s: s copies of the reduced P1 circuit.
std::vector<ParamCircuit> algorithm1_members(int n, int s);
/// Member circuits of Algorithm 2 at round s: s copies of every P2 circuit,
/// plus one P1 circuit per round when requested.
std::vector<ParamCircuit> algorithm2_members(int n, int s, bool include_p1);

}  // namespace vqsep

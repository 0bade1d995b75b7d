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

#include "vqsep/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vqsep {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Partition singletons(int n) {
  Partition p;
  for (int q = 0; q < n; ++q) p.push_back({q});
  return p;
}

TraceSink staged(const TraceSink& trace, int stage) {
  if (!trace) return {};
  return [trace, stage](const TracePoint& p) {
    TracePoint q = p;
    q.stage = stage;
    trace(q);
  };
}

OptimizerConfig base_optimizer(const AdaptiveConfig& cfg) {
  OptimizerConfig opt = cfg.optimizer;
  opt.threshold = cfg.epsilon;
  return opt;
}

// Continues from a successful point with small steps; returns the polished
// result when it improves on `found`.
OptResult refine(const Objective& obj, const OptResult& found, const AdaptiveConfig& cfg) {
  if (found.best_cost <= cfg.refine_threshold || cfg.refine_iterations <= 0) return found;
  OptimizerConfig opt = cfg.optimizer;
  opt.restarts = 1;
  opt.max_iterations = cfg.refine_iterations;
  opt.learning_rate = cfg.refine_learning_rate;
  opt.threshold = cfg.refine_threshold;
  opt.tolerance = std::min(opt.tolerance, cfg.refine_threshold);
  const auto start = found.best_params;
  OptResult polished = minimize(obj, opt, [&start](int, std::mt19937_64&) { return start; });
  if (polished.best_cost >= found.best_cost) return found;
  OptResult out = found;
  out.best_cost = polished.best_cost;
  out.best_params = std::move(polished.best_params);
  out.iterations_used += polished.iterations_used;
  return out;
}

std::vector<ParamCircuit> pure_candidates(int n) {
  std::vector<ParamCircuit> out;
  if (n < 2) {
    out.push_back(make_p1_circuit(n, WMode::Full3));
    return out;
  }
  CircuitPool pool = build_pool(n, WMode::Full3);
  out.push_back(pool.p1);
  for (auto& c : pool.p2) out.push_back(std::move(c));
  return out;
}

// Shared tail of the pure and noisy pipelines: read the partition off the
// winning circuit.
void fill_pure_success(SeparabilityVerdict& v, const ParamCircuit& winner, const OptResult& res,
                       const AdaptiveConfig& cfg, const PureState* target) {
  const int n = winner.n_qubits();
  v.status = VerdictStatus::Detected;
  v.final_cost = res.best_cost;
  v.winning_circuit = CircuitRef::of(winner);
  v.optimal_params = res.best_params;
  if (winner.pool_tag() == PoolTag::P1) {
    v.k = n;
    v.partition = singletons(n);
    return;
  }
  const PureState rec = apply(winner, res.best_params, PureState::zeros(n));
  GraphAnalysis ga = analyze_entanglement(rec, winner, cfg.purity_tol);
  if (target) {
    for (auto& pp : ga.purities) {
      const int j = pp.pair.first;
      pp.target_purity = purity(reduced_density(*target, std::span<const int>(&j, 1)));
    }
  }
  auto [k, part] = k_from_graph(ga.graph);
  v.k = k;
  v.partition = std::move(part);
  v.pair_purities = std::move(ga.purities);
}

template <typename MakeObjective>
bool run_candidates(SeparabilityVerdict& v, const std::vector<ParamCircuit>& candidates,
                    MakeObjective&& make_objective, const AdaptiveConfig& cfg, int m,
                    const PureState* target, const TraceSink& trace) {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const ParamCircuit& c = candidates[i];
    const Objective obj = make_objective(c);
    OptimizerConfig opt = base_optimizer(cfg);
    opt.seed = mix_seed(cfg.optimizer.seed, static_cast<std::uint64_t>(m), i);
    OptResult res = minimize(obj, opt, {}, staged(trace, static_cast<int>(i)));
    v.candidates.push_back({c.label(), m, res.best_cost, res.restart_index, res.iterations_used});
    v.final_cost = i == 0 ? res.best_cost : std::min(v.final_cost, res.best_cost);
    if (res.best_cost < cfg.epsilon) {
      res = refine(obj, res, cfg);
      v.candidates.back().best_cost = res.best_cost;
      fill_pure_success(v, c, res, cfg, target);
      return true;
    }
  }
  return false;
}

// Warm start for round s from the best point of round s-1: old members keep
// their angles and raw weights, new members get fresh angles. Restart 0 gives
// new members a negligible weight so it starts from the previous optimum;
// later restarts start them at the current smallest weight.
Initializer warm_start(const std::vector<ParamCircuit>& members, const std::vector<double>& prev,
                       std::size_t prev_members) {
  if (prev.empty()) return {};
  const EnsembleLayout layout = ensemble_layout(members);
  return [layout, prev, prev_members](int restart, std::mt19937_64& rng) {
    std::vector<double> x = uniform_angles(layout.arity, rng);
    const std::size_t prev_angles = layout.offsets[prev_members];
    std::copy(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(prev_angles), x.begin());
    const auto prev_raw = std::span<const double>(prev).subspan(prev_angles, prev_members);
    const double min_raw = *std::min_element(prev_raw.begin(), prev_raw.end());
    const std::size_t total_members = layout.offsets.size();
    for (std::size_t m = 0; m < total_members; ++m) {
      x[layout.weights_offset + m] =
          m < prev_members ? prev_raw[m] : (restart == 0 ? min_raw - 30.0 : min_raw);
    }
    return x;
  };
}

struct RoundResult {
  std::vector<ParamCircuit> members;
  OptResult result;
};

template <typename MembersFor, typename OnSuccess>
SeparabilityVerdict adaptive_loop(const DensityMatrix& rho, const AdaptiveConfig& cfg,
                                  const std::string& pipeline, MembersFor&& members_for,
                                  OnSuccess&& on_success, const TraceSink& trace) {
  cfg.validate();
  const int n = rho.n_qubits();
  SeparabilityVerdict v;
  v.pipeline = pipeline;
  v.n_qubits = n;
  v.epsilon = cfg.epsilon;
  v.caratheodory_members = std::uint64_t{1} << (2 * n);
  v.fixed_members_2n = std::uint64_t{1} << n;
  v.final_cost = std::numeric_limits<double>::infinity();

  std::vector<double> prev;
  std::size_t prev_members = 0;
  const int s_max = cfg.effective_s_max(n);
  for (int s = 1; s <= s_max; ++s) {
    std::vector<ParamCircuit> members = members_for(s);
    const Objective obj = ensemble_objective(rho, members);
    OptimizerConfig opt = base_optimizer(cfg);
    opt.seed = mix_seed(cfg.optimizer.seed, 0, static_cast<std::uint64_t>(s));
    OptResult res = minimize(obj, opt, warm_start(members, prev, prev_members), staged(trace, s));
    v.rounds.push_back({s, members.size(), obj.arity(), res.best_cost});
    v.rounds_used = s;
    v.final_cost = std::min(v.final_cost, res.best_cost);
    if (res.best_cost < cfg.epsilon) {
      res = refine(obj, res, cfg);
      v.rounds.back().best_cost = res.best_cost;
      v.final_cost = res.best_cost;
      v.status = VerdictStatus::Detected;
      v.optimal_params = res.best_params;
      on_success(v, members, res);
      return v;
    }
    prev = std::move(res.best_params);
    prev_members = members.size();
  }
  return v;
}

void fill_members(SeparabilityVerdict& v, const std::vector<ParamCircuit>& members,
                  const std::vector<double>& params, const AdaptiveConfig& cfg) {
  const EnsembleLayout layout = ensemble_layout(members);
  const std::vector<double> q =
      simplex_map(std::span<const double>(params).subspan(layout.weights_offset, members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const ParamCircuit& c = members[i];
    MemberReport mr;
    mr.circuit = CircuitRef::of(c);
    mr.weight = q[i];
    mr.counted = q[i] >= cfg.member_weight_floor;
    if (c.pool_tag() == PoolTag::P1) {
      mr.k = c.n_qubits();
      mr.partition = singletons(c.n_qubits());
    } else {
      const auto p = std::span<const double>(params).subspan(layout.offsets[i], c.param_count());
      const PureState rec = apply(c, p, PureState::zeros(c.n_qubits()));
      GraphAnalysis ga = analyze_entanglement(rec, c, cfg.purity_tol);
      auto [k, part] = k_from_graph(ga.graph);
      mr.k = k;
      mr.partition = std::move(part);
      mr.purities = std::move(ga.purities);
    }
    v.members.push_back(std::move(mr));
  }
}

}  // namespace

void EntanglementGraph::add_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("EntanglementGraph: self loop");
  if (a < 0 || b < 0 || a >= n_ || b >= n_) throw QubitIndexError("EntanglementGraph: vertex out of range");
  edges_.emplace_back(std::min(a, b), std::max(a, b));
}

GraphAnalysis analyze_entanglement(const PureState& reconstructed, const ParamCircuit& winner,
                                   double purity_tol) {
  if (winner.pool_tag() != PoolTag::P2) {
    throw std::invalid_argument("entanglement_graph: winner must come from P2");
  }
  if (reconstructed.n_qubits() != winner.n_qubits()) {
    throw DimensionMismatch("entanglement_graph: qubit count mismatch");
  }
  GraphAnalysis out{EntanglementGraph(winner.n_qubits()), {}};
  for (const auto& pair : winner.entangling_pairs()) {
    const int j = pair.first;
    const double p = purity(partial_trace_pure(reconstructed.amplitudes(), reconstructed.n_qubits(),
                                               std::span<const int>(&j, 1)));
    const bool edge = p < 1.0 - purity_tol;
    if (edge) out.graph.add_edge(pair.first, pair.second);
    out.purities.push_back({pair, p, std::nullopt, edge});
  }
  return out;
}

EntanglementGraph entanglement_graph(const PureState& reconstructed, const ParamCircuit& winner,
                                     std::span<const double> params, double purity_tol) {
  if (params.size() != winner.param_count()) throw DimensionMismatch("entanglement_graph: parameter length");
  return analyze_entanglement(reconstructed, winner, purity_tol).graph;
}

std::pair<int, Partition> k_from_graph(const EntanglementGraph& g) {
  const int n = g.n_vertices();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& [a, b] : g.edges()) {
    const int ra = find(a), rb = find(b);
    if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  // Roots are the smallest member of each component, so visiting vertices in
  // order yields blocks sorted by smallest member.
  Partition blocks;
  std::vector<int> block_of(static_cast<std::size_t>(n), -1);
  for (int q = 0; q < n; ++q) {
    const int r = find(q);
    if (block_of[static_cast<std::size_t>(r)] < 0) {
      block_of[static_cast<std::size_t>(r)] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(block_of[static_cast<std::size_t>(r)])].push_back(q);
  }
  return {static_cast<int>(blocks.size()), std::move(blocks)};
}

void AdaptiveConfig::validate() const {
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("AdaptiveConfig: epsilon must lie in (0,1)");
  if (s_max && *s_max < 1) throw std::invalid_argument("AdaptiveConfig: s_max must be >= 1");
  if (!(purity_tol > 0 && purity_tol < 0.5)) {
    throw std::invalid_argument("AdaptiveConfig: purity tolerance must lie in (0, 0.5)");
  }
  if (m_max < 1) throw std::invalid_argument("AdaptiveConfig: m_max must be >= 1");
  if (!(member_weight_floor >= 0 && member_weight_floor < 1)) {
    throw std::invalid_argument("AdaptiveConfig: member weight floor must lie in [0, 1)");
  }
  OptimizerConfig opt = optimizer;
  opt.threshold = epsilon;
  opt.validate();
}

int AdaptiveConfig::effective_s_max(int n_qubits) const { return s_max.value_or(n_qubits * n_qubits); }

std::string to_string(VerdictStatus s) { return s == VerdictStatus::Detected ? "DETECTED" : "INCONCLUSIVE"; }

CircuitRef CircuitRef::of(const ParamCircuit& c) {
  return CircuitRef{c.pool_tag(), c.pool_index(), c.w_mode(), c.entangling_pairs()};
}

SeparabilityVerdict detect_pure(const PureState& psi, const AdaptiveConfig& cfg, const TraceSink& trace) {
  cfg.validate();
  SeparabilityVerdict v;
  v.pipeline = "pure";
  v.n_qubits = psi.n_qubits();
  v.epsilon = cfg.epsilon;
  const auto candidates = pure_candidates(psi.n_qubits());
  run_candidates(
      v, candidates, [&psi](const ParamCircuit& c) { return vqsr_objective(psi, c); }, cfg, 0, &psi,
      trace);
  return v;
}

SeparabilityVerdict detect_noisy_pure(const DensityMatrix& rho_noise, const AdaptiveConfig& cfg,
                                      const TraceSink& trace) {
  cfg.validate();
  SeparabilityVerdict v;
  v.pipeline = "noisy";
  v.n_qubits = rho_noise.n_qubits();
  v.epsilon = cfg.epsilon;
  const auto candidates = pure_candidates(rho_noise.n_qubits());
  double best = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= cfg.m_max; ++m) {
    const NoisyTarget target = make_noisy_target(rho_noise, m);
    const bool ok = run_candidates(
        v, candidates, [&target](const ParamCircuit& c) { return vqsr_noisy_objective(target, c); },
        cfg, m, nullptr, staged(trace, m * 1000));
    if (ok) {
      v.m_used = m;
      return v;
    }
    best = std::min(best, v.final_cost);
  }
  v.final_cost = best;
  return v;
}

std::vector<ParamCircuit> algorithm1_members(int n, int s) {
  return std::vector<ParamCircuit>(static_cast<std::size_t>(s), make_p1_circuit(n, WMode::Reduced2));
}

std::vector<ParamCircuit> algorithm2_members(int n, int s, bool include_p1) {
  const CircuitPool pool = build_pool(n, WMode::Full3);
  std::vector<ParamCircuit> out;
  for (int r = 0; r < s; ++r) {
    out.insert(out.end(), pool.p2.begin(), pool.p2.end());
    if (include_p1) out.push_back(pool.p1);
  }
  return out;
}

SeparabilityVerdict algorithm1(const DensityMatrix& rho, const AdaptiveConfig& cfg, const TraceSink& trace) {
  const int n = rho.n_qubits();
  return adaptive_loop(
      rho, cfg, "mixed-full", [n](int s) { return algorithm1_members(n, s); },
      [&cfg, n](SeparabilityVerdict& v, const std::vector<ParamCircuit>& members, const OptResult& res) {
        v.k = n;
        v.partition = singletons(n);
        v.winning_circuit = CircuitRef::of(members.front());
        fill_members(v, members, res.best_params, cfg);
      },
      trace);
}

SeparabilityVerdict algorithm2(const DensityMatrix& rho, const AdaptiveConfig& cfg, const TraceSink& trace) {
  const int n = rho.n_qubits();
  if (n < 2) throw std::invalid_argument("algorithm2: needs at least two qubits");
  return adaptive_loop(
      rho, cfg, "mixed-k",
      [n, &cfg](int s) { return algorithm2_members(n, s, cfg.include_p1_member_per_round); },
      [&cfg](SeparabilityVerdict& v, const std::vector<ParamCircuit>& members, const OptResult& res) {
        fill_members(v, members, res.best_params, cfg);
        // k = min k_m over members above the weight floor; ties go to the
        // heaviest member.
        const MemberReport* best = nullptr;
        for (const auto& mr : v.members) {
          if (!mr.counted) continue;
          if (!best || mr.k < best->k || (mr.k == best->k && mr.weight > best->weight)) best = &mr;
        }
        if (!best) {
          best = &*std::max_element(v.members.begin(), v.members.end(),
                                    [](const auto& a, const auto& b) { return a.weight < b.weight; });
        }
        v.k = best->k;
        v.partition = best->partition;
        v.winning_circuit = best->circuit;
        v.pair_purities = best->purities;
      },
      trace);
}

}  // namespace vqsep

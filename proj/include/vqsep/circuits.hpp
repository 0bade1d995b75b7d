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

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vqsep/qcore.hpp"

namespace vqsep {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

/// exp(+i a Z / 2) = diag(e^{ia/2}, e^{-ia/2}).
Mat2 rz(double alpha);
/// exp(+i b Y / 2) = [[cos(b/2), sin(b/2)], [-sin(b/2), cos(b/2)]].
Mat2 ry(double beta);

/// CNOT with control on the first (most significant) qubit of the pair.
Mat4 cnot_12();
/// CNOT with control on the second qubit of the pair.
Mat4 cnot_21();

/// Two-qubit interaction
///   Q = C21 [Rz(t1) (x) Ry(t2)] C12 [1 (x) Ry(t3)] C21,
/// composed right to left (the rightmost C21 acts first).
Mat4 q_gate(double t1, double t2, double t3);
/// d Q / d t_k for k in {0, 1, 2}.
Mat4 q_gate_derivative(double t1, double t2, double t3, int k);

/// Interaction angles for exp(i (tx XX + ty YY + tz ZZ)) together with the
/// fixed local wrappers that complete the identity
///   exp(iH) ~ post * Q(theta) * pre      (up to global phase).
struct CanonicalQ {
  std::array<double, 3> theta{};
  Mat4 pre;   // Rz(pi/2) (x) 1, applied before Q
  Mat4 post;  // 1 (x) Rz(-pi/2), applied after Q
  Mat4 wrapped() const;
};
CanonicalQ q_from_canonical(double tx, double ty, double tz);

enum class GateKind { RZ, RY, CNOT, Q };
enum class PoolTag { P1, P2 };
enum class WMode { Full3, Reduced2 };

std::string to_string(GateKind k);
std::string to_string(PoolTag p);
std::string to_string(WMode m);

/// One gate of a parameterized circuit. Two-qubit gates act on
/// (targets[0], targets[1]) with targets[0] as the "first" qubit of the 4x4
/// matrix; for CNOT targets[0] is the control.
struct GateSpec {
  GateKind kind = GateKind::RZ;
  std::array<int, 2> targets{-1, -1};
  std::array<int, 3> slots{-1, -1, -1};

  int num_targets() const { return kind == GateKind::RZ || kind == GateKind::RY ? 1 : 2; }
  int num_slots() const;
};

using QubitPair = std::pair<int, int>;
using GateLayer = std::vector<GateSpec>;

/// Immutable gate program. Parameters are bound only at apply time.
///
/// Slot layout: W blocks are qubit-major with angles in application order
/// (Full3: a1 a2 a3 for Rz(a3) Ry(a2) Rz(a1); Reduced2: a1 a2 for
/// Rz(a2) Ry(a1)). A P2 circuit V_l(a, t) W(g) stores the g block, then three
/// slots per entangling pair in layer order, then the a block.
class ParamCircuit {
 public:
  ParamCircuit(int n_qubits, std::vector<GateLayer> layers, PoolTag tag, int pool_index,
               WMode w_mode, std::vector<QubitPair> entangling_pairs);

  int n_qubits() const { return n_qubits_; }
  const std::vector<GateLayer>& layers() const { return layers_; }
  PoolTag pool_tag() const { return tag_; }
  int pool_index() const { return pool_index_; }
  WMode w_mode() const { return w_mode_; }
  const std::vector<QubitPair>& entangling_pairs() const { return pairs_; }
  std::size_t param_count() const { return param_count_; }
  /// Human-readable identifier such as "P1" or "P2[l=3]".
  std::string label() const;

  /// The Q gate acting on `pair`, or nullptr.
  const GateSpec* q_gate_on(QubitPair pair) const;

 private:
  int n_qubits_;
  std::vector<GateLayer> layers_;
  PoolTag tag_;
  int pool_index_;
  WMode w_mode_;
  std::vector<QubitPair> pairs_;
  std::size_t param_count_ = 0;
};

/// Disjoint-pair layers covering every unordered qubit pair exactly once.
struct PairSchedule {
  int n_qubits = 0;
  std::vector<std::vector<QubitPair>> layers;
  std::size_t size() const { return layers.size(); }
};

PairSchedule pair_schedule(int n);

/// Number of layers pair_schedule(n) produces.
int schedule_layer_count(int n);

struct CircuitPool {
  ParamCircuit p1;
  std::vector<ParamCircuit> p2;
};

ParamCircuit make_p1_circuit(int n, WMode mode);
ParamCircuit make_p2_circuit(int n, std::vector<QubitPair> pairs, int l, WMode mode);
CircuitPool build_pool(int n, WMode mode);

inline std::size_t param_count(const ParamCircuit& c) { return c.param_count(); }

/// U(params) |input>.
PureState apply(const ParamCircuit& c, std::span<const double> params, const PureState& input);

/// U(params)|0...0> as a raw vector.
CVector prepare(const ParamCircuit& c, std::span<const double> params);

/// In-place application of U(params).
void apply_inplace(const ParamCircuit& c, std::span<const double> params, CVector& state);

/// Vector-Jacobian product through the circuit. Given the output
/// phi = U(params)|0...0> and a cotangent vector lam, writes
///   grad[s] = 2 Re <lam | d phi / d params[s]>
/// for every slot s. With lam = M phi this is the gradient of <phi|M|phi>.
void circuit_vjp(const ParamCircuit& c, std::span<const double> params, CVector phi, CVector lam,
                 std::span<double> grad);

// Low-level kernels.
void apply_1q(CVector& state, int n_qubits, int q, const Mat2& u);
void apply_2q(CVector& state, int n_qubits, int q0, int q1, const Mat4& u);

}  // namespace vqsep

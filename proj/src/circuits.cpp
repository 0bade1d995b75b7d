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

#include "vqsep/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace vqsep {
namespace {

constexpr cplx kI{0.0, 1.0};

Mat4 kron2(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

Mat2 pauli_y() {
  Mat2 y;
  y << 0.0, -kI, kI, 0.0;
  return y;
}

Mat2 pauli_z() {
  Mat2 z;
  z << 1.0, 0.0, 0.0, -1.0;
  return z;
}

Mat2 rz_derivative(double a) { return 0.5 * kI * pauli_z() * rz(a); }
Mat2 ry_derivative(double b) { return 0.5 * kI * pauli_y() * ry(b); }

double slot_value(std::span<const double> params, int slot) {
  return params[static_cast<std::size_t>(slot)];
}

// Iterates over the flattened gate list in application order.
template <typename Fn>
void for_each_gate(const ParamCircuit& c, Fn&& fn) {
  for (const auto& layer : c.layers())
    for (const auto& g : layer) fn(g);
}

Mat2 single_matrix(const GateSpec& g, std::span<const double> params) {
  const double a = slot_value(params, g.slots[0]);
  return g.kind == GateKind::RZ ? rz(a) : ry(a);
}

Mat4 pair_matrix(const GateSpec& g, std::span<const double> params) {
  if (g.kind == GateKind::CNOT) return cnot_12();
  return q_gate(slot_value(params, g.slots[0]), slot_value(params, g.slots[1]),
                slot_value(params, g.slots[2]));
}

void apply_gate(CVector& state, int n, const GateSpec& g, std::span<const double> params,
                bool adjoint) {
  if (g.num_targets() == 1) {
    Mat2 u = single_matrix(g, params);
    if (adjoint) u.adjointInPlace();
    apply_1q(state, n, g.targets[0], u);
  } else {
    Mat4 u = pair_matrix(g, params);
    if (adjoint) u.adjointInPlace();
    apply_2q(state, n, g.targets[0], g.targets[1], u);
  }
}

// <lam| D_q |phi> for a single-qubit operator D on qubit q.
cplx braket_1q(const CVector& lam, int n, int q, const Mat2& d, const CVector& phi) {
  const Eigen::Index stride = Eigen::Index{1} << (n - 1 - q);
  const Eigen::Index dim = phi.size();
  cplx acc{0.0, 0.0};
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index j = base; j < base + stride; ++j) {
      const cplx p0 = phi[j], p1 = phi[j + stride];
      acc += std::conj(lam[j]) * (d(0, 0) * p0 + d(0, 1) * p1) +
             std::conj(lam[j + stride]) * (d(1, 0) * p0 + d(1, 1) * p1);
    }
  }
  return acc;
}

cplx braket_2q(const CVector& lam, int n, int q0, int q1, const Mat4& d, const CVector& phi) {
  const Eigen::Index s0 = Eigen::Index{1} << (n - 1 - q0);
  const Eigen::Index s1 = Eigen::Index{1} << (n - 1 - q1);
  const Eigen::Index dim = phi.size();
  cplx acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((i & s0) || (i & s1)) continue;
    const std::array<Eigen::Index, 4> idx{i, i | s1, i | s0, i | s0 | s1};
    for (int r = 0; r < 4; ++r) {
      cplx row{0.0, 0.0};
      for (int c = 0; c < 4; ++c) row += d(r, c) * phi[idx[static_cast<std::size_t>(c)]];
      acc += std::conj(lam[idx[static_cast<std::size_t>(r)]]) * row;
    }
  }
  return acc;
}

// Appends a W block to `layers` starting at slot `base`; returns next slot.
int append_w_block(std::vector<GateLayer>& layers, int n, WMode mode, int base) {
  const int per_qubit = mode == WMode::Full3 ? 3 : 2;
  const std::vector<GateKind> order =
      mode == WMode::Full3 ? std::vector<GateKind>{GateKind::RZ, GateKind::RY, GateKind::RZ}
                           : std::vector<GateKind>{GateKind::RY, GateKind::RZ};
  for (int a = 0; a < per_qubit; ++a) {
    GateLayer layer;
    for (int q = 0; q < n; ++q) {
      GateSpec g;
      g.kind = order[static_cast<std::size_t>(a)];
      g.targets = {q, -1};
      g.slots = {base + per_qubit * q + a, -1, -1};
      layer.push_back(g);
    }
    layers.push_back(std::move(layer));
  }
  return base + per_qubit * n;
}

}  // namespace

Mat2 rz(double alpha) {
  Mat2 m;
  m << std::exp(kI * (alpha / 2)), 0.0, 0.0, std::exp(-kI * (alpha / 2));
  return m;
}

Mat2 ry(double beta) {
  const double c = std::cos(beta / 2), s = std::sin(beta / 2);
  Mat2 m;
  m << c, s, -s, c;
  return m;
}

Mat4 cnot_12() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

Mat4 cnot_21() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = m(2, 2) = m(1, 3) = m(3, 1) = 1.0;
  return m;
}

Mat4 q_gate(double t1, double t2, double t3) {
  const Mat4 c21 = cnot_21();
  return c21 * kron2(rz(t1), ry(t2)) * cnot_12() * kron2(Mat2::Identity(), ry(t3)) * c21;
}

Mat4 q_gate_derivative(double t1, double t2, double t3, int k) {
  const Mat4 c21 = cnot_21();
  const Mat2 id = Mat2::Identity();
  switch (k) {
    case 0:
      return c21 * kron2(rz_derivative(t1), ry(t2)) * cnot_12() * kron2(id, ry(t3)) * c21;
    case 1:
      return c21 * kron2(rz(t1), ry_derivative(t2)) * cnot_12() * kron2(id, ry(t3)) * c21;
    case 2:
      return c21 * kron2(rz(t1), ry(t2)) * cnot_12() * kron2(id, ry_derivative(t3)) * c21;
    default:
      throw std::out_of_range("q_gate_derivative: k must be 0, 1 or 2");
  }
}

Mat4 CanonicalQ::wrapped() const { return post * q_gate(theta[0], theta[1], theta[2]) * pre; }

CanonicalQ q_from_canonical(double tx, double ty, double tz) {
  using std::numbers::pi;
  CanonicalQ out;
  out.theta = {2 * tz - pi / 2, pi / 2 - 2 * tx, 2 * ty - pi / 2};
  out.pre = kron2(rz(pi / 2), Mat2::Identity());
  out.post = kron2(Mat2::Identity(), rz(-pi / 2));
  return out;
}

std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::RZ: return "RZ";
    case GateKind::RY: return "RY";
    case GateKind::CNOT: return "CNOT";
    case GateKind::Q: return "Q";
  }
  return "?";
}

std::string to_string(PoolTag p) { return p == PoolTag::P1 ? "P1" : "P2"; }
std::string to_string(WMode m) { return m == WMode::Full3 ? "FULL3" : "REDUCED2"; }

int GateSpec::num_slots() const {
  switch (kind) {
    case GateKind::RZ:
    case GateKind::RY: return 1;
    case GateKind::CNOT: return 0;
    case GateKind::Q: return 3;
  }
  return 0;
}

ParamCircuit::ParamCircuit(int n_qubits, std::vector<GateLayer> layers, PoolTag tag,
                           int pool_index, WMode w_mode, std::vector<QubitPair> entangling_pairs)
    : n_qubits_(n_qubits),
      layers_(std::move(layers)),
      tag_(tag),
      pool_index_(pool_index),
      w_mode_(w_mode),
      pairs_(std::move(entangling_pairs)) {
  if (n_qubits < 1) throw std::invalid_argument("ParamCircuit: n_qubits must be positive");
  std::set<int> slots;
  for (const auto& layer : layers_) {
    std::vector<bool> busy(static_cast<std::size_t>(n_qubits), false);
    for (const auto& g : layer) {
      for (int t = 0; t < g.num_targets(); ++t) {
        const int q = g.targets[static_cast<std::size_t>(t)];
        if (q < 0 || q >= n_qubits) throw QubitIndexError("ParamCircuit: gate target out of range");
        if (busy[static_cast<std::size_t>(q)]) {
          throw std::invalid_argument("ParamCircuit: overlapping gate supports within a layer");
        }
        busy[static_cast<std::size_t>(q)] = true;
      }
      for (int s = 0; s < g.num_slots(); ++s) {
        if (!slots.insert(g.slots[static_cast<std::size_t>(s)]).second) {
          throw std::invalid_argument("ParamCircuit: parameter slot reused");
        }
      }
    }
  }
  param_count_ = slots.size();
  if (!slots.empty() && (*slots.begin() != 0 || *slots.rbegin() != static_cast<int>(slots.size()) - 1)) {
    throw std::invalid_argument("ParamCircuit: parameter slots are not contiguous from 0");
  }
}

std::string ParamCircuit::label() const {
  if (tag_ == PoolTag::P1) return "P1";
  return "P2[l=" + std::to_string(pool_index_) + "]";
}

const GateSpec* ParamCircuit::q_gate_on(QubitPair pair) const {
  for (const auto& layer : layers_)
    for (const auto& g : layer)
      if (g.kind == GateKind::Q && ((g.targets[0] == pair.first && g.targets[1] == pair.second) ||
                                    (g.targets[0] == pair.second && g.targets[1] == pair.first)))
        return &g;
  return nullptr;
}

int schedule_layer_count(int n) {
  if (n < 2) throw std::invalid_argument("pair schedule requires n >= 2");
  if (n % 2 == 1) return 3 * (n - 1) / 2;
  if (n == 2) return 1;
  return 3 * n / 2 - 3;
}

PairSchedule pair_schedule(int n) {
  if (n < 2) throw std::invalid_argument("pair_schedule: n must be >= 2, got " + std::to_string(n));
  // Pairs are grouped by index distance d. Within a distance group the pairs
  // (i, i+d) are split into alternating runs of length d; even runs share a
  // layer, odd runs share a second layer. Each run covers 2d consecutive
  // qubits without overlap, so every layer is a matching.
  PairSchedule out;
  out.n_qubits = n;
  for (int d = 1; d < n; ++d) {
    std::vector<QubitPair> even, odd;
    for (int i = 0; i + d < n; ++i) ((i / d) % 2 == 0 ? even : odd).emplace_back(i, i + d);
    out.layers.push_back(std::move(even));
    if (!odd.empty()) out.layers.push_back(std::move(odd));
  }
  // For even n the lone pair (1, n) joins the second layer {(2,3),(4,5),...}.
  if (n % 2 == 0 && n >= 4) {
    out.layers.pop_back();
    out.layers[1].insert(out.layers[1].begin(), QubitPair{0, n - 1});
  }
  return out;
}

ParamCircuit make_p1_circuit(int n, WMode mode) {
  std::vector<GateLayer> layers;
  append_w_block(layers, n, mode, 0);
  return ParamCircuit(n, std::move(layers), PoolTag::P1, 0, mode, {});
}

ParamCircuit make_p2_circuit(int n, std::vector<QubitPair> pairs, int l, WMode mode) {
  std::vector<GateLayer> layers;
  int slot = append_w_block(layers, n, mode, 0);
  GateLayer entangling;
  for (const auto& [j, k] : pairs) {
    GateSpec g;
    g.kind = GateKind::Q;
    g.targets = {j, k};
    g.slots = {slot, slot + 1, slot + 2};
    slot += 3;
    entangling.push_back(g);
  }
  layers.push_back(std::move(entangling));
  append_w_block(layers, n, mode, slot);
  return ParamCircuit(n, std::move(layers), PoolTag::P2, l, mode, std::move(pairs));
}

CircuitPool build_pool(int n, WMode mode) {
  if (n < 2) throw std::invalid_argument("build_pool: n must be >= 2");
  const PairSchedule sched = pair_schedule(n);
  std::vector<ParamCircuit> p2;
  p2.reserve(sched.size());
  for (std::size_t l = 0; l < sched.size(); ++l) {
    p2.push_back(make_p2_circuit(n, sched.layers[l], static_cast<int>(l) + 1, mode));
  }
  return CircuitPool{make_p1_circuit(n, mode), std::move(p2)};
}

void apply_1q(CVector& state, int n_qubits, int q, const Mat2& u) {
  const Eigen::Index stride = Eigen::Index{1} << (n_qubits - 1 - q);
  const Eigen::Index dim = state.size();
  const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index j = base; j < base + stride; ++j) {
      const cplx a0 = state[j], a1 = state[j + stride];
      state[j] = u00 * a0 + u01 * a1;
      state[j + stride] = u10 * a0 + u11 * a1;
    }
  }
}

void apply_2q(CVector& state, int n_qubits, int q0, int q1, const Mat4& u) {
  const Eigen::Index s0 = Eigen::Index{1} << (n_qubits - 1 - q0);
  const Eigen::Index s1 = Eigen::Index{1} << (n_qubits - 1 - q1);
  const Eigen::Index dim = state.size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((i & s0) || (i & s1)) continue;
    const std::array<Eigen::Index, 4> idx{i, i | s1, i | s0, i | s0 | s1};
    Eigen::Vector4cd in;
    for (int c = 0; c < 4; ++c) in[c] = state[idx[static_cast<std::size_t>(c)]];
    const Eigen::Vector4cd out = u * in;
    for (int r = 0; r < 4; ++r) state[idx[static_cast<std::size_t>(r)]] = out[r];
  }
}

void apply_inplace(const ParamCircuit& c, std::span<const double> params, CVector& state) {
  if (params.size() != c.param_count()) {
    throw DimensionMismatch("apply: expected " + std::to_string(c.param_count()) +
                            " parameters, got " + std::to_string(params.size()));
  }
  if (static_cast<std::size_t>(state.size()) != dim_of(c.n_qubits())) {
    throw DimensionMismatch("apply: state dimension does not match circuit");
  }
  for_each_gate(c, [&](const GateSpec& g) { apply_gate(state, c.n_qubits(), g, params, false); });
}

PureState apply(const ParamCircuit& c, std::span<const double> params, const PureState& input) {
  if (input.n_qubits() != c.n_qubits()) throw DimensionMismatch("apply: qubit count mismatch");
  CVector v = input.amplitudes();
  apply_inplace(c, params, v);
  return PureState(c.n_qubits(), std::move(v));
}

CVector prepare(const ParamCircuit& c, std::span<const double> params) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim_of(c.n_qubits())));
  v[0] = 1.0;
  apply_inplace(c, params, v);
  return v;
}

void circuit_vjp(const ParamCircuit& c, std::span<const double> params, CVector phi, CVector lam,
                 std::span<double> grad) {
  if (grad.size() != c.param_count() || params.size() != c.param_count()) {
    throw DimensionMismatch("circuit_vjp: parameter/gradient length mismatch");
  }
  std::vector<const GateSpec*> gates;
  for_each_gate(c, [&](const GateSpec& g) { gates.push_back(&g); });
  const int n = c.n_qubits();
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    const GateSpec& g = **it;
    apply_gate(phi, n, g, params, true);  // phi now holds the state entering g
    if (g.num_targets() == 1) {
      const double a = slot_value(params, g.slots[0]);
      const Mat2 d = g.kind == GateKind::RZ ? rz_derivative(a) : ry_derivative(a);
      grad[static_cast<std::size_t>(g.slots[0])] = 2.0 * braket_1q(lam, n, g.targets[0], d, phi).real();
    } else if (g.kind == GateKind::Q) {
      const double t1 = slot_value(params, g.slots[0]), t2 = slot_value(params, g.slots[1]),
                   t3 = slot_value(params, g.slots[2]);
      for (int k = 0; k < 3; ++k) {
        const Mat4 d = q_gate_derivative(t1, t2, t3, k);
        grad[static_cast<std::size_t>(g.slots[static_cast<std::size_t>(k)])] =
            2.0 * braket_2q(lam, n, g.targets[0], g.targets[1], d, phi).real();
      }
    }
    apply_gate(lam, n, g, params, true);
  }
}

}  // namespace vqsep

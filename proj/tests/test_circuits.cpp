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

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "test_util.hpp"
#include "vqsep/circuits.hpp"

using namespace vqsep;
using vqsep::testing::phase_free_distance;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

double unitarity_error(const CMatrix& g) {
  return (g.adjoint() * g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

Mat4 swap_gate() {
  Mat4 s = Mat4::Zero();
  s(0, 0) = s(1, 2) = s(2, 1) = s(3, 3) = 1.0;
  return s;
}

Mat2 pauli(char p) {
  Mat2 m;
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

// exp(i (tx XX + ty YY + tz ZZ)) through Eigen's general matrix exponential.
CMatrix exp_canonical(double tx, double ty, double tz) {
  const CMatrix h = tx * vqsep::testing::kron(CMatrix(pauli('X')), CMatrix(pauli('X'))) +
                    ty * vqsep::testing::kron(CMatrix(pauli('Y')), CMatrix(pauli('Y'))) +
                    tz * vqsep::testing::kron(CMatrix(pauli('Z')), CMatrix(pauli('Z')));
  return (kI * h).exp();
}

using LayerSet = std::set<std::pair<int, int>>;

// Colour strings transcribed from the published pair tables. Row i (from 1)
// lists the pairs (i, i+1), ..., (i, n) and marks each 'b' or 'v'; within a
// column (fixed j - i) pairs of equal colour run in parallel. For even n the
// lone (1, n) column joins the 'v' layer of the first column.
std::vector<LayerSet> layers_from_table(int n, const std::vector<std::string>& rows) {
  std::vector<LayerSet> out;
  LayerSet lone;
  for (int d = 1; d < n; ++d) {
    LayerSet blue, violet;
    for (int i = 1; i + d <= n; ++i) {
      const char colour = rows[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(d - 1)];
      (colour == 'b' ? blue : violet).insert({i - 1, i + d - 1});
    }
    if (n % 2 == 0 && n >= 4 && d == n - 1) {
      lone = blue;
      continue;
    }
    out.push_back(blue);
    if (!violet.empty()) out.push_back(violet);
  }
  if (!lone.empty()) out[1].insert(lone.begin(), lone.end());
  return out;
}

std::vector<LayerSet> as_sets(const PairSchedule& s) {
  std::vector<LayerSet> out;
  for (const auto& layer : s.layers) out.emplace_back(layer.begin(), layer.end());
  return out;
}

std::vector<double> random_params(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::vector<double> p(count);
  for (auto& x : p) x = u(rng);
  return p;
}

// Single-qubit purity from the amplitude vector.
double qubit_purity(const CVector& psi, int n, int q) {
  const Eigen::Matrix2cd r = vqsep::testing::single_qubit_marginal(psi, n, q);
  return (r * r).trace().real();
}

}  // namespace

TEST_CASE("rotation conventions") {
  CHECK((rz(0.0) - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((rz(2 * kPi) + Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  Mat2 rz_pi;
  rz_pi << kI, 0, 0, -kI;
  CHECK((rz(kPi) - rz_pi).cwiseAbs().maxCoeff() < 1e-15);

  CHECK((ry(0.0) - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((ry(2 * kPi) + Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::Vector2cd plus = ry(-kPi / 2) * Eigen::Vector2cd(1, 0);
  CHECK(std::abs(plus[0] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(plus[1] - 1 / std::sqrt(2.0)) < 1e-15);

  // Both agree with the exponential of the generator.
  for (double a : {0.3, -1.7, 4.1}) {
    CHECK((rz(a) - Mat2((0.5 * kI * a * pauli('Z')).exp())).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ry(a) - Mat2((0.5 * kI * a * pauli('Y')).exp())).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("Q at the origin is SWAP") {
  CHECK((q_gate(0, 0, 0) - swap_gate()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Q matches its written product") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_params(3, rng);
    const CMatrix id = CMatrix::Identity(2, 2);
    const CMatrix inner = vqsep::testing::kron(CMatrix(rz(t[0])), CMatrix(ry(t[1])));
    const CMatrix last = vqsep::testing::kron(id, CMatrix(ry(t[2])));
    const CMatrix expect = CMatrix(cnot_21()) * inner * CMatrix(cnot_12()) * last * CMatrix(cnot_21());
    CHECK((CMatrix(q_gate(t[0], t[1], t[2])) - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("generated gates are unitary") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_params(3, rng);
    CHECK(unitarity_error(rz(t[0])) <= 1e-12);
    CHECK(unitarity_error(ry(t[1])) <= 1e-12);
    CHECK(unitarity_error(q_gate(t[0], t[1], t[2])) <= 1e-12);
  }
  CHECK(unitarity_error(cnot_12()) == 0.0);
  CHECK(unitarity_error(cnot_21()) == 0.0);
}

TEST_CASE("Q derivatives match central differences") {
  std::mt19937_64 rng(17);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    auto t = random_params(3, rng);
    for (int k = 0; k < 3; ++k) {
      auto up = t, down = t;
      up[static_cast<std::size_t>(k)] += h;
      down[static_cast<std::size_t>(k)] -= h;
      const Mat4 fd = (q_gate(up[0], up[1], up[2]) - q_gate(down[0], down[1], down[2])) / (2 * h);
      CHECK((q_gate_derivative(t[0], t[1], t[2], k) - fd).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("canonical parametrization of the two-qubit interaction") {
  const CanonicalQ zero = q_from_canonical(0, 0, 0);
  CHECK(zero.theta[0] == doctest::Approx(-kPi / 2));
  CHECK(zero.theta[1] == doctest::Approx(kPi / 2));
  CHECK(zero.theta[2] == doctest::Approx(-kPi / 2));
  CHECK(phase_free_distance(CMatrix(zero.wrapped()), CMatrix::Identity(4, 4)) < 1e-10);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const double tx = u(rng), ty = u(rng), tz = u(rng);
    const CanonicalQ c = q_from_canonical(tx, ty, tz);
    CHECK(phase_free_distance(CMatrix(c.wrapped()), exp_canonical(tx, ty, tz)) < 1e-10);
    const Mat4 direct = c.post * q_gate(c.theta[0], c.theta[1], c.theta[2]) * c.pre;
    CHECK(phase_free_distance(CMatrix(direct), CMatrix(c.wrapped())) < 1e-14);
  }

  const Mat4 sym = q_from_canonical(kPi / 4, kPi / 4, kPi / 4).wrapped();
  CHECK((sym * swap_gate() - swap_gate() * sym).cwiseAbs().maxCoeff() < 1e-12);

  // exp(i pi/4 XX)|00> = (|00> + i|11>)/sqrt2, maximally entangled.
  const Mat4 ent = q_from_canonical(kPi / 4, 0, 0).wrapped();
  const CVector out = ent.col(0);
  CHECK(qubit_purity(out, 2, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pair schedule for two qubits") {
  const PairSchedule s = pair_schedule(2);
  REQUIRE(s.size() == 1);
  CHECK(s.layers[0] == std::vector<QubitPair>{{0, 1}});
  CHECK_THROWS(pair_schedule(1));
}

TEST_CASE("pair schedule reproduces the published colour tables") {
  const std::vector<std::pair<int, std::vector<std::string>>> tables = {
      {4, {"bbb", "vb", "b"}},
      {6, {"bbbbb", "vbbb", "bvb", "vv", "b"}},
      {8, {"bbbbbbb", "vbbbbb", "bvbbb", "vvvb", "bbv", "vb", "b"}},
      {9, {"bbbbbbbb", "vbbbbbb", "bvbbbb", "vvvbb", "bbvv", "vbv", "bv", "v"}},
  };
  for (const auto& [n, rows] : tables) {
    CAPTURE(n);
    CHECK(as_sets(pair_schedule(n)) == layers_from_table(n, rows));
  }
  CHECK(pair_schedule(4).size() == 3);
  CHECK(pair_schedule(8).size() == 9);
  CHECK(pair_schedule(9).size() == 12);
}

TEST_CASE("first two layers are the nearest-neighbour brickwork") {
  for (int n = 4; n <= 12; n += 2) {
    const PairSchedule s = pair_schedule(n);
    LayerSet v1, v2{{0, n - 1}};
    for (int i = 0; i + 1 < n; i += 2) v1.insert({i, i + 1});
    for (int j = 1; j + 1 < n - 1; j += 2) v2.insert({j, j + 1});
    CHECK(LayerSet(s.layers[0].begin(), s.layers[0].end()) == v1);
    CHECK(LayerSet(s.layers[1].begin(), s.layers[1].end()) == v2);
  }
}

TEST_CASE("pair schedule covers every pair once with disjoint layers") {
  for (int n = 2; n <= 12; ++n) {
    CAPTURE(n);
    const PairSchedule s = pair_schedule(n);
    std::multiset<std::pair<int, int>> seen;
    for (const auto& layer : s.layers) {
      std::set<int> support;
      for (const auto& [i, j] : layer) {
        CHECK(i < j);
        CHECK(support.insert(i).second);
        CHECK(support.insert(j).second);
        seen.insert({i, j});
      }
    }
    std::multiset<std::pair<int, int>> all;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) all.insert({i, j});
    CHECK(seen == all);
    // Layer counts: 3(n-1)/2 for odd n; 2(n/2-1)+n/2-1 for even n >= 4.
    const std::size_t expected = n == 2 ? 1 : n % 2 ? 3 * (n - 1) / 2 : 2 * (n / 2 - 1) + n / 2 - 1;
    CHECK(s.size() == expected);
    CHECK(schedule_layer_count(n) == static_cast<int>(expected));
  }
}

TEST_CASE("pool shapes and parameter counts") {
  const CircuitPool p3 = build_pool(3, WMode::Full3);
  REQUIRE(p3.p2.size() == 3);
  std::set<std::pair<int, int>> pairs;
  for (const auto& c : p3.p2) {
    CHECK(c.entangling_pairs().size() == 1);
    pairs.insert(c.entangling_pairs()[0]);
  }
  CHECK(pairs == std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {0, 2}});

  CHECK(build_pool(2, WMode::Full3).p2.at(0).param_count() == 15);
  CHECK(build_pool(4, WMode::Reduced2).p1.param_count() == 8);
  CHECK(build_pool(4, WMode::Full3).p1.param_count() == 12);
  CHECK(build_pool(4, WMode::Full3).p2.at(0).param_count() == 30);
  for (int n = 2; n <= 8; ++n) {
    const CircuitPool full = build_pool(n, WMode::Full3), red = build_pool(n, WMode::Reduced2);
    CHECK(full.p1.param_count() == static_cast<std::size_t>(3 * n));
    CHECK(red.p1.param_count() == static_cast<std::size_t>(2 * n));
    CHECK(full.p2.size() == pair_schedule(n).size());
    for (std::size_t l = 0; l < full.p2.size(); ++l) {
      const std::size_t q = full.p2[l].entangling_pairs().size();
      CHECK(full.p2[l].param_count() == 6 * static_cast<std::size_t>(n) + 3 * q);
      CHECK(red.p2[l].param_count() == 4 * static_cast<std::size_t>(n) + 3 * q);
      CHECK(full.p2[l].label() == "P2[l=" + std::to_string(l + 1) + "]");
    }
  }
}

TEST_CASE("circuit structure invariants") {
  const CircuitPool pool = build_pool(6, WMode::Full3);
  for (const ParamCircuit* c : {&pool.p1, &pool.p2[0], &pool.p2[4]}) {
    std::set<int> slots;
    for (const auto& layer : c->layers()) {
      std::set<int> support;
      for (const auto& g : layer) {
        for (int t = 0; t < g.num_targets(); ++t) {
          const int q = g.targets[static_cast<std::size_t>(t)];
          CHECK(q >= 0);
          CHECK(q < 6);
          CHECK(support.insert(q).second);
        }
        for (int s = 0; s < g.num_slots(); ++s) CHECK(slots.insert(g.slots[static_cast<std::size_t>(s)]).second);
      }
    }
    CHECK(slots.size() == c->param_count());
    CHECK(*slots.rbegin() == static_cast<int>(c->param_count()) - 1);
  }
  // Overlapping supports inside one layer are rejected.
  GateSpec a{GateKind::RZ, {0, -1}, {0, -1, -1}}, b{GateKind::RY, {0, -1}, {1, -1, -1}};
  CHECK_THROWS(ParamCircuit(1, {{a, b}}, PoolTag::P1, 0, WMode::Full3, {}));
  // Duplicate slots are rejected.
  GateSpec c{GateKind::RY, {0, -1}, {0, -1, -1}};
  CHECK_THROWS(ParamCircuit(1, {{a}, {c}}, PoolTag::P1, 0, WMode::Full3, {}));
}

TEST_CASE("apply examples") {
  const CircuitPool pool = build_pool(3, WMode::Full3);
  const std::vector<double> zeros(pool.p1.param_count(), 0.0);
  const PureState out = apply(pool.p1, zeros, PureState::zeros(3));
  CHECK(std::abs(std::abs(out[0]) - 1.0) < 1e-15);

  // Q(0,0,0) with identity local layers swaps |01> into |10>.
  const ParamCircuit two = build_pool(2, WMode::Full3).p2.at(0);
  const std::vector<double> id(two.param_count(), 0.0);
  const PureState swapped = apply(two, id, PureState::basis(2, 1));
  CHECK(std::abs(std::abs(swapped[2]) - 1.0) < 1e-14);

  CHECK_THROWS(apply(two, std::vector<double>(3, 0.0), PureState::basis(2, 1)));
  CHECK_THROWS(apply(two, id, PureState::zeros(3)));
}

TEST_CASE("W layer applies Rz(a1), Ry(a2), Rz(a3) in that order") {
  const ParamCircuit w = make_p1_circuit(1, WMode::Full3);
  const std::vector<double> a{0.4, 1.1, -0.7};
  const CVector got = apply(w, a, PureState::basis(1, 1)).amplitudes();
  const Eigen::Vector2cd ref = rz(a[2]) * ry(a[1]) * rz(a[0]) * Eigen::Vector2cd(0, 1);
  CHECK((got - CVector(ref)).cwiseAbs().maxCoeff() < 1e-15);

  const ParamCircuit r = make_p1_circuit(1, WMode::Reduced2);
  const std::vector<double> b{0.9, 2.3};
  const CVector got2 = apply(r, b, PureState::basis(1, 0)).amplitudes();
  const Eigen::Vector2cd ref2 = rz(b[1]) * ry(b[0]) * Eigen::Vector2cd(1, 0);
  CHECK((got2 - CVector(ref2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("apply is norm preserving and linear across both pools") {
  std::mt19937_64 rng(23);
  for (WMode mode : {WMode::Full3, WMode::Reduced2}) {
    const CircuitPool pool = build_pool(5, mode);
    std::vector<const ParamCircuit*> all{&pool.p1};
    for (const auto& c : pool.p2) all.push_back(&c);
    for (const ParamCircuit* c : all) {
      const auto p = random_params(c->param_count(), rng);
      const PureState a = vqsep::testing::random_pure(5, rng), b = vqsep::testing::random_pure(5, rng);
      const PureState ua = apply(*c, p, a), ub = apply(*c, p, b);
      CHECK(std::abs(ua.amplitudes().norm() - 1.0) < 1e-12);
      const cplx alpha{0.6, 0.3}, beta{-0.2, 0.7};
      CVector mix = alpha * a.amplitudes() + beta * b.amplitudes();
      const double scale = mix.norm();
      mix /= scale;
      const CVector lhs = apply(*c, p, PureState(5, mix)).amplitudes() * scale;
      const CVector rhs = alpha * ua.amplitudes() + beta * ub.amplitudes();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("apply agrees with a dense gate-by-gate oracle") {
  std::mt19937_64 rng(41);
  const CircuitPool pool = build_pool(3, WMode::Full3);
  for (const ParamCircuit& c : pool.p2) {
    const auto p = random_params(c.param_count(), rng);
    CMatrix u = CMatrix::Identity(8, 8);
    for (const auto& layer : c.layers()) {
      for (const auto& g : layer) {
        CMatrix gate;
        const auto slot = [&](int k) { return p[static_cast<std::size_t>(g.slots[static_cast<std::size_t>(k)])]; };
        CMatrix local;
        if (g.kind == GateKind::RZ) local = rz(slot(0));
        if (g.kind == GateKind::RY) local = ry(slot(0));
        if (g.kind == GateKind::CNOT) local = cnot_12();
        if (g.kind == GateKind::Q) local = q_gate(slot(0), slot(1), slot(2));
        if (local.rows() == 2) {
          gate = CMatrix::Identity(1, 1);
          for (int q = 0; q < 3; ++q) gate = vqsep::testing::kron(gate, q == g.targets[0] ? local : CMatrix(CMatrix::Identity(2, 2)));
        } else {
          // Embed a two-qubit gate by permuting basis labels.
          gate = CMatrix::Zero(8, 8);
          const int q0 = g.targets[0], q1 = g.targets[1];
          for (int col = 0; col < 8; ++col) {
            const int b0 = (col >> (2 - q0)) & 1, b1 = (col >> (2 - q1)) & 1;
            for (int out = 0; out < 4; ++out) {
              int row = col & ~(1 << (2 - q0)) & ~(1 << (2 - q1));
              row |= ((out >> 1) & 1) << (2 - q0);
              row |= (out & 1) << (2 - q1);
              gate(row, col) = local(out, 2 * b0 + b1);
            }
          }
        }
        u = (gate * u).eval();
      }
    }
    const CVector ref = u.col(0);
    CHECK((prepare(c, p) - ref).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("a switched-off interaction keeps the pair unentangled") {
  std::mt19937_64 rng(61);
  const CircuitPool pool = build_pool(4, WMode::Full3);
  for (const ParamCircuit& c : pool.p2) {
    for (const auto& pair : c.entangling_pairs()) {
      std::vector<double> p(c.param_count(), 0.0);
      // Switch on every other Q so the product structure is non-trivial.
      for (const auto& other : c.entangling_pairs()) {
        if (other == pair) continue;
        const GateSpec* g = c.q_gate_on(other);
        REQUIRE(g != nullptr);
        for (int k = 0; k < 3; ++k) p[static_cast<std::size_t>(g->slots[static_cast<std::size_t>(k)])] = 0.3 + k;
      }
      PureState input = vqsep::testing::random_pure(1, rng);
      for (int q = 1; q < 4; ++q) input = tensor(input, vqsep::testing::random_pure(1, rng));
      const CVector out = apply(c, p, input).amplitudes();
      // The two qubits of the switched-off pair were swapped, nothing more.
      CHECK(qubit_purity(out, 4, pair.first) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(qubit_purity(out, 4, pair.second) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("circuit vector-Jacobian product matches finite differences") {
  std::mt19937_64 rng(73);
  const CircuitPool pool = build_pool(3, WMode::Full3);
  for (const ParamCircuit* c : {&pool.p1, &pool.p2[0], &pool.p2[2]}) {
    const auto p = random_params(c->param_count(), rng);
    const CVector lam = vqsep::testing::random_vector(8, rng);
    const CVector phi = prepare(*c, p);
    std::vector<double> grad(c->param_count());
    circuit_vjp(*c, p, phi, lam, grad);
    const double h = 1e-6;
    for (std::size_t s = 0; s < p.size(); ++s) {
      auto up = p, down = p;
      up[s] += h;
      down[s] -= h;
      const CVector dphi = (prepare(*c, up) - prepare(*c, down)) / (2 * h);
      CHECK(std::abs(grad[s] - 2.0 * lam.dot(dphi).real()) < 1e-7);
    }
  }
}

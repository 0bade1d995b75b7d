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

#include "vqsep/statelib.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vqsep {

PureState ghz(int n) {
  if (n < 2) throw std::invalid_argument("ghz: n must be >= 2");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim_of(n)));
  v[0] = v[v.size() - 1] = 1.0 / std::sqrt(2.0);
  return PureState(n, std::move(v));
}

PureState bell_chain(int pairs) {
  if (pairs < 1) throw std::invalid_argument("bell_chain: pairs must be >= 1");
  CVector bell = CVector::Zero(4);
  bell[1] = bell[2] = 1.0 / std::sqrt(2.0);
  const PureState b(2, bell);
  PureState out = b;
  for (int i = 1; i < pairs; ++i) out = tensor(out, b);
  return out;
}

DensityMatrix depolarize_global(const PureState& psi, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("depolarize_global: q outside [0,1]");
  const auto d = static_cast<Eigen::Index>(psi.dim());
  const CVector& v = psi.amplitudes();
  CMatrix rho = (1.0 - q) * (v * v.adjoint());
  rho.diagonal().array() += q / static_cast<double>(d);
  return DensityMatrix(psi.n_qubits(), std::move(rho));
}

DensityMatrix rho3(double q) { return depolarize_global(ghz(3), q); }

DensityMatrix rho4(double q) {
  const DensityMatrix base = rho3(q);
  const CMatrix& r3 = base.matrix();
  CMatrix out = CMatrix::Zero(16, 16);
  // Appending |0> as the least significant qubit keeps only even indices.
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j) out(2 * i, 2 * j) = r3(i, j);
  return DensityMatrix(4, std::move(out));
}

double oracle_infidelity(double q, int m) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("oracle_infidelity: q outside [0,1]");
  if (m < 1) throw std::invalid_argument("oracle_infidelity: m must be >= 1");
  constexpr double dim = 1024.0;
  const double a = (1.0 - q) + q / dim;
  const double b = q / dim;
  // Divide through by a^m so large m cannot underflow both terms, and use
  // x / (1 + x) rather than 1 - 1 / (1 + x) to avoid cancellation.
  const double x = (dim - 1.0) * std::pow(b / a, m);
  return x / (1.0 + x);
}

PureState random_product_state(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_product_state: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::optional<PureState> out;
  for (int i = 0; i < n; ++i) {
    CVector v(2);
    double re0 = gauss(rng), im0 = gauss(rng), re1 = gauss(rng), im1 = gauss(rng);
    v << cplx{re0, im0}, cplx{re1, im1};
    v /= v.norm();
    PureState single(1, std::move(v));
    out = out ? tensor(*out, single) : single;
  }
  return *out;
}

std::string to_string(StateFamily f) {
  switch (f) {
    case StateFamily::GHZ: return "GHZ";
    case StateFamily::BellChain: return "BELL_CHAIN";
    case StateFamily::ProductRandom: return "PRODUCT_RANDOM";
    case StateFamily::Custom: return "CUSTOM";
  }
  return "?";
}

StateFamily state_family_from_string(const std::string& s) {
  if (s == "GHZ") return StateFamily::GHZ;
  if (s == "BELL_CHAIN") return StateFamily::BellChain;
  if (s == "PRODUCT_RANDOM") return StateFamily::ProductRandom;
  if (s == "CUSTOM") return StateFamily::Custom;
  throw std::invalid_argument("unknown state family '" + s + "'");
}

void NamedStateSpec::validate() const {
  if (q && !(*q >= 0.0 && *q <= 1.0)) throw std::invalid_argument("state spec: q outside [0,1]");
  switch (family) {
    case StateFamily::GHZ:
      if (n_qubits < 2) throw std::invalid_argument("state spec: GHZ needs n_qubits >= 2");
      break;
    case StateFamily::BellChain:
      if (n_qubits < 2 || n_qubits % 2 != 0) {
        throw std::invalid_argument("state spec: BELL_CHAIN needs an even n_qubits >= 2");
      }
      break;
    case StateFamily::ProductRandom:
      if (n_qubits < 1) throw std::invalid_argument("state spec: PRODUCT_RANDOM needs n_qubits >= 1");
      break;
    case StateFamily::Custom:
      break;
  }
  if (n_qubits > kDefaultQubitCap) throw CapacityError("state spec: n_qubits exceeds the qubit cap");
}

PureState named_pure_state(const NamedStateSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case StateFamily::GHZ: return ghz(spec.n_qubits);
    case StateFamily::BellChain: return bell_chain(spec.n_qubits / 2);
    case StateFamily::ProductRandom: return random_product_state(spec.n_qubits, spec.seed);
    case StateFamily::Custom: break;
  }
  throw std::invalid_argument("named_pure_state: CUSTOM specs carry explicit state data");
}

}  // namespace vqsep

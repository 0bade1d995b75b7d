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
#include <optional>
#include <string>

#include "vqsep/qcore.hpp"

namespace vqsep {

/// (|0...0> + |1...1>) / sqrt(2).
PureState ghz(int n);

/// (|01> + |10>)/sqrt(2) repeated `pairs` times; qubits (2i, 2i+1) form a pair.
PureState bell_chain(int pairs);

/// (1 - q)|psi><psi| + q I / 2^n.
DensityMatrix depolarize_global(const PureState& psi, double q);

/// Depolarized three-qubit GHZ state.
DensityMatrix rho3(double q);
/// rho3(q) (x) |0><0|.
DensityMatrix rho4(double q);

/// |1 - <B|rho_g^m|B> / tr rho_g^m| for rho_g(q) = depolarized |Bell>^(x)5 on
/// ten qubits, from the two distinct eigenvalues of rho_g.
double oracle_infidelity(double q, int m);

/// Tensor product of n seeded Haar-random single-qubit states.
PureState random_product_state(int n, std::uint64_t seed);

/// Named state families understood by the state generator.
enum class StateFamily { GHZ, BellChain, ProductRandom, Custom };

struct NamedStateSpec {
  StateFamily family = StateFamily::GHZ;
  int n_qubits = 0;
  std::optional<double> q;
  std::uint64_t seed = 0;

  void validate() const;
};

std::string to_string(StateFamily f);
StateFamily state_family_from_string(const std::string& s);

/// Builds the pure state named by `spec` (noise not applied). Custom specs
/// carry their own data and are resolved by the caller.
PureState named_pure_state(const NamedStateSpec& spec);

}  // namespace vqsep

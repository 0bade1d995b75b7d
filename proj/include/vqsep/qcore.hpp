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

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

/// Dense state-vector and density-matrix algebra for small multiqubit
/// registers.
///
/// Qubit convention: qubit 0 is the most significant bit of the amplitude
/// index, so |q0 q1 ... q(n-1)> has index sum_i q_i 2^(n-1-i). User-facing
/// output (reports, CLI text) numbers qubits from 1 in the same order.
namespace vqsep {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr int kDefaultQubitCap = 14;

inline constexpr double kNormTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;

/// Raised when a register would exceed the configured qubit cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Raised when operands have incompatible dimensions.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for qubit indices outside [0, n).
class QubitIndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

inline std::size_t dim_of(int n_qubits) { return std::size_t{1} << n_qubits; }

/// Unit-norm amplitude vector over n qubits.
class PureState {
 public:
  PureState(int n_qubits, CVector amplitudes, int qubit_cap = kDefaultQubitCap);

  /// Computational basis state |index>.
  static PureState basis(int n_qubits, std::uint64_t index);
  static PureState zeros(int n_qubits) { return basis(n_qubits, 0); }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  cplx operator[](std::size_t i) const { return amplitudes_[static_cast<Eigen::Index>(i)]; }

 private:
  int n_qubits_;
  CVector amplitudes_;
};

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, CMatrix matrix, int qubit_cap = kDefaultQubitCap);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const CMatrix& matrix() const { return matrix_; }

 private:
  int n_qubits_;
  CMatrix matrix_;
};

/// Convex mixture of pure states with simplex weights.
class Ensemble {
 public:
  Ensemble(std::vector<double> weights, std::vector<PureState> members);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<PureState>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  int n_qubits() const { return members_.front().n_qubits(); }

 private:
  std::vector<double> weights_;
  std::vector<PureState> members_;
};

struct ShotEstimate {
  double estimate = 0.0;
  std::int64_t shots = 0;
  std::uint64_t seed = 0;
};

struct PowerOverlap {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio() const { return numerator / denominator; }
};

/// Kronecker product; `a` supplies the most significant qubits.
PureState tensor(const PureState& a, const PureState& b, int qubit_cap = kDefaultQubitCap);

DensityMatrix to_density(const Ensemble& e);

/// Partial trace over every qubit not listed in `keep`. The kept qubits
/// retain their relative order (lowest index most significant).
DensityMatrix reduced_density(const PureState& s, std::span<const int> keep);
DensityMatrix reduced_density(const DensityMatrix& s, std::span<const int> keep);

double purity(const DensityMatrix& rho);
double fidelity_pure(const PureState& a, const PureState& b);
double hs_distance_sq(const DensityMatrix& rho, const DensityMatrix& sigma);

/// rho^m for Hermitian rho. Squaring for m <= 8, Hermitian
/// eigendecomposition above that.
CMatrix hermitian_power(const CMatrix& rho, int m);
CMatrix hermitian_power_eig(const CMatrix& rho, int m);

/// (<phi|rho^m|phi>, tr rho^m).
PowerOverlap power_overlap(const DensityMatrix& rho, int m, const PureState& phi);

/// Mean of `shots` seeded Bernoulli(p) draws.
ShotEstimate bernoulli_estimate(double p, std::int64_t shots, std::uint64_t seed);

// Raw kernels shared with the optimizer hot paths.
CMatrix partial_trace_pure(const CVector& psi, int n_qubits, std::span<const int> keep);
double purity(const CMatrix& rho);

}  // namespace vqsep

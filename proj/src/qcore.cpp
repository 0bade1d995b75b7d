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

#include "vqsep/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace vqsep {
namespace {

void check_qubits(int n_qubits, int qubit_cap) {
  if (n_qubits < 1) {
    throw std::invalid_argument("n_qubits must be positive, got " + std::to_string(n_qubits));
  }
  if (n_qubits > qubit_cap) {
    throw CapacityError("register of " + std::to_string(n_qubits) +
                        " qubits exceeds the cap of " + std::to_string(qubit_cap));
  }
}

std::vector<int> validated_keep(std::span<const int> keep, int n_qubits) {
  if (keep.empty()) throw std::invalid_argument("reduced_density: keep set is empty");
  std::vector<int> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  for (int q : sorted) {
    if (q < 0 || q >= n_qubits) {
      throw QubitIndexError("qubit index " + std::to_string(q) + " out of range for " +
                            std::to_string(n_qubits) + " qubits");
    }
  }
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("reduced_density: duplicate qubit index");
  }
  return sorted;
}

// Splits a full basis index into (kept, traced) sub-indices. Both keep the
// global bit order.
struct IndexSplit {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> traced;
};

IndexSplit split_indices(int n_qubits, const std::vector<int>& keep) {
  const std::size_t dim = dim_of(n_qubits);
  std::vector<bool> is_kept(static_cast<std::size_t>(n_qubits), false);
  for (int q : keep) is_kept[static_cast<std::size_t>(q)] = true;

  IndexSplit out{std::vector<std::size_t>(dim), std::vector<std::size_t>(dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t a = 0, t = 0;
    for (int q = 0; q < n_qubits; ++q) {
      const std::size_t bit = (i >> (n_qubits - 1 - q)) & 1U;
      if (is_kept[static_cast<std::size_t>(q)]) {
        a = (a << 1) | bit;
      } else {
        t = (t << 1) | bit;
      }
    }
    out.kept[i] = a;
    out.traced[i] = t;
  }
  return out;
}

}  // namespace

PureState::PureState(int n_qubits, CVector amplitudes, int qubit_cap)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_qubits(n_qubits, qubit_cap);
  if (static_cast<std::size_t>(amplitudes_.size()) != dim_of(n_qubits)) {
    throw DimensionMismatch("PureState: expected " + std::to_string(dim_of(n_qubits)) +
                            " amplitudes, got " + std::to_string(amplitudes_.size()));
  }
  const double norm_sq = amplitudes_.squaredNorm();
  if (!std::isfinite(norm_sq) || std::abs(norm_sq - 1.0) > kNormTol) {
    throw std::invalid_argument("PureState: squared norm " + std::to_string(norm_sq) +
                                " is not 1");
  }
}

PureState PureState::basis(int n_qubits, std::uint64_t index) {
  check_qubits(n_qubits, kDefaultQubitCap);
  if (index >= dim_of(n_qubits)) throw QubitIndexError("basis index out of range");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim_of(n_qubits)));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return PureState(n_qubits, std::move(v));
}

DensityMatrix::DensityMatrix(int n_qubits, CMatrix matrix, int qubit_cap)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
  check_qubits(n_qubits, qubit_cap);
  const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw DimensionMismatch("DensityMatrix: expected " + std::to_string(d) + "x" +
                            std::to_string(d) + " matrix");
  }
  if (!matrix_.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (deviation " +
                                std::to_string(herm) + ")");
  }
  const cplx tr = matrix_.trace();
  if (std::abs(tr - cplx{1.0, 0.0}) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr.real()) + " is not 1");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const CVector& v = psi.amplitudes();
  return DensityMatrix(psi.n_qubits(), v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  check_qubits(n_qubits, kDefaultQubitCap);
  const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
  return DensityMatrix(n_qubits, CMatrix::Identity(d, d) / static_cast<double>(d));
}

Ensemble::Ensemble(std::vector<double> weights, std::vector<PureState> members)
    : weights_(std::move(weights)), members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("Ensemble: no members");
  if (weights_.size() != members_.size()) {
    throw DimensionMismatch("Ensemble: weight count does not match member count");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("Ensemble: negative or NaN weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    throw std::invalid_argument("Ensemble: weights sum to " + std::to_string(total));
  }
  const int n = members_.front().n_qubits();
  for (const auto& m : members_) {
    if (m.n_qubits() != n) throw DimensionMismatch("Ensemble: members differ in qubit count");
  }
}

PureState tensor(const PureState& a, const PureState& b, int qubit_cap) {
  const int n = a.n_qubits() + b.n_qubits();
  if (n > qubit_cap) {
    throw CapacityError("tensor: " + std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(qubit_cap));
  }
  const auto db = static_cast<Eigen::Index>(b.dim());
  CVector out(static_cast<Eigen::Index>(a.dim()) * db);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(a.dim()); ++i) {
    out.segment(i * db, db) = a.amplitudes()[i] * b.amplitudes();
  }
  return PureState(n, std::move(out), qubit_cap);
}

DensityMatrix to_density(const Ensemble& e) {
  const auto d = static_cast<Eigen::Index>(e.members().front().dim());
  CMatrix rho = CMatrix::Zero(d, d);
  for (std::size_t m = 0; m < e.size(); ++m) {
    const CVector& v = e.members()[m].amplitudes();
    rho.noalias() += e.weights()[m] * (v * v.adjoint());
  }
  return DensityMatrix(e.n_qubits(), std::move(rho));
}

CMatrix partial_trace_pure(const CVector& psi, int n_qubits, std::span<const int> keep_in) {
  const auto keep = validated_keep(keep_in, n_qubits);
  const auto split = split_indices(n_qubits, keep);
  const auto dk = static_cast<Eigen::Index>(dim_of(static_cast<int>(keep.size())));
  const auto dt = static_cast<Eigen::Index>(dim_of(n_qubits) / static_cast<std::size_t>(dk));
  CMatrix reshaped(dk, dt);
  for (std::size_t i = 0; i < split.kept.size(); ++i) {
    reshaped(static_cast<Eigen::Index>(split.kept[i]), static_cast<Eigen::Index>(split.traced[i])) =
        psi[static_cast<Eigen::Index>(i)];
  }
  return reshaped * reshaped.adjoint();
}

DensityMatrix reduced_density(const PureState& s, std::span<const int> keep) {
  CMatrix rho = partial_trace_pure(s.amplitudes(), s.n_qubits(), keep);
  return DensityMatrix(static_cast<int>(keep.size()), std::move(rho));
}

DensityMatrix reduced_density(const DensityMatrix& s, std::span<const int> keep_in) {
  const int n = s.n_qubits();
  const auto keep = validated_keep(keep_in, n);
  const auto split = split_indices(n, keep);
  const auto dk = static_cast<Eigen::Index>(dim_of(static_cast<int>(keep.size())));
  CMatrix out = CMatrix::Zero(dk, dk);
  const std::size_t d = s.dim();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (split.traced[i] != split.traced[j]) continue;
      out(static_cast<Eigen::Index>(split.kept[i]), static_cast<Eigen::Index>(split.kept[j])) +=
          s.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return DensityMatrix(static_cast<int>(keep.size()), std::move(out));
}

double purity(const CMatrix& rho) {
  // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return rho.squaredNorm();
}

double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

double fidelity_pure(const PureState& a, const PureState& b) {
  if (a.n_qubits() != b.n_qubits()) throw DimensionMismatch("fidelity_pure: qubit counts differ");
  return std::min(1.0, std::norm(a.amplitudes().dot(b.amplitudes())));
}

double hs_distance_sq(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("hs_distance_sq: dimensions differ");
  return (rho.matrix() - sigma.matrix()).squaredNorm();
}

CMatrix hermitian_power_eig(const CMatrix& rho, int m) {
  if (m < 1) throw std::invalid_argument("matrix power requires m >= 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  const Eigen::VectorXd lam = es.eigenvalues().array().pow(static_cast<double>(m));
  const CMatrix& v = es.eigenvectors();
  return v * lam.asDiagonal() * v.adjoint();
}

CMatrix hermitian_power(const CMatrix& rho, int m) {
  if (m < 1) throw std::invalid_argument("matrix power requires m >= 1");
  if (m > 8) return hermitian_power_eig(rho, m);
  CMatrix result;
  CMatrix base = rho;
  bool have = false;
  for (int e = m;;) {
    if (e & 1) {
      if (have) {
        result = result * base;
      } else {
        result = base;
        have = true;
      }
    }
    e >>= 1;
    if (e == 0) break;
    base = base * base;
  }
  // Restore exact Hermiticity lost to rounding.
  return (result + result.adjoint()) * 0.5;
}

PowerOverlap power_overlap(const DensityMatrix& rho, int m, const PureState& phi) {
  if (m < 1) throw std::invalid_argument("power_overlap: m must be >= 1");
  if (rho.dim() != phi.dim()) throw DimensionMismatch("power_overlap: dimensions differ");
  if (m == 1) {
    const CVector& v = phi.amplitudes();
    return {std::max(0.0, v.dot(rho.matrix() * v).real()), rho.matrix().trace().real()};
  }
  const CMatrix p = hermitian_power(rho.matrix(), m);
  const CVector& v = phi.amplitudes();
  return {std::max(0.0, v.dot(p * v).real()), p.trace().real()};
}

ShotEstimate bernoulli_estimate(double p, std::int64_t shots, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli_estimate: p outside [0,1]");
  if (shots < 1) throw std::invalid_argument("bernoulli_estimate: shots must be positive");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution draw(p);
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < shots; ++s) hits += draw(rng) ? 1 : 0;
  return {static_cast<double>(hits) / static_cast<double>(shots), shots, seed};
}

}  // namespace vqsep

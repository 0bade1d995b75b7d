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

#include "vqsep/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vqsep {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Floor on |overlap| when dividing by it in the sqrt-cost gradients.
constexpr double kOverlapFloor = 1e-12;

void check_arity(const Objective& obj, std::span<const double> params) {
  if (params.size() != obj.arity()) {
    throw DimensionMismatch(obj.tag() + ": expected " + std::to_string(obj.arity()) +
                            " parameters, got " + std::to_string(params.size()));
  }
}

std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 0x5eedU};
  return std::mt19937_64(seq);
}

struct RestartOutcome {
  std::vector<double> best_params;
  double best_cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool aborted = false;
};

RestartOutcome run_adam(const Objective& obj, const OptimizerConfig& cfg, std::vector<double> x,
                        int restart, const TraceSink& trace) {
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  const std::size_t n = x.size();
  std::vector<double> g(n), m(n, 0.0), v(n, 0.0);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.max_iterations));
  RestartOutcome out;
  double b1t = 1.0, b2t = 1.0;

  for (int t = 1; t <= cfg.max_iterations; ++t) {
    double cost;
    try {
      cost = obj.value_and_gradient(x, g);
    } catch (const NonFiniteCost&) {
      out.aborted = true;
      return out;
    }
    if (!std::isfinite(cost)) {
      out.aborted = true;
      return out;
    }
    out.iterations = t;
    if (trace) trace({0, restart, t - 1, cost});
    if (cost < out.best_cost) {
      out.best_cost = cost;
      out.best_params = x;
    }
    if (cost < cfg.threshold) break;
    history.push_back(cost);
    const auto w = static_cast<std::size_t>(cfg.stall_window);
    if (history.size() > w && std::abs(history.back() - history[history.size() - 1 - w]) < cfg.tolerance) {
      break;
    }
    if (t == cfg.max_iterations) break;

    b1t *= beta1;
    b2t *= beta2;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1 * m[i] + (1 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1 - beta2) * g[i] * g[i];
      const double mhat = m[i] / (1 - b1t);
      const double vhat = v[i] / (1 - b2t);
      x[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + adam_eps);
    }
  }
  return out;
}

}  // namespace

Objective::Objective(std::size_t arity, std::string tag, CostFn cost, ValueGradFn value_grad)
    : arity_(arity), tag_(std::move(tag)), cost_(std::move(cost)), value_grad_(std::move(value_grad)) {
  if (!cost_) throw std::invalid_argument("Objective: missing cost function");
}

double Objective::evaluate(std::span<const double> params) const {
  check_arity(*this, params);
  return cost_(params);
}

double Objective::value_and_gradient(std::span<const double> params, std::span<double> grad) const {
  check_arity(*this, params);
  if (grad.size() != arity_) throw DimensionMismatch(tag_ + ": gradient buffer has wrong length");
  if (value_grad_) return value_grad_(params, grad);
  const auto g = gradient(*this, params);
  std::copy(g.begin(), g.end(), grad.begin());
  return cost_(params);
}

std::vector<double> gradient(const Objective& obj, std::span<const double> params, double step) {
  check_arity(obj, params);
  std::vector<double> x(params.begin(), params.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = obj.evaluate(x);
    x[i] = orig - step;
    const double down = obj.evaluate(x);
    x[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NonFiniteCost(obj.tag() + ": non-finite cost during finite differencing");
    }
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

void OptimizerConfig::validate() const {
  if (max_iterations < 1 || restarts < 1 || stall_window < 1) {
    throw std::invalid_argument("OptimizerConfig: iteration, restart and window counts must be positive");
  }
  if (!(learning_rate > 0) || !(tolerance > 0)) {
    throw std::invalid_argument("OptimizerConfig: learning rate and tolerance must be positive");
  }
  if (!(threshold > 0 && threshold < 1)) {
    throw std::invalid_argument("OptimizerConfig: threshold must lie in (0, 1)");
  }
}

std::vector<double> uniform_angles(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, kTwoPi);
  std::vector<double> x(count);
  for (auto& xi : x) xi = dist(rng);
  return x;
}

OptResult minimize(const Objective& obj, const OptimizerConfig& cfg, const Initializer& init,
                   const TraceSink& trace) {
  cfg.validate();
  OptResult result;
  result.best_cost = std::numeric_limits<double>::infinity();
  bool any_finished = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    auto rng = restart_rng(cfg.seed, r);
    std::vector<double> x0 = init ? init(r, rng) : uniform_angles(obj.arity(), rng);
    if (x0.size() != obj.arity()) throw DimensionMismatch("minimize: initializer returned wrong length");
    RestartOutcome o = run_adam(obj, cfg, std::move(x0), r, trace);
    if (o.aborted && o.best_params.empty()) {
      result.restart_costs.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    result.restart_costs.push_back(o.best_cost);
    any_finished = true;
    if (o.best_cost < result.best_cost) {
      result.best_cost = o.best_cost;
      result.best_params = std::move(o.best_params);
      result.iterations_used = o.iterations;
      result.restart_index = r;
    }
    if (cfg.stop_on_success && result.best_cost < cfg.threshold) break;
  }
  if (!any_finished) throw NonFiniteCost(obj.tag() + ": every restart hit a non-finite cost");
  result.converged_below_threshold = result.best_cost < cfg.threshold;
  return result;
}

std::vector<double> simplex_map(std::span<const double> raw) {
  if (raw.empty()) throw std::invalid_argument("simplex_map: empty input");
  const double mx = *std::max_element(raw.begin(), raw.end());
  std::vector<double> q(raw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    q[i] = std::exp(raw[i] - mx);
    total += q[i];
  }
  for (auto& qi : q) qi /= total;
  return q;
}

Objective vqsr_objective(const PureState& target, const ParamCircuit& c) {
  if (target.n_qubits() != c.n_qubits()) throw DimensionMismatch("vqsr_objective: qubit count mismatch");
  auto psi = std::make_shared<const CVector>(target.amplitudes());
  auto cost = [psi, c](std::span<const double> p) {
    const CVector phi = prepare(c, p);
    return std::max(0.0, 1.0 - std::abs(psi->dot(phi)));
  };
  auto value_grad = [psi, c](std::span<const double> p, std::span<double> grad) {
    const CVector phi = prepare(c, p);
    const cplx ov = psi->dot(phi);
    const double mag = std::abs(ov);
    // d|ov|^2 = 2 Re <psi ov | d phi>, and d(1 - |ov|) = -d|ov|^2 / (2|ov|).
    CVector lam = (*psi) * ov;
    circuit_vjp(c, p, phi, std::move(lam), grad);
    const double scale = -0.5 / std::max(mag, kOverlapFloor);
    for (auto& gi : grad) gi *= scale;
    return std::max(0.0, 1.0 - mag);
  };
  return Objective(c.param_count(), "vqsr:" + c.label(), cost, value_grad);
}

NoisyTarget make_noisy_target(const DensityMatrix& rho, int m) {
  if (m < 1) throw std::invalid_argument("noisy objective: m must be >= 1");
  CMatrix p = hermitian_power(rho.matrix(), m);
  const double den = p.trace().real();
  if (!(den > 0)) throw NonFiniteCost("noisy objective: tr(rho^m) is not positive");
  p /= den;
  return NoisyTarget{std::make_shared<const CMatrix>(std::move(p)), m, den};
}

Objective vqsr_noisy_objective(const NoisyTarget& target, const ParamCircuit& c) {
  if (static_cast<std::size_t>(target.normalized_power->rows()) != dim_of(c.n_qubits())) {
    throw DimensionMismatch("vqsr_noisy_objective: dimension mismatch");
  }
  auto power = target.normalized_power;
  auto cost = [power, c](std::span<const double> p) {
    const CVector phi = prepare(c, p);
    const double f = std::max(0.0, phi.dot((*power) * phi).real());
    return 1.0 - std::sqrt(f);
  };
  auto value_grad = [power, c](std::span<const double> p, std::span<double> grad) {
    const CVector phi = prepare(c, p);
    CVector lam = (*power) * phi;
    const double f = std::max(0.0, phi.dot(lam).real());
    circuit_vjp(c, p, phi, std::move(lam), grad);
    const double scale = -0.5 / std::max(std::sqrt(f), kOverlapFloor);
    for (auto& gi : grad) gi *= scale;
    return 1.0 - std::sqrt(f);
  };
  return Objective(c.param_count(), "vqsr_noisy[m=" + std::to_string(target.m) + "]:" + c.label(),
                   cost, value_grad);
}

Objective vqsr_noisy_objective(const DensityMatrix& rho, int m, const ParamCircuit& c) {
  if (rho.n_qubits() != c.n_qubits()) throw DimensionMismatch("vqsr_noisy_objective: qubit count mismatch");
  return vqsr_noisy_objective(make_noisy_target(rho, m), c);
}

EnsembleLayout ensemble_layout(const std::vector<ParamCircuit>& members) {
  EnsembleLayout layout;
  std::size_t offset = 0;
  for (const auto& c : members) {
    layout.offsets.push_back(offset);
    offset += c.param_count();
  }
  layout.weights_offset = offset;
  layout.arity = offset + members.size();
  return layout;
}

namespace {

struct EnsembleData {
  CMatrix rho;
  double rho_purity = 0.0;
  std::vector<ParamCircuit> members;
  EnsembleLayout layout;
};

struct EnsembleState {
  std::vector<CVector> phis;
  std::vector<double> q;
  CMatrix gram;               // <phi_i|phi_j>
  std::vector<CVector> rho_phi;
  std::vector<double> rho_exp;  // <phi_m|rho|phi_m>
  double cost = 0.0;
};

EnsembleState evaluate_ensemble(const EnsembleData& d, std::span<const double> p) {
  const std::size_t mcount = d.members.size();
  EnsembleState s;
  s.phis.reserve(mcount);
  for (std::size_t i = 0; i < mcount; ++i) {
    s.phis.push_back(prepare(d.members[i], p.subspan(d.layout.offsets[i], d.members[i].param_count())));
  }
  s.q = simplex_map(p.subspan(d.layout.weights_offset, mcount));
  const auto mi = static_cast<Eigen::Index>(mcount);
  s.gram.resize(mi, mi);
  double tr_sigma2 = 0.0, tr_sigma_rho = 0.0;
  for (std::size_t i = 0; i < mcount; ++i) {
    for (std::size_t j = 0; j < mcount; ++j) {
      const cplx g = i == j ? cplx{s.phis[i].squaredNorm(), 0.0} : s.phis[i].dot(s.phis[j]);
      s.gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g;
      tr_sigma2 += s.q[i] * s.q[j] * std::norm(g);
    }
    s.rho_phi.push_back(d.rho * s.phis[i]);
    s.rho_exp.push_back(s.phis[i].dot(s.rho_phi.back()).real());
    tr_sigma_rho += s.q[i] * s.rho_exp.back();
  }
  s.cost = std::max(0.0, tr_sigma2 - 2.0 * tr_sigma_rho + d.rho_purity);
  return s;
}

}  // namespace

Objective ensemble_objective(const DensityMatrix& target, std::vector<ParamCircuit> members) {
  if (members.empty()) throw std::invalid_argument("ensemble_objective: empty member list");
  for (const auto& c : members) {
    if (c.n_qubits() != target.n_qubits()) {
      throw DimensionMismatch("ensemble_objective: member circuit qubit count mismatch");
    }
  }
  auto data = std::make_shared<EnsembleData>();
  data->rho = target.matrix();
  data->rho_purity = purity(target.matrix());
  data->layout = ensemble_layout(members);
  data->members = std::move(members);
  const std::size_t arity = data->layout.arity;
  const std::string tag = "ensemble[M=" + std::to_string(data->members.size()) + "]";
  std::shared_ptr<const EnsembleData> cdata = data;

  auto cost = [cdata](std::span<const double> p) { return evaluate_ensemble(*cdata, p).cost; };
  auto value_grad = [cdata](std::span<const double> p, std::span<double> grad) {
    const EnsembleData& d = *cdata;
    const EnsembleState s = evaluate_ensemble(d, p);
    const std::size_t mcount = d.members.size();
    // g_m = d cost / d q_m = 2 <phi_m| (sigma - rho) |phi_m>.
    std::vector<double> g(mcount);
    double gbar = 0.0;
    for (std::size_t m = 0; m < mcount; ++m) {
      CVector lam = -s.rho_phi[m];
      for (std::size_t j = 0; j < mcount; ++j) {
        lam += s.q[j] * s.gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) * s.phis[j];
      }
      g[m] = 2.0 * s.phis[m].dot(lam).real();
      gbar += s.q[m] * g[m];
      const std::size_t np = d.members[m].param_count();
      auto gm = grad.subspan(d.layout.offsets[m], np);
      circuit_vjp(d.members[m], p.subspan(d.layout.offsets[m], np), s.phis[m], std::move(lam), gm);
      for (auto& gi : gm) gi *= 2.0 * s.q[m];
    }
    for (std::size_t m = 0; m < mcount; ++m) {
      grad[d.layout.weights_offset + m] = s.q[m] * (g[m] - gbar);
    }
    return s.cost;
  };
  return Objective(arity, tag, cost, value_grad);
}

Ensemble decode_ensemble(const std::vector<ParamCircuit>& members, std::span<const double> params) {
  const EnsembleLayout layout = ensemble_layout(members);
  if (params.size() != layout.arity) throw DimensionMismatch("decode_ensemble: parameter length mismatch");
  std::vector<PureState> states;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& c = members[i];
    states.push_back(apply(c, params.subspan(layout.offsets[i], c.param_count()), PureState::zeros(c.n_qubits())));
  }
  std::vector<double> q = simplex_map(params.subspan(layout.weights_offset, members.size()));
  return Ensemble(std::move(q), std::move(states));
}

}  // namespace vqsep

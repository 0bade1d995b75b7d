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

#include "vqsep/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <zlib.h>

namespace vqsep::io {
namespace {

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError("state data: expected [re, im] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing key '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
}

json pair_to_json(const QubitPair& p) { return json::array({p.first + 1, p.second + 1}); }

json partition_to_json(const Partition& p) {
  json out = json::array();
  for (const auto& block : p) {
    json b = json::array();
    for (int q : block) b.push_back(q + 1);
    out.push_back(std::move(b));
  }
  return out;
}

json purities_to_json(const std::vector<PairPurity>& ps) {
  json out = json::array();
  for (const auto& p : ps) {
    json e = {{"pair", pair_to_json(p.pair)}, {"purity", p.purity}, {"edge", p.edge}};
    if (p.target_purity) e["target_purity"] = *p.target_purity;
    out.push_back(std::move(e));
  }
  return out;
}

// Deviations this small are summation round-off, not real denormalization;
// leaving them alone keeps round trips bit-exact.
double roundoff_scale(Eigen::Index dim) {
  return 4.0 * static_cast<double>(dim) * std::numeric_limits<double>::epsilon();
}

bool is_gzip(const std::string& bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

}  // namespace

json state_to_json(const PureState& s) {
  json data = json::array();
  for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) data.push_back(complex_to_json(s.amplitudes()[i]));
  return {{"kind", "pure"}, {"n_qubits", s.n_qubits()}, {"data", std::move(data)}};
}

json state_to_json(const DensityMatrix& s) {
  json rows = json::array();
  const CMatrix& m = s.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return {{"kind", "density"}, {"n_qubits", s.n_qubits()}, {"data", std::move(rows)}};
}

json state_to_json(const AnyState& s) {
  return std::visit([](const auto& x) { return state_to_json(x); }, s);
}

AnyState state_from_json(const json& doc) {
  reject_unknown(doc, {"kind", "n_qubits", "data"}, "state file");
  const auto kind = required<std::string>(doc, "kind");
  const int n = required<int>(doc, "n_qubits");
  if (n < 1 || n > kDefaultQubitCap) throw InputError("state file: n_qubits out of range");
  const json& data = doc.at("data");
  if (!data.is_array()) throw InputError("state file: 'data' must be an array");
  const auto d = static_cast<Eigen::Index>(dim_of(n));

  if (kind == "pure") {
    if (static_cast<Eigen::Index>(data.size()) != d) throw InputError("state file: wrong amplitude count");
    CVector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = complex_from_json(data[static_cast<std::size_t>(i)]);
    const double norm_sq = v.squaredNorm();
    if (!std::isfinite(norm_sq) || std::abs(norm_sq - 1.0) > kLoadTolerance) {
      throw InputError("state file: amplitudes are not normalized");
    }
    if (std::abs(norm_sq - 1.0) > roundoff_scale(d)) v /= std::sqrt(norm_sq);
    return PureState(n, std::move(v));
  }
  if (kind == "density") {
    CMatrix m(d, d);
    if (static_cast<Eigen::Index>(data.size()) == d && data.size() > 0 && data[0].is_array() &&
        data[0].size() == static_cast<std::size_t>(d) && data[0][0].is_array()) {
      for (Eigen::Index i = 0; i < d; ++i) {
        const json& row = data[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
          throw InputError("state file: ragged density rows");
        }
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = complex_from_json(row[static_cast<std::size_t>(j)]);
      }
    } else if (static_cast<Eigen::Index>(data.size()) == d * d) {
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = complex_from_json(data[static_cast<std::size_t>(i * d + j)]);
    } else {
      throw InputError("state file: density data must be 2^n rows of 2^n entries");
    }
    if (!m.allFinite()) throw InputError("state file: non-finite entry");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kLoadTolerance) throw InputError("state file: matrix is not Hermitian");
    const cplx tr = m.trace();
    if (std::abs(tr - cplx{1.0, 0.0}) > kLoadTolerance) throw InputError("state file: trace is not 1");
    if (std::abs(tr - cplx{1.0, 0.0}) > roundoff_scale(d)) m /= tr.real();
    try {
      return DensityMatrix(n, std::move(m));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("state file: ") + e.what());
    }
  }
  throw InputError("state file: unknown kind '" + kind + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  if (!is_gzip(bytes)) return bytes;

  gzFile gz = gzopen(path.string().c_str(), "rb");
  if (!gz) throw InputError("cannot open gzip stream '" + path.string() + "'");
  std::string out;
  std::vector<char> chunk(1 << 16);
  int got;
  while ((got = gzread(gz, chunk.data(), static_cast<unsigned>(chunk.size()))) > 0) {
    out.append(chunk.data(), static_cast<std::size_t>(got));
  }
  const bool failed = got < 0;
  gzclose(gz);
  if (failed) throw InputError("corrupt gzip stream '" + path.string() + "'");
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content, bool gzip) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!gzip) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    return;
  }
  gzFile gz = gzopen(path.string().c_str(), "wb");
  if (!gz) throw std::runtime_error("cannot write '" + path.string() + "'");
  const int wrote = gzwrite(gz, content.data(), static_cast<unsigned>(content.size()));
  gzclose(gz);
  if (wrote != static_cast<int>(content.size())) throw std::runtime_error("gzip write failed");
}

AnyState read_state_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return state_from_json(doc);
}

void write_state_file(const std::filesystem::path& path, const AnyState& s, bool gzip) {
  write_file(path, state_to_json(s).dump() + "\n", gzip);
}

NamedStateSpec spec_from_json(const json& doc) {
  reject_unknown(doc, {"family", "n_qubits", "pairs", "q", "seed"}, "state spec");
  NamedStateSpec spec;
  try {
    spec.family = state_family_from_string(required<std::string>(doc, "family"));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (doc.contains("pairs")) {
    if (spec.family != StateFamily::BellChain) throw InputError("state spec: 'pairs' only applies to BELL_CHAIN");
    spec.n_qubits = 2 * required<int>(doc, "pairs");
    if (doc.contains("n_qubits") && required<int>(doc, "n_qubits") != spec.n_qubits) {
      throw InputError("state spec: 'pairs' and 'n_qubits' disagree");
    }
  } else {
    spec.n_qubits = required<int>(doc, "n_qubits");
  }
  if (doc.contains("q") && !doc["q"].is_null()) spec.q = required<double>(doc, "q");
  if (doc.contains("seed")) spec.seed = required<std::uint64_t>(doc, "seed");
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  return spec;
}

json spec_to_json(const NamedStateSpec& spec) {
  json out = {{"family", to_string(spec.family)}, {"n_qubits", spec.n_qubits}};
  if (spec.q) out["q"] = *spec.q;
  out["seed"] = spec.seed;
  return out;
}

RunConfig run_config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"epsilon", "s_max", "purity_tol", "m_max", "include_p1_member_per_round",
                  "member_weight_floor", "refine_threshold", "refine_iterations",
                  "refine_learning_rate", "optimizer", "seed", "shots", "out", "trace_csv"},
                 "run config");
  RunConfig cfg;
  AdaptiveConfig& a = cfg.adaptive;
  if (doc.contains("epsilon")) a.epsilon = required<double>(doc, "epsilon");
  if (doc.contains("s_max") && !doc["s_max"].is_null()) a.s_max = required<int>(doc, "s_max");
  if (doc.contains("purity_tol")) a.purity_tol = required<double>(doc, "purity_tol");
  if (doc.contains("m_max")) a.m_max = required<int>(doc, "m_max");
  if (doc.contains("include_p1_member_per_round")) {
    a.include_p1_member_per_round = required<bool>(doc, "include_p1_member_per_round");
  }
  if (doc.contains("member_weight_floor")) a.member_weight_floor = required<double>(doc, "member_weight_floor");
  if (doc.contains("refine_threshold")) a.refine_threshold = required<double>(doc, "refine_threshold");
  if (doc.contains("refine_iterations")) a.refine_iterations = required<int>(doc, "refine_iterations");
  if (doc.contains("refine_learning_rate")) a.refine_learning_rate = required<double>(doc, "refine_learning_rate");
  if (doc.contains("optimizer")) {
    const json& o = doc["optimizer"];
    reject_unknown(o,
                   {"max_iterations", "restarts", "learning_rate", "tolerance", "stall_window",
                    "stop_on_success"},
                   "run config optimizer");
    OptimizerConfig& opt = a.optimizer;
    if (o.contains("max_iterations")) opt.max_iterations = required<int>(o, "max_iterations");
    if (o.contains("restarts")) opt.restarts = required<int>(o, "restarts");
    if (o.contains("learning_rate")) opt.learning_rate = required<double>(o, "learning_rate");
    if (o.contains("tolerance")) opt.tolerance = required<double>(o, "tolerance");
    if (o.contains("stall_window")) opt.stall_window = required<int>(o, "stall_window");
    if (o.contains("stop_on_success")) opt.stop_on_success = required<bool>(o, "stop_on_success");
  }
  if (doc.contains("seed")) a.optimizer.seed = required<std::uint64_t>(doc, "seed");
  if (doc.contains("shots")) cfg.shots = required<int>(doc, "shots");
  if (doc.contains("out") && !doc["out"].is_null()) cfg.out = required<std::string>(doc, "out");
  if (doc.contains("trace_csv") && !doc["trace_csv"].is_null()) cfg.trace_csv = required<std::string>(doc, "trace_csv");
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("run config: ") + e.what());
  }
  if (cfg.shots < 0) throw InputError("run config: shots must be >= 0");
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  const AdaptiveConfig& a = cfg.adaptive;
  const OptimizerConfig& o = a.optimizer;
  json out;
  out["epsilon"] = a.epsilon;
  out["s_max"] = a.s_max ? json(*a.s_max) : json(nullptr);
  out["purity_tol"] = a.purity_tol;
  out["m_max"] = a.m_max;
  out["include_p1_member_per_round"] = a.include_p1_member_per_round;
  out["member_weight_floor"] = a.member_weight_floor;
  out["refine_threshold"] = a.refine_threshold;
  out["refine_iterations"] = a.refine_iterations;
  out["refine_learning_rate"] = a.refine_learning_rate;
  out["optimizer"] = {{"max_iterations", o.max_iterations}, {"restarts", o.restarts},
                      {"learning_rate", o.learning_rate}, {"tolerance", o.tolerance},
                      {"stall_window", o.stall_window}, {"stop_on_success", o.stop_on_success}};
  out["seed"] = o.seed;
  out["shots"] = cfg.shots;
  out["out"] = cfg.out ? json(*cfg.out) : json(nullptr);
  out["trace_csv"] = cfg.trace_csv ? json(*cfg.trace_csv) : json(nullptr);
  return out;
}

json circuit_to_json(const ParamCircuit& c) {
  json layers = json::array();
  for (const auto& layer : c.layers()) {
    json gates = json::array();
    for (const auto& g : layer) {
      json targets = json::array(), slots = json::array();
      for (int t = 0; t < g.num_targets(); ++t) targets.push_back(g.targets[static_cast<std::size_t>(t)] + 1);
      for (int s = 0; s < g.num_slots(); ++s) slots.push_back(g.slots[static_cast<std::size_t>(s)]);
      gates.push_back({{"kind", to_string(g.kind)}, {"targets", std::move(targets)}, {"slots", std::move(slots)}});
    }
    layers.push_back(std::move(gates));
  }
  json pairs = json::array();
  for (const auto& p : c.entangling_pairs()) pairs.push_back(pair_to_json(p));
  return {{"pool", to_string(c.pool_tag())}, {"index", c.pool_index()}, {"w_mode", to_string(c.w_mode())},
          {"n_qubits", c.n_qubits()}, {"param_count", c.param_count()}, {"entangling_pairs", std::move(pairs)},
          {"layers", std::move(layers)}};
}

json pool_to_json(int n, const CircuitPool& pool) {
  json schedule = json::array();
  json circuits = json::array();
  circuits.push_back(circuit_to_json(pool.p1));
  for (const auto& c : pool.p2) {
    json layer = json::array();
    for (const auto& p : c.entangling_pairs()) layer.push_back(pair_to_json(p));
    schedule.push_back(std::move(layer));
    circuits.push_back(circuit_to_json(c));
  }
  return {{"n_qubits", n}, {"L", pool.p2.size()}, {"schedule", std::move(schedule)}, {"circuits", std::move(circuits)}};
}

json circuit_ref_to_json(const CircuitRef& ref) {
  json pairs = json::array();
  for (const auto& p : ref.pairs) pairs.push_back(pair_to_json(p));
  return {{"pool", to_string(ref.pool)}, {"index", ref.index}, {"w_mode", to_string(ref.w_mode)},
          {"entangling_pairs", std::move(pairs)}};
}

json verdict_to_json(const SeparabilityVerdict& v) {
  json out;
  out["pipeline"] = v.pipeline;
  out["status"] = to_string(v.status);
  out["n_qubits"] = v.n_qubits;
  out["k"] = v.k ? json(*v.k) : json(nullptr);
  out["partition"] = v.partition ? partition_to_json(*v.partition) : json(nullptr);
  out["winning_circuit"] = v.winning_circuit ? circuit_ref_to_json(*v.winning_circuit) : json(nullptr);
  out["final_cost"] = v.final_cost;
  out["epsilon"] = v.epsilon;
  out["optimal_params"] = v.optimal_params ? json(*v.optimal_params) : json(nullptr);

  json diag;
  if (v.m_used) diag["m_used"] = *v.m_used;
  if (v.rounds_used) diag["rounds_used"] = *v.rounds_used;
  json cands = json::array();
  for (const auto& c : v.candidates) {
    json e = {{"circuit", c.circuit}, {"best_cost", c.best_cost}, {"restart_index", c.restart_index},
              {"iterations", c.iterations}};
    if (c.m > 0) e["m"] = c.m;
    cands.push_back(std::move(e));
  }
  diag["candidates"] = std::move(cands);
  diag["pair_purities"] = purities_to_json(v.pair_purities);
  json rounds = json::array();
  for (const auto& r : v.rounds) {
    rounds.push_back({{"S", r.s}, {"members", r.member_count}, {"parameters", r.param_count}, {"best_cost", r.best_cost}});
  }
  diag["rounds"] = std::move(rounds);
  json members = json::array();
  for (const auto& m : v.members) {
    members.push_back({{"circuit", circuit_ref_to_json(m.circuit)},
                       {"weight", m.weight},
                       {"k", m.k},
                       {"counted", m.counted},
                       {"partition", partition_to_json(m.partition)},
                       {"pair_purities", purities_to_json(m.purities)}});
  }
  diag["members"] = std::move(members);
  if (v.caratheodory_members) {
    diag["bounds"] = {{"caratheodory_members_4n", *v.caratheodory_members},
                      {"fixed_members_2n", v.fixed_members_2n.value_or(0)},
                      {"fixed_parameters_4n", *v.caratheodory_members * static_cast<std::uint64_t>(1 + 2 * v.n_qubits)},
                      {"fixed_parameters_2n", v.fixed_members_2n.value_or(0) * static_cast<std::uint64_t>(1 + 2 * v.n_qubits)}};
  }
  out["diagnostics"] = std::move(diag);
  return out;
}

}  // namespace vqsep::io

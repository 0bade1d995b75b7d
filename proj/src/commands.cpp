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

#include "vqsep/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vqsep/statelib.hpp"

namespace vqsep::cli {
namespace {

using io::json;

std::string pair_text(const QubitPair& p) {
  return "(" + std::to_string(p.first + 1) + "," + std::to_string(p.second + 1) + ")";
}

std::string csv_double(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) { io::write_file(path, text); }

std::string trace_to_csv(const std::vector<TracePoint>& points) {
  std::string csv = "stage,restart,iteration,cost\n";
  for (const auto& p : points) {
    csv += std::to_string(p.stage) + "," + std::to_string(p.restart) + "," + std::to_string(p.iteration) + "," +
           csv_double(p.cost) + "\n";
  }
  return csv;
}

std::string rounds_to_csv(const SeparabilityVerdict& v) {
  std::string csv = "S,members,parameters,best_cost\n";
  for (const auto& r : v.rounds) {
    csv += std::to_string(r.s) + "," + std::to_string(r.member_count) + "," + std::to_string(r.param_count) + "," +
           csv_double(r.best_cost) + "\n";
  }
  return csv;
}

// A failed bound is reported on err and remembered.
struct BoundChecker {
  std::ostream& err;
  bool ok = true;
  json results = json::array();

  void check(bool pass, const std::string& what) {
    results.push_back({{"check", what}, {"pass", pass}});
    if (!pass) {
      ok = false;
      err << "bound violated: " << what << "\n";
    }
  }
};

int reproduce_fig3a(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
  const double qs[] = {0.2, 0.4, 0.6, 0.8};
  std::string csv = "q,m,infidelity\n";
  BoundChecker bounds{err};
  for (double q : qs) {
    double prev = 2.0;
    for (int m = 1; m <= 6; ++m) {
      const double f = oracle_infidelity(q, m);
      csv += csv_double(q) + "," + std::to_string(m) + "," + csv_double(f) + "\n";
      bounds.check(f < prev, "infidelity decreases in m at q=" + csv_double(q) + ", m=" + std::to_string(m));
      prev = f;
    }
    bounds.check(oracle_infidelity(q, 5) < 1e-4, "infidelity below 1e-4 by m=5 at q=" + csv_double(q));
  }
  bounds.check(oracle_infidelity(0.8, 5) < 1e-8, "infidelity below 1e-8 at q=0.8, m=5");
  write_text(dir / "fig3a.csv", csv);
  const json report = {{"experiment", "fig3a"}, {"checks", bounds.results}, {"pass", bounds.ok}};
  write_text(dir / "fig3a_report.json", report.dump(2) + "\n");
  out << "fig3a: " << (bounds.ok ? "PASS" : "FAIL") << " (" << (dir / "fig3a.csv").string() << ")\n";
  return bounds.ok ? kExitDetected : kExitBoundViolated;
}

int reproduce_alg1(const std::filesystem::path& dir, std::uint64_t seed, std::optional<int> s_max, std::ostream& out,
                   std::ostream& err) {
  io::RunConfig cfg;
  cfg.adaptive.s_max = s_max.value_or(16);
  cfg.adaptive.optimizer.seed = seed;
  const DensityMatrix rho = rho4(0.9);
  const SeparabilityVerdict v = algorithm1(rho, cfg.adaptive);

  BoundChecker bounds{err};
  bounds.check(v.detected(), "rho4(0.9) detected as fully separable");
  bounds.check(v.detected() && v.rounds_used && *v.rounds_used <= 16, "detected within S <= 16");
  bounds.check(v.final_cost < 1e-4, "final cost below 1e-4");
  bool counts = true;
  for (const auto& r : v.rounds) counts = counts && r.param_count == static_cast<std::size_t>(r.s) * 9;
  bounds.check(counts, "parameter count per round equals 9 S");

  write_text(dir / "alg1_rounds.csv", rounds_to_csv(v));
  const json report = {{"experiment", "alg1-demo"}, {"config", io::run_config_to_json(cfg)},
                       {"verdict", io::verdict_to_json(v)}, {"checks", bounds.results}, {"pass", bounds.ok}};
  write_text(dir / "alg1_report.json", report.dump(2) + "\n");
  out << "alg1-demo: " << (bounds.ok ? "PASS" : "FAIL") << " S=" << v.rounds_used.value_or(-1)
      << " cost=" << v.final_cost << "\n";
  return bounds.ok ? kExitDetected : kExitBoundViolated;
}

int reproduce_alg2(const std::filesystem::path& dir, std::uint64_t seed, std::optional<int> s_max, std::ostream& out,
                   std::ostream& err) {
  io::RunConfig cfg;
  cfg.adaptive.s_max = s_max.value_or(5);
  cfg.adaptive.optimizer.seed = seed;
  const SeparabilityVerdict v = algorithm2(rho3(0.7), cfg.adaptive);

  double min_purity = 1.0;
  std::string members = "member,circuit,weight,k,counted,pair,purity,edge\n";
  for (std::size_t i = 0; i < v.members.size(); ++i) {
    const MemberReport& m = v.members[i];
    std::string label = to_string(m.circuit.pool);
    if (m.circuit.pool == PoolTag::P2) label += "[l=" + std::to_string(m.circuit.index) + "]";
    for (const auto& p : m.purities) {
      members += std::to_string(i + 1) + "," + label + "," + csv_double(m.weight) + "," + std::to_string(m.k) + "," +
                 (m.counted ? "1" : "0") + "," + std::to_string(p.pair.first + 1) + "-" +
                 std::to_string(p.pair.second + 1) + "," + csv_double(p.purity) + "," + (p.edge ? "1" : "0") + "\n";
      if (m.counted) min_purity = std::min(min_purity, p.purity);
    }
  }

  BoundChecker bounds{err};
  bounds.check(v.detected() && v.k == 2, "rho3(0.7) detected as 2-separable");
  bounds.check(v.detected() && v.rounds_used && *v.rounds_used <= 5, "detected within S <= 5");
  bounds.check(v.final_cost < 1e-4, "final cost below 1e-4");
  bounds.check(min_purity < 0.99, "some member pair purity below 0.99");

  write_text(dir / "alg2_rounds.csv", rounds_to_csv(v));
  write_text(dir / "alg2_members.csv", members);
  const json report = {{"experiment", "alg2-demo"}, {"config", io::run_config_to_json(cfg)},
                       {"verdict", io::verdict_to_json(v)}, {"min_member_purity", min_purity},
                       {"checks", bounds.results}, {"pass", bounds.ok}};
  write_text(dir / "alg2_report.json", report.dump(2) + "\n");
  out << "alg2-demo: " << (bounds.ok ? "PASS" : "FAIL") << " S=" << v.rounds_used.value_or(-1)
      << " k=" << v.k.value_or(-1) << " min purity=" << min_purity << "\n";
  return bounds.ok ? kExitDetected : kExitBoundViolated;
}

}  // namespace

std::string to_string(DetectMode m) {
  switch (m) {
    case DetectMode::Pure: return "pure";
    case DetectMode::Noisy: return "noisy";
    case DetectMode::MixedFull: return "mixed-full";
    case DetectMode::MixedK: return "mixed-k";
  }
  return "?";
}

DetectMode detect_mode_from_string(const std::string& s) {
  if (s == "pure") return DetectMode::Pure;
  if (s == "noisy") return DetectMode::Noisy;
  if (s == "mixed-full") return DetectMode::MixedFull;
  if (s == "mixed-k") return DetectMode::MixedK;
  throw io::InputError("unknown detection mode '" + s + "'");
}

int cmd_pool(int n, const std::string& format, std::ostream& out, std::ostream& err) {
  if (n < 2 || n > kDefaultQubitCap) {
    err << "pool: n must be in [2, " << kDefaultQubitCap << "]\n";
    return kExitInputError;
  }
  if (format != "text" && format != "json") {
    err << "pool: format must be text or json\n";
    return kExitInputError;
  }
  const CircuitPool pool = build_pool(n, WMode::Full3);
  if (format == "json") {
    out << io::pool_to_json(n, pool).dump(2) << "\n";
    return kExitDetected;
  }
  const CircuitPool reduced = build_pool(n, WMode::Reduced2);
  out << "n = " << n << "\nL = " << pool.p2.size() << "\n";
  out << "circuit     params(full3) params(reduced2)  pairs\n";
  auto row = [&](const ParamCircuit& c, const ParamCircuit& r) {
    out << std::left << std::setw(12) << c.label() << std::setw(14) << c.param_count() << std::setw(18)
        << r.param_count();
    for (const auto& p : c.entangling_pairs()) out << pair_text(p) << " ";
    out << "\n";
  };
  row(pool.p1, reduced.p1);
  for (std::size_t i = 0; i < pool.p2.size(); ++i) row(pool.p2[i], reduced.p2[i]);
  return kExitDetected;
}

io::json detect_report(DetectMode mode, const io::AnyState& state, const io::RunConfig& cfg,
                       const TraceSink& trace) {
  const bool is_pure = std::holds_alternative<PureState>(state);
  if (mode == DetectMode::Pure && !is_pure) throw io::InputError("mode pure requires a pure state file");
  auto as_density = [&]() {
    return is_pure ? DensityMatrix::from_pure(std::get<PureState>(state)) : std::get<DensityMatrix>(state);
  };

  SeparabilityVerdict v;
  switch (mode) {
    case DetectMode::Pure: v = detect_pure(std::get<PureState>(state), cfg.adaptive, trace); break;
    case DetectMode::Noisy: v = detect_noisy_pure(as_density(), cfg.adaptive, trace); break;
    case DetectMode::MixedFull: v = algorithm1(as_density(), cfg.adaptive, trace); break;
    case DetectMode::MixedK: v = algorithm2(as_density(), cfg.adaptive, trace); break;
  }

  json report;
  report["tool"] = "vqsep";
  report["command"] = "detect";
  report["mode"] = to_string(mode);
  report["state"] = {{"kind", is_pure ? "pure" : "density"},
                     {"n_qubits", std::visit([](const auto& s) { return s.n_qubits(); }, state)}};
  report["config"] = io::run_config_to_json(cfg);
  report["verdict"] = io::verdict_to_json(v);
  if (cfg.shots > 0) {
    if (mode == DetectMode::Pure || mode == DetectMode::Noisy) {
      // The reconstruction cost is 1 - sqrt(F), so F follows directly.
      const double fidelity = std::clamp((1.0 - v.final_cost) * (1.0 - v.final_cost), 0.0, 1.0);
      const ShotEstimate est = bernoulli_estimate(fidelity, cfg.shots, cfg.adaptive.optimizer.seed);
      report["shot_estimate"] = {{"fidelity", fidelity}, {"estimate", est.estimate}, {"shots", est.shots},
                                 {"seed", est.seed}};
    } else {
      report["shot_estimate"] = nullptr;
    }
  }
  return report;
}

int cmd_detect(const DetectOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    io::RunConfig cfg;
    if (opts.config) cfg = io::run_config_from_json(json::parse(io::read_file(*opts.config)));
    if (opts.seed) cfg.adaptive.optimizer.seed = *opts.seed;
    if (opts.epsilon) cfg.adaptive.epsilon = *opts.epsilon;
    if (opts.s_max) cfg.adaptive.s_max = *opts.s_max;
    if (opts.m_max) cfg.adaptive.m_max = *opts.m_max;
    if (opts.shots) cfg.shots = *opts.shots;
    if (opts.out) cfg.out = *opts.out;
    if (opts.trace_csv) cfg.trace_csv = *opts.trace_csv;
    try {
      cfg.adaptive.validate();
    } catch (const std::invalid_argument& e) {
      throw io::InputError(e.what());
    }
    if (cfg.shots < 0) throw io::InputError("shots must be >= 0");

    const io::AnyState state = io::read_state_file(opts.state);
    std::vector<TracePoint> points;
    TraceSink sink;
    if (cfg.trace_csv) sink = [&points](const TracePoint& p) { points.push_back(p); };

    const json report = detect_report(opts.mode, state, cfg, sink);
    const std::string text = report.dump(2) + "\n";
    if (cfg.out) {
      io::write_file(*cfg.out, text);
      out << report["verdict"]["status"].get<std::string>() << "\n";
    } else {
      out << text;
    }
    if (cfg.trace_csv) io::write_file(*cfg.trace_csv, trace_to_csv(points));
    return report["verdict"]["status"] == "DETECTED" ? kExitDetected : kExitInconclusive;
  } catch (const io::InputError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const std::length_error& e) {
    err << "input error: " << e.what() << "\n";
  }
  return kExitInputError;
}

int cmd_state_gen(const io::json& spec_doc, const std::filesystem::path& out_path, bool gzip,
                  std::ostream& out, std::ostream& err) {
  try {
    const NamedStateSpec spec = io::spec_from_json(spec_doc);
    if (spec.family == StateFamily::Custom) throw io::InputError("state gen: CUSTOM specs cannot be generated");
    const PureState psi = named_pure_state(spec);
    io::AnyState state = psi;
    if (spec.q) state = depolarize_global(psi, *spec.q);
    io::write_state_file(out_path, state, gzip);
    out << "wrote " << out_path.string() << "\n";
    return kExitDetected;
  } catch (const io::InputError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const std::length_error& e) {
    err << "input error: " << e.what() << "\n";
  }
  return kExitInputError;
}

int cmd_reproduce(const std::string& experiment, const std::filesystem::path& out_dir, std::uint64_t seed,
                  std::optional<int> s_max, std::ostream& out, std::ostream& err) {
  if (s_max && *s_max < 1) {
    err << "input error: --s-max must be >= 1\n";
    return kExitInputError;
  }
  if (experiment != "fig3a" && experiment != "alg1-demo" && experiment != "alg2-demo") {
    err << "unknown experiment '" << experiment << "'\n";
    return kExitInputError;
  }
  std::filesystem::create_directories(out_dir);
  if (experiment == "fig3a") return reproduce_fig3a(out_dir, out, err);
  if (experiment == "alg1-demo") return reproduce_alg1(out_dir, seed, s_max, out, err);
  return reproduce_alg2(out_dir, seed, s_max, out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational separability detection for multiqubit states"};
  app.require_subcommand(1);

  int pool_n = 0;
  std::string pool_format = "text";
  auto* pool = app.add_subcommand("pool", "Print the circuit pool for n qubits");
  pool->add_option("--n", pool_n, "Number of qubits")->required();
  pool->add_option("--format", pool_format, "text or json");

  DetectOptions d;
  std::string mode = "pure";
  std::string state_path;
  std::string config_path, out_path, trace_path;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  int s_max = 0, m_max = 0, shots = 0;
  auto* detect = app.add_subcommand("detect", "Run a detection pipeline on a state file");
  detect->add_option("--mode", mode, "pure, noisy, mixed-full or mixed-k");
  detect->add_option("--state", state_path, "State file (JSON, optionally gzipped)")->required();
  auto* o_config = detect->add_option("--config", config_path, "Run config JSON");
  auto* o_out = detect->add_option("--out", out_path, "Write the report here instead of stdout");
  auto* o_seed = detect->add_option("--seed", seed, "Optimizer seed");
  auto* o_eps = detect->add_option("--epsilon", epsilon, "Success threshold");
  auto* o_smax = detect->add_option("--s-max", s_max, "Largest ensemble round");
  auto* o_mmax = detect->add_option("--m-max", m_max, "Largest matrix power");
  auto* o_shots = detect->add_option("--shots", shots, "Shots for a sampled fidelity estimate");
  auto* o_trace = detect->add_option("--trace-csv", trace_path, "Write optimizer traces as CSV");

  auto* state = app.add_subcommand("state", "State utilities");
  state->require_subcommand(1);
  std::string spec_text, gen_out;
  bool gzip = false;
  auto* gen = state->add_subcommand("gen", "Generate a named state file");
  gen->add_option("--spec", spec_text, "State spec as JSON text or a path to a JSON file")->required();
  gen->add_option("--out", gen_out, "Output path")->required();
  gen->add_flag("--gzip", gzip, "Compress the output");

  std::string experiment, repro_dir = ".";
  std::uint64_t repro_seed = 0;
  int repro_smax = 0;
  auto* repro = app.add_subcommand("reproduce", "Regenerate a numerical experiment and check its bounds");
  repro->add_option("experiment", experiment, "fig3a, alg1-demo or alg2-demo")->required();
  repro->add_option("--out", repro_dir, "Output directory");
  repro->add_option("--seed", repro_seed, "Optimizer seed");
  auto* o_repro_smax = repro->add_option("--s-max", repro_smax, "Override the round budget of the ensemble demos");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitInputError;
  }

  if (*pool) return cmd_pool(pool_n, pool_format, out, err);
  if (*detect) {
    try {
      d.mode = detect_mode_from_string(mode);
    } catch (const io::InputError& e) {
      err << "input error: " << e.what() << "\n";
      return kExitInputError;
    }
    d.state = state_path;
    if (*o_config) d.config = config_path;
    if (*o_out) d.out = out_path;
    if (*o_seed) d.seed = seed;
    if (*o_eps) d.epsilon = epsilon;
    if (*o_smax) d.s_max = s_max;
    if (*o_mmax) d.m_max = m_max;
    if (*o_shots) d.shots = shots;
    if (*o_trace) d.trace_csv = trace_path;
    return cmd_detect(d, out, err);
  }
  if (*gen) {
    json spec;
    try {
      const bool inline_json = spec_text.find('{') != std::string::npos;
      spec = json::parse(inline_json ? spec_text : io::read_file(spec_text));
    } catch (const std::exception& e) {
      err << "input error: " << e.what() << "\n";
      return kExitInputError;
    }
    return cmd_state_gen(spec, gen_out, gzip, out, err);
  }
  if (*repro) {
    return cmd_reproduce(experiment, repro_dir, repro_seed, *o_repro_smax ? std::optional<int>(repro_smax) : std::nullopt,
                         out, err);
  }
  return kExitInputError;
}

}  // namespace vqsep::cli

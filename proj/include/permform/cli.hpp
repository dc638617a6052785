#pragma once

// Command-line surface. run_cli() takes argv-style arguments and writes to
// the given streams so commands can be exercised in-process.
//
// Exit codes: 0 ok/feasible/valid, 1 usage or parse error, 2 infeasible best
// effort (or oracle disagreement), 3 invalid certificate, 4 digest mismatch,
// 5 instance beyond oracle limits.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "permform/anneal.hpp"
#include "permform/formulations.hpp"
#include "permform/io.hpp"
#include "permform/oracles.hpp"
#include "permform/problem.hpp"
#include "permform/relax.hpp"
#include "permform/sat.hpp"

namespace permform::cli {

using ojson = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInfeasible = 2,
  kInvalid = 3,
  kDigestMismatch = 4,
  kOutOfRange = 5,
};

enum class Method { anneal, relax, exact };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::anneal: return "anneal";
    case Method::relax: return "relax";
    case Method::exact: return "exact";
  }
  return "?";
}

inline std::optional<Method> method_from_string(std::string_view s) {
  for (Method m : {Method::anneal, Method::relax, Method::exact})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

/// Usage-level failure (exit 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Problem parse_problem(const std::string& s) {
  if (auto p = problem_from_string(s)) return *p;
  throw UsageError("unknown problem '" + s + "'");
}

// ---------------------------------------------------------------------------
// JSON helpers

inline ojson solution_json(const DiscreteSolution& s) {
  struct {
    ojson operator()(const VertexSet& v) const { return {{"vertices", v.vertices}}; }
    ojson operator()(const Bipartition& b) const { return {{"side", b.side}, {"rest", b.rest}}; }
    ojson operator()(const ColorClasses& c) const { return {{"classes", c.classes}}; }
    ojson operator()(const Tour& t) const { return {{"tour", t.cities}}; }
    ojson operator()(const VertexMapping& m) const { return {{"mapping", m.mapping}}; }
    ojson operator()(const SatAssignment& a) const {
      ojson arr = ojson::array();
      for (bool b : a.values) arr.push_back(b);
      return {{"assignment", arr}};
    }
  } visitor;
  return std::visit(visitor, s);
}

inline std::string solution_text(const DiscreteSolution& s) {
  const auto list = [](const std::vector<int>& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out + "}";
  };
  struct {
    decltype(list)& l;
    std::string operator()(const VertexSet& v) const { return "vertices " + l(v.vertices); }
    std::string operator()(const Bipartition& b) const { return "cut " + l(b.side) + " | " + l(b.rest); }
    std::string operator()(const ColorClasses& c) const {
      std::string out = "classes";
      for (const auto& cls : c.classes) out += " " + l(cls);
      return out;
    }
    std::string operator()(const Tour& t) const { return "tour " + l(t.cities); }
    std::string operator()(const VertexMapping& m) const { return "mapping " + l(m.mapping); }
    std::string operator()(const SatAssignment& a) const {
      std::string out = "assignment";
      for (std::size_t i = 0; i < a.values.size(); ++i)
        out += " x" + std::to_string(i + 1) + "=" + (a.values[i] ? "T" : "F");
      return out;
    }
  } visitor{list};
  return std::visit(visitor, s);
}

/// Integral values print without a fractional part.
inline ojson number_json(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
  return v;
}

inline std::string number_text(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

inline ojson matrix_json(const IntMatrix& m) {
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  const auto d = std::chrono::steady_clock::now() - start;
  return std::round(std::chrono::duration<double, std::milli>(d).count() * 1000.0) / 1000.0;
}

// ---------------------------------------------------------------------------
// Solving (shared by solve and bench)

struct SolverOptions {
  AnnealParams anneal;
  RelaxParams relax;
};

struct SolveOutcome {
  CandidateSolution candidate;
  Evaluation evaluation;
  ojson trajectory;
};

inline ojson anneal_trajectory(const AnnealResult& r, std::size_t restarts) {
  ojson stages = ojson::array();
  for (const auto& s : r.stages)
    stages.push_back({{"k", s.k},
                      {"iterations", s.iterations},
                      {"final_energy", number_json(s.final_energy)},
                      {"improvements", s.best_energy.size() - 1}});
  return {{"restarts", restarts},
          {"best_restart", r.best_restart},
          {"total_iterations", r.total_iterations},
          {"stages", stages}};
}

inline ojson relax_trajectory(const RelaxResult& r) {
  ojson stages = ojson::array();
  for (const auto& s : r.summary.stages) {
    ojson st;
    st["k"] = s.k ? ojson(*s.k) : ojson(nullptr);
    st["steps"] = s.steps;
    st["final_value"] = s.final_value;
    st["final_residual"] = s.final_residual;
    st["final_penalty"] = s.final_penalty;
    st["final_temperature"] = s.final_temperature;
    st["roundings"] = s.roundings;
    st["feasible_roundings"] = s.feasible_roundings;
    stages.push_back(std::move(st));
  }
  ojson out;
  out["stages"] = stages;
  out["rounded_objective"] = number_json(r.summary.rounded ? r.summary.rounded->objective : 0.0);
  out["rounded_feasible"] = r.summary.rounded && r.summary.rounded->feasible;
  out["polished"] = r.summary.polished;
  out["polish_improved"] = r.summary.polish_improved;
  return out;
}

/// Throws InstanceTooLarge for exact runs beyond the oracle limits and
/// UsageError for unsupported method/problem pairs.
inline SolveOutcome run_solver(Problem p, const Instance& inst, Method m, const SolverOptions& opt) {
  SolveOutcome out;
  switch (m) {
    case Method::anneal: {
      const auto r = anneal(p, inst, opt.anneal);
      out.candidate = r.candidate;
      out.evaluation = r.evaluation;
      out.trajectory = anneal_trajectory(r, opt.anneal.restarts);
      break;
    }
    case Method::relax: {
      if (!relax_supported(p))
        throw UsageError(std::string("method relax does not support problem '") + std::string(permform::to_string(p)) + "'");
      const auto r = relax_solve(p, inst, opt.relax);
      out.candidate = r.candidate;
      out.evaluation = r.evaluation;
      out.trajectory = relax_trajectory(r);
      break;
    }
    case Method::exact: {
      const auto r = brute_oracle(p, inst);
      if (r.candidate) {
        out.candidate = *r.candidate;
      } else {
        // Unsatisfiable formula: report the all-true assignment as the best effort.
        const auto& s = std::get<SatInstance>(inst);
        SatAssignment all{std::vector<bool>(s.num_vars, true)};
        out.candidate = CandidateSolution{p, sat_permutation(sat_encode(s), all), std::nullopt, std::nullopt};
      }
      out.evaluation = evaluate(inst, out.candidate);
      out.trajectory = {{"oracle_optimum", number_json(r.optimum)}};
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct CommonArgs {
  std::string problem;
  std::string input;
  std::string second;
  bool lenient = false;
  bool json = false;
  bool text = false;
};

inline void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--problem", a.problem, "Problem: tsp qap mis maxcut coloring mvc mds clique gi sat")->required();
  cmd->add_option("--input", a.input, "Instance file (DIMACS graph/CNF, TSPLIB, QAPLIB)")->required();
  cmd->add_option("--second", a.second, "Second DIMACS graph (gi only)");
  cmd->add_flag("--lenient", a.lenient, "Warn instead of failing on header count mismatches");
  auto* j = cmd->add_flag("--json", a.json, "Machine-readable JSON output");
  auto* t = cmd->add_flag("--text", a.text, "Human-readable output (default)");
  j->excludes(t);
}

inline Instance load_common(const CommonArgs& a, Problem p, std::ostream& err) {
  Diagnostics diag;
  std::optional<std::string> second;
  if (!a.second.empty()) second = a.second;
  if (p == Problem::gi && !second) throw UsageError("gi needs --second <graph>");
  if (p != Problem::gi && second) throw UsageError("--second is only valid for gi");
  Instance inst = load_instance(p, a.input, second, a.lenient ? ParseMode::lenient : ParseMode::strict, &diag);
  for (const auto& w : diag) err << "warning: " << w << '\n';
  return inst;
}

struct SolveArgs {
  CommonArgs common;
  std::string method = "anneal";
  std::uint64_t seed = 0;
  std::string out;
  SolverOptions opt;
};

inline int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const Problem p = parse_problem(a.common.problem);
  const auto method = method_from_string(a.method);
  if (!method) throw UsageError("unknown method '" + a.method + "'");
  if (*method == Method::relax && !relax_supported(p))
    throw UsageError(std::string("method relax does not support problem '") + std::string(permform::to_string(p)) + "'");
  const Instance inst = load_common(a.common, p, err);

  SolverOptions opt = a.opt;
  opt.anneal.seed = a.seed;
  opt.relax.seed = a.seed;
  const auto start = std::chrono::steady_clock::now();
  const SolveOutcome r = run_solver(p, inst, *method, opt);
  const double ms = elapsed_ms(start);

  const Certificate cert = make_certificate(inst, r.candidate, r.evaluation);
  if (!a.out.empty()) write_file(a.out, write_certificate(cert));
  std::optional<DiscreteSolution> sol;
  if (r.evaluation.feasible) sol = extract_solution(inst, r.candidate);

  if (a.common.json) {
    ojson rep;
    rep["problem"] = permform::to_string(p);
    rep["input"] = a.common.input;
    if (p == Problem::gi) rep["second"] = a.common.second;
    rep["method"] = to_string(*method);
    rep["seed"] = a.seed;
    rep["wall_time_ms"] = ms;
    rep["objective"] = number_json(r.evaluation.objective);
    rep["feasible"] = r.evaluation.feasible;
    rep["violation"] = r.evaluation.violation;
    rep["solution"] = sol ? solution_json(*sol) : ojson(nullptr);
    rep["certificate"] = certificate_json(cert);
    rep["trajectory"] = r.trajectory;
    out << rep.dump(2) << '\n';
  } else {
    out << "problem:   " << permform::to_string(p) << '\n'
        << "method:    " << to_string(*method) << " (seed " << a.seed << ")\n"
        << "objective: " << number_text(r.evaluation.objective) << '\n'
        << "feasible:  " << (r.evaluation.feasible ? "yes" : "no") << '\n';
    if (!r.evaluation.feasible) out << "violation: " << r.evaluation.violation << '\n';
    if (sol) out << "solution:  " << solution_text(*sol) << '\n';
    out << "pi:        ";
    for (std::size_t i = 0; i < cert.pi.size(); ++i) out << (i ? " " : "") << cert.pi[i];
    out << '\n';
    if (cert.k) out << "k:         " << *cert.k << '\n';
    if (cert.blocks) {
      out << "blocks:    ";
      for (std::size_t i = 0; i < cert.blocks->size(); ++i) out << (i ? " " : "") << (*cert.blocks)[i];
      out << '\n';
    }
    out << "time:      " << ms << " ms\n";
  }
  return r.evaluation.feasible ? kOk : kInfeasible;
}

struct VerifyArgs {
  CommonArgs common;
  std::string certificate;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const Problem p = parse_problem(a.common.problem);
  const Instance inst = load_common(a.common, p, err);

  ojson rep;
  rep["problem"] = permform::to_string(p);
  rep["input"] = a.common.input;
  rep["certificate"] = a.certificate;
  const auto finish = [&](int code, const std::string& verdict, const std::string& reason) {
    rep["verdict"] = verdict;
    rep["reason"] = reason;
    if (a.common.json) out << rep.dump(2) << '\n';
    else out << verdict << (reason.empty() ? "" : ": " + reason) << '\n';
    return code;
  };

  Certificate cert;
  try {
    cert = read_certificate(read_file(a.certificate));
  } catch (const CertificateError& e) {
    return finish(kInvalid, "invalid", e.what());
  }
  if (cert.problem != p)
    return finish(kInvalid, "invalid",
                  std::string("certificate is for problem '") + std::string(permform::to_string(cert.problem)) + "'");
  const std::string digest = instance_digest(inst);
  rep["digest_match"] = digest == cert.instance_digest;
  if (digest != cert.instance_digest)
    return finish(kDigestMismatch, "digest mismatch",
                  "instance digest " + digest + " differs from certificate " + cert.instance_digest);

  Evaluation ev;
  try {
    ev = evaluate(inst, candidate_of(cert));
  } catch (const std::exception& e) {
    return finish(kInvalid, "invalid", e.what());
  }
  rep["feasible"] = ev.feasible;
  rep["violation"] = ev.violation;
  rep["objective"] = number_json(ev.objective);
  rep["claimed_objective"] = number_json(cert.objective);
  const bool objective_ok =
      std::abs(ev.objective - cert.objective) <= 1e-9 * std::max(1.0, std::abs(ev.objective));
  if (!ev.feasible)
    return finish(kInvalid, "invalid", "constraint violation " + std::to_string(ev.violation));
  if (!objective_ok)
    return finish(kInvalid, "invalid",
                  "claimed objective " + number_text(cert.objective) + ", recomputed " +
                      number_text(ev.objective));
  if (!cert.feasible) return finish(kInvalid, "invalid", "certificate claims infeasible but is feasible");
  return finish(kOk, "valid", "");
}

struct OracleArgs {
  CommonArgs common;
  bool formulation_search = false;
};

inline int cmd_oracle(const OracleArgs& a, std::ostream& out, std::ostream& err) {
  const Problem p = parse_problem(a.common.problem);
  const Instance inst = load_common(a.common, p, err);
  const OracleLimits limits = OracleLimits::from_environment();
  const OracleResult r = brute_oracle(p, inst, limits);
  std::optional<OracleResult> fs;
  if (a.formulation_search) fs = formulation_search(p, inst, limits);
  const bool agree = !fs || std::abs(fs->optimum - r.optimum) <= 1e-9 * std::max(1.0, std::abs(r.optimum));

  if (a.common.json) {
    ojson rep;
    rep["problem"] = permform::to_string(p);
    rep["input"] = a.common.input;
    rep["optimum"] = number_json(r.optimum);
    rep["witness"] = r.witness ? solution_json(*r.witness) : ojson(nullptr);
    if (r.candidate) {
      ojson c;
      ojson pi = ojson::array();
      for (int v : r.candidate->pi.one_based()) pi.push_back(v);
      c["pi"] = pi;
      if (r.candidate->k) c["k"] = *r.candidate->k;
      if (r.candidate->blocks) c["blocks"] = *r.candidate->blocks;
      rep["candidate"] = c;
    } else {
      rep["candidate"] = nullptr;
    }
    if (fs) {
      rep["formulation_search"] = {{"optimum", number_json(fs->optimum)}, {"agree", agree}};
    }
    out << rep.dump(2) << '\n';
  } else {
    out << "optimum: " << number_text(r.optimum) << '\n';
    if (r.witness) out << "witness: " << solution_text(*r.witness) << '\n';
    if (fs)
      out << number_text(r.optimum) << " = " << number_text(fs->optimum) << ", "
          << (agree ? "AGREE" : "DISAGREE") << '\n';
  }
  return agree ? kOk : kInfeasible;
}

struct EncodeArgs {
  CommonArgs common;
  std::string out;
};

inline ojson encoding_json(const SatEncoding& enc) {
  ojson order = ojson::array();
  for (std::size_t i = 0; i < 2 * enc.n_vars; ++i) order.push_back(vertex_literal(i));
  ojson j;
  j["n_vars"] = enc.n_vars;
  j["m_clauses"] = enc.m_clauses;
  j["N"] = enc.N;
  j["literal_order"] = order;
  j["V"] = matrix_json(enc.conflict);
  j["B"] = matrix_json(enc.incidence);
  j["A"] = matrix_json(enc.adjacency);
  j["T"] = matrix_json(enc.clause_selector);
  j["C"] = matrix_json(enc.literal_selector);
  return j;
}

inline int cmd_encode(const EncodeArgs& a, std::ostream& out, std::ostream& err) {
  const Problem p = parse_problem(a.common.problem);
  if (p != Problem::sat) throw UsageError("encode supports only --problem sat");
  const Instance inst = load_common(a.common, p, err);
  const std::string text = encoding_json(sat_encode(std::get<SatInstance>(inst))).dump(2) + "\n";
  if (a.out.empty()) out << text;
  else write_file(a.out, text);
  return kOk;
}

struct BenchArgs {
  std::string suite;
  bool json = false;
  bool text = false;
};

struct BenchRun {
  Problem problem;
  std::string input;
  std::string second;
  Method method;
  std::uint64_t seed = 0;
};

inline std::vector<BenchRun> read_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("suite manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("runs") || !j["runs"].is_array())
    throw UsageError("suite manifest must be an object with a 'runs' array");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& f) {
    const std::filesystem::path fp(f);
    return (fp.is_absolute() ? fp : base / fp).string();
  };
  std::vector<BenchRun> runs;
  std::size_t idx = 0;
  for (const auto& r : j["runs"]) {
    const std::string where = "suite run " + std::to_string(idx++);
    if (!r.is_object()) throw UsageError(where + " must be an object");
    for (const auto& [key, _] : r.items())
      if (key != "problem" && key != "input" && key != "second" && key != "method" && key != "seed")
        throw UsageError(where + ": unknown field '" + key + "'");
    const auto str = [&](const char* key) {
      if (!r.contains(key) || !r[key].is_string()) throw UsageError(where + ": '" + key + "' must be a string");
      return r[key].get<std::string>();
    };
    BenchRun run;
    const auto prob = problem_from_string(str("problem"));
    if (!prob) throw UsageError(where + ": unknown problem");
    run.problem = *prob;
    run.input = resolve(str("input"));
    if (r.contains("second")) run.second = resolve(str("second"));
    const auto m = method_from_string(r.contains("method") ? str("method") : "exact");
    if (!m) throw UsageError(where + ": unknown method");
    run.method = *m;
    if (r.contains("seed")) {
      if (!r["seed"].is_number_unsigned()) throw UsageError(where + ": 'seed' must be a nonnegative integer");
      run.seed = r["seed"].get<std::uint64_t>();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto runs = read_manifest(a.suite);
  ojson rows = ojson::array();
  std::size_t feasible = 0, checked = 0, agreeing = 0;
  double gap_sum = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    ojson row;
    row["index"] = i;
    row["problem"] = permform::to_string(run.problem);
    row["input"] = std::filesystem::path(run.input).filename().string();
    row["method"] = to_string(run.method);
    row["seed"] = run.seed;
    try {
      std::optional<std::string> second;
      if (!run.second.empty()) second = run.second;
      const Instance inst = load_instance(run.problem, run.input, second);
      SolverOptions opt;
      opt.anneal.seed = run.seed;
      opt.relax.seed = run.seed;
      const auto start = std::chrono::steady_clock::now();
      std::optional<SolveOutcome> r;
      try {
        r = run_solver(run.problem, inst, run.method, opt);
      } catch (const InstanceTooLarge&) {
        row["error"] = "exact: out of range";
      }
      row["wall_time_ms"] = elapsed_ms(start);
      if (r) {
        row["objective"] = number_json(r->evaluation.objective);
        row["feasible"] = r->evaluation.feasible;
        feasible += r->evaluation.feasible;
      } else {
        row["objective"] = nullptr;
        row["feasible"] = false;
      }
      try {
        const auto o = brute_oracle(run.problem, inst);
        row["oracle"] = "ok";
        row["oracle_optimum"] = number_json(o.optimum);
        if (r) {
          const double gap = std::abs(r->evaluation.objective - o.optimum) / std::max(1.0, std::abs(o.optimum));
          // SAT and GI report infeasible candidates when the oracle optimum says so.
          const bool agree = gap <= 1e-9 && (r->evaluation.feasible || run.problem == Problem::sat ||
                                             run.problem == Problem::gi);
          row["gap"] = number_json(gap);
          row["agree"] = agree;
          ++checked;
          agreeing += agree;
          gap_sum += gap;
        }
      } catch (const InstanceTooLarge&) {
        row["oracle"] = "out of range";
      }
    } catch (const std::exception& e) {
      row["error"] = e.what();
    }
    rows.push_back(std::move(row));
  }
  ojson agg;
  agg["runs"] = runs.size();
  agg["feasible"] = feasible;
  agg["oracle_checked"] = checked;
  agg["oracle_agree"] = agreeing;
  agg["agreement_rate"] = checked ? number_json(static_cast<double>(agreeing) / static_cast<double>(checked)) : ojson(nullptr);
  agg["mean_gap"] = checked ? number_json(gap_sum / static_cast<double>(checked)) : ojson(nullptr);
  if (a.json) {
    ojson rep;
    rep["suite"] = std::filesystem::path(a.suite).filename().string();
    rep["rows"] = rows;
    rep["aggregate"] = agg;
    out << rep.dump(2) << '\n';
  } else {
    out << std::left << std::setw(4) << "#" << std::setw(10) << "problem" << std::setw(20) << "input"
        << std::setw(8) << "method" << std::setw(12) << "objective" << std::setw(10) << "feasible"
        << "oracle\n";
    for (const auto& row : rows) {
      const auto val = [&](const char* k) {
        if (!row.contains(k) || row[k].is_null()) return std::string("-");
        return row[k].is_string() ? row[k].get<std::string>() : row[k].dump();
      };
      std::string oracle = row.contains("oracle") && row["oracle"] == "out of range"
                               ? "oracle: out of range"
                               : val("oracle_optimum");
      if (row.contains("error")) oracle += " (" + row["error"].get<std::string>() + ")";
      out << std::setw(4) << val("index") << std::setw(10) << val("problem") << std::setw(20)
          << val("input") << std::setw(8) << val("method") << std::setw(12) << val("objective")
          << std::setw(10) << val("feasible") << oracle << '\n';
    }
    out << "runs " << runs.size() << ", feasible " << feasible << ", oracle agreement " << agreeing
        << "/" << checked << '\n';
  }
  (void)err;
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Permutation-matrix formulations of combinatorial problems", "permform"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve an instance and emit a run report");
  add_common(s, solve.common);
  s->add_option("--method", solve.method, "anneal | relax | exact")
      ->check(CLI::IsMember({"anneal", "relax", "exact"}));
  s->add_option("--seed", solve.seed, "Random seed");
  s->add_option("--out", solve.out, "Write the certificate to this file");
  s->add_option("--iterations", solve.opt.anneal.iterations, "Anneal: iterations per stage");
  s->add_option("--initial-temperature", solve.opt.anneal.initial_temperature, "Anneal: T0 (scaled by typical move size)");
  s->add_option("--cooling-rate", solve.opt.anneal.cooling_rate, "Anneal: geometric cooling factor");
  s->add_option("--restarts", solve.opt.anneal.restarts, "Anneal: independent restarts");
  s->add_option("--steps", solve.opt.relax.steps, "Relax: gradient steps per k");
  s->add_option("--learning-rate", solve.opt.relax.learning_rate, "Relax: step size");
  s->add_option("--sinkhorn-iters", solve.opt.relax.sinkhorn_iters, "Relax: Sinkhorn sweeps");
  s->add_option("--temperature", solve.opt.relax.temperature, "Relax: initial tau");
  s->add_option("--temperature-decay", solve.opt.relax.temperature_decay, "Relax: tau decay per step");
  s->add_option("--penalty", solve.opt.relax.penalty, "Relax: initial lambda");
  s->add_option("--penalty-growth", solve.opt.relax.penalty_growth, "Relax: lambda growth on infeasible rounding");
  s->add_option("--tolerance", solve.opt.relax.tolerance, "Relax: Sinkhorn residual tolerance");
  s->add_option("--round-every", solve.opt.relax.round_every, "Relax: rounding cadence");
  s->add_option("--polish-iterations", solve.opt.relax.polish_iterations, "Relax: anneal polish iterations (0 = off)");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Re-evaluate a certificate against an instance");
  add_common(v, verify.common);
  v->add_option("--certificate", verify.certificate, "Certificate JSON")->required();

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "Brute-force optimum of a small instance");
  add_common(o, oracle.common);
  o->add_flag("--formulation-search", oracle.formulation_search,
              "Also exhaust the permutation formulation and compare");

  EncodeArgs encode;
  auto* e = app.add_subcommand("encode", "Write the SAT graph encoding as JSON");
  add_common(e, encode.common);
  e->add_option("--out", encode.out, "Output file (default: stdout)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run a suite manifest and compare with oracles");
  b->add_option("--suite", bench.suite, "Suite manifest JSON")->required();
  auto* bj = b->add_flag("--json", bench.json, "JSON output");
  b->add_flag("--text", bench.text, "Table output (default)")->excludes(bj);

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  }

  try {
    if (*s) return cmd_solve(solve, out, err);
    if (*v) return cmd_verify(verify, out, err);
    if (*o) return cmd_oracle(oracle, out, err);
    if (*e) return cmd_encode(encode, out, err);
    if (*b) return cmd_bench(bench, out, err);
  } catch (const InstanceTooLarge& ex) {
    err << "error: " << ex.what() << '\n';
    return kOutOfRange;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace permform::cli

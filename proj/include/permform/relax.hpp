#pragma once

// Doubly-stochastic relaxation: the trace formulations evaluated at a
// Sinkhorn matrix S in place of P, optimized by mirror descent on logits and
// decoded by maximum-weight assignment plus a short annealing polish.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "permform/anneal.hpp"
#include "permform/core.hpp"
#include "permform/formulations.hpp"
#include "permform/matrix.hpp"
#include "permform/problem.hpp"
#include "permform/sinkhorn.hpp"

namespace permform {

class UnsupportedProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool relax_supported(Problem p) {
  return p != Problem::coloring && p != Problem::mds && p != Problem::sat;
}

struct RelaxParams {
  std::uint64_t seed = 0;
  std::size_t steps = 300;
  double learning_rate = 0.5;
  std::size_t sinkhorn_iters = 50;
  double temperature = 1.0;
  double temperature_decay = 0.995;
  double penalty = 1.0;
  double penalty_growth = 2.0;
  double tolerance = 1e-6;
  /// Rounding cadence (steps); a final rounding always happens.
  std::size_t round_every = 10;
  /// Annealing iterations for the polish pass; 0 disables it.
  std::size_t polish_iterations = 5000;

  void validate() const {
    if (steps < 1) throw std::invalid_argument("relax: steps must be >= 1");
    if (sinkhorn_iters < 1) throw std::invalid_argument("relax: sinkhorn_iters must be >= 1");
    if (round_every < 1) throw std::invalid_argument("relax: round_every must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("relax: learning rate must be positive");
    if (!(temperature > 0.0)) throw std::invalid_argument("relax: temperature must be positive");
    if (!(temperature_decay > 0.0 && temperature_decay <= 1.0))
      throw std::invalid_argument("relax: temperature decay must lie in (0, 1]");
    if (!(penalty >= 0.0)) throw std::invalid_argument("relax: penalty must be nonnegative");
    if (!(penalty_growth >= 1.0)) throw std::invalid_argument("relax: penalty growth must be >= 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("relax: tolerance must be positive");
  }
};

struct RelaxedValue {
  double value = 0.0;
  RealMatrix gradient;
};

namespace detail {

inline RealMatrix truncation_real(const TruncationSpec& spec, std::size_t n) {
  return truncation_matrix(spec, n).cast<double>();
}

/// f = Tr(S X S^T Y); df/dS = Y^T S X^T + Y S X.
inline RelaxedValue trace_form(const RealMatrix& s, const RealMatrix& x, const RealMatrix& y) {
  const RealMatrix sx = s * x;
  const RealMatrix sxst = sx * s.transpose();
  RelaxedValue out;
  out.value = trace_product(sxst, y);
  out.gradient = y.transpose() * s * x.transpose() + y * sx;
  return out;
}

inline std::size_t require_relax_k(Problem p, std::optional<std::size_t> k) {
  if (!k) throw std::invalid_argument(std::string(to_string(p)) + " relaxation needs k");
  return *k;
}

}  // namespace detail

/// Relaxed penalized objective (to be minimized) and its gradient in S. At a
/// permutation matrix the value equals penalized_objective of that candidate.
inline RelaxedValue relaxed_objective(Problem p, const Instance& inst, const RealMatrix& s,
                                      double lambda, std::optional<std::size_t> k = std::nullopt) {
  if (!relax_supported(p))
    throw UnsupportedProblem("no relaxation for problem '" + std::string(to_string(p)) + "'");
  const std::size_t n = permutation_size(inst);
  if (s.rows() != n || s.cols() != n)
    throw DimensionError("relaxed_objective: S is " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + ", instance needs " + std::to_string(n));
  switch (p) {
    case Problem::mis:
    case Problem::clique:
    case Problem::mvc: {
      const Graph& g = graph_of(inst, p);
      const std::size_t kk = detail::require_relax_k(p, k);
      const bool mvc = p == Problem::mvc;
      require_k(kk, mvc ? 0 : 1, n, "relaxed_objective");
      const IntMatrix rel = p == Problem::clique ? g.complement().adjacency() : g.adjacency();
      const TruncationSpec spec = mvc ? TruncationSpec::suffix(kk) : TruncationSpec::prefix(kk);
      auto t = detail::trace_form(s, rel.cast<double>(), detail::truncation_real(spec, n));
      RelaxedValue out;
      out.value = (mvc ? 1.0 : -1.0) * static_cast<double>(kk) + lambda * t.value;
      out.gradient = lambda * t.gradient;
      return out;
    }
    case Problem::maxcut: {
      const Graph& g = graph_of(inst, p);
      const std::size_t kk = detail::require_relax_k(p, k);
      if (n < 2) throw OutOfRange("relaxed_objective: Max-Cut needs at least 2 vertices");
      require_k(kk, 1, n - 1, "relaxed_objective");
      auto t = detail::trace_form(s, g.adjacency().cast<double>(),
                                  detail::truncation_real(TruncationSpec::cross(kk), n));
      return {-0.5 * t.value, -0.5 * t.gradient};
    }
    case Problem::tsp: {
      // Tr(S^T X S Y) with X = V^T, Y = cost; gradient X S Y + X^T S Y^T.
      const auto& inst_t = instance_as<TspInstance>(inst, p);
      if (n < 2) throw OutOfRange("relaxed_objective: TSP needs at least 2 cities");
      const RealMatrix v = cycle_shift_matrix(n).cast<double>();
      const RealMatrix x = v.transpose();
      const RealMatrix xs = x * s;
      RelaxedValue out;
      out.value = trace_product(s.transpose() * xs, inst_t.cost);
      out.gradient = xs * inst_t.cost + v * s * inst_t.cost.transpose();
      return out;
    }
    case Problem::qap: {
      const auto& q = instance_as<QapInstance>(inst, p);
      q.validate();
      return detail::trace_form(s, q.dist, q.flow);
    }
    case Problem::gi: {
      const auto& gp = instance_as<GraphPair>(inst, p);
      if (gp.first.size() != gp.second.size()) throw DimensionError("GI graphs differ in size");
      const RealMatrix a1 = gp.first.adjacency().cast<double>();
      const RealMatrix a2 = gp.second.adjacency().cast<double>();
      const RealMatrix sa1 = s * a1;
      const RealMatrix r = sa1 * s.transpose() - a2;
      RelaxedValue out;
      for (double e : r.data()) out.value += e * e;
      out.gradient = 2.0 * (r * s * a1.transpose() + r.transpose() * sa1);
      return out;
    }
    default: break;
  }
  throw std::logic_error("unreachable");
}

inline RelaxedValue relaxed_objective(Problem p, const Instance& inst, const DoublyStochastic& s,
                                      double lambda, std::optional<std::size_t> k = std::nullopt) {
  return relaxed_objective(p, inst, s.entries, lambda, k);
}

/// Trajectory of one relaxation run at a fixed k.
struct RelaxStage {
  std::optional<std::size_t> k;
  std::size_t steps = 0;
  double final_value = 0.0;
  double final_residual = 0.0;
  double final_penalty = 0.0;
  double final_temperature = 0.0;
  std::size_t roundings = 0;
  std::size_t feasible_roundings = 0;
};

struct RelaxSummary {
  std::vector<RelaxStage> stages;
  /// Evaluation of the best rounded candidate before polishing.
  std::optional<Evaluation> rounded;
  bool polished = false;
  bool polish_improved = false;
};

struct RelaxResult {
  CandidateSolution candidate;
  Evaluation evaluation;
  RelaxSummary summary;
};

namespace detail {

struct StageOutcome {
  RelaxStage stage;
  std::optional<CandidateSolution> best;
  Evaluation best_eval;
  RealMatrix logits;
};

inline bool relax_preferable(Problem p, const Evaluation& a, const Evaluation& b) {
  return preferable(p, a, b);
}

inline StageOutcome relax_stage(Problem p, const Instance& inst, const RelaxParams& params,
                                RealMatrix logits, std::optional<std::size_t> k) {
  const std::size_t n = logits.rows();
  StageOutcome out;
  out.stage.k = k;
  double tau = params.temperature;
  double lambda = params.penalty;
  DoublyStochastic s;
  const auto normalize = [&] {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logits.data()) mx = std::max(mx, v);
    RealMatrix e(n, n);
    for (std::size_t i = 0; i < n * n; ++i)
      e.data()[i] = std::exp(std::max((logits.data()[i] - mx) / tau, -50.0));
    s = sinkhorn_normalize(std::move(e), params.sinkhorn_iters, params.tolerance);
  };
  const auto round_and_score = [&] {
    CandidateSolution c;
    c.problem = p;
    c.pi = round_to_permutation(s);
    c.k = k;
    const Evaluation ev = evaluate(inst, c);
    ++out.stage.roundings;
    if (ev.feasible) ++out.stage.feasible_roundings;
    else lambda *= params.penalty_growth;
    if (!out.best || relax_preferable(p, ev, out.best_eval)) {
      out.best = c;
      out.best_eval = ev;
    }
  };
  for (std::size_t step = 0; step < params.steps; ++step) {
    normalize();
    const RelaxedValue rv = relaxed_objective(p, inst, s.entries, lambda, k);
    double gmax = 0.0;
    for (double g : rv.gradient.data()) gmax = std::max(gmax, std::abs(g));
    if (gmax > 0.0)
      for (std::size_t i = 0; i < n * n; ++i)
        logits.data()[i] -= params.learning_rate * rv.gradient.data()[i] / gmax;
    tau *= params.temperature_decay;
    out.stage.steps = step + 1;
    if ((step + 1) % params.round_every == 0) {
      normalize();
      round_and_score();
      if (p == Problem::gi && out.best_eval.feasible) break;
    }
  }
  normalize();
  round_and_score();
  out.stage.final_value = relaxed_objective(p, inst, s.entries, lambda, k).value;
  out.stage.final_residual = s.residual;
  out.stage.final_penalty = lambda;
  out.stage.final_temperature = tau;
  out.logits = std::move(logits);
  return out;
}

}  // namespace detail

/// Relaxation pipeline. Size problems run an outer loop over k (MIS/clique
/// grow from 1, MVC shrinks from n, Max-Cut uses k = floor(n/2)), warm
/// starting the logits; the best rounded candidate is then polished by
/// annealing from its order.
inline RelaxResult relax_solve(Problem p, const Instance& inst, const RelaxParams& params) {
  if (!relax_supported(p))
    throw UnsupportedProblem("relax does not support problem '" + std::string(to_string(p)) + "'");
  params.validate();
  const std::size_t n = permutation_size(inst);
  if (n == 0) throw OutOfRange("relax: empty instance");
  if ((p == Problem::tsp || p == Problem::maxcut) && n < 2)
    throw OutOfRange("relax: instance needs at least 2 elements");

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  RealMatrix logits(n, n);
  for (double& v : logits.data()) v = noise(rng);

  RelaxResult result;
  std::optional<CandidateSolution> best;
  Evaluation best_eval;
  const auto consider = [&](const detail::StageOutcome& o) {
    result.summary.stages.push_back(o.stage);
    if (o.best && (!best || detail::relax_preferable(p, o.best_eval, best_eval))) {
      best = o.best;
      best_eval = o.best_eval;
    }
  };

  switch (p) {
    case Problem::mis:
    case Problem::clique:
    case Problem::mvc: {
      const bool grow = p != Problem::mvc;
      std::size_t k = grow ? 1 : n;
      while (true) {
        auto o = detail::relax_stage(p, inst, params, logits, k);
        const bool ok = o.best_eval.feasible;
        logits = o.logits;
        consider(o);
        if (!ok) break;
        if (grow ? k == n : k == 0) break;
        k = grow ? k + 1 : k - 1;
      }
      break;
    }
    case Problem::maxcut:
      consider(detail::relax_stage(p, inst, params, logits, std::max<std::size_t>(1, n / 2)));
      break;
    default: consider(detail::relax_stage(p, inst, params, logits, std::nullopt)); break;
  }

  result.summary.rounded = best_eval;
  result.candidate = *best;
  result.evaluation = best_eval;
  if (params.polish_iterations > 0) {
    AnnealParams ap;
    ap.seed = params.seed;
    ap.iterations = params.polish_iterations;
    const auto polished = anneal_from(p, inst, ap, best->pi.zero_based());
    result.summary.polished = true;
    if (detail::relax_preferable(p, polished.evaluation, result.evaluation)) {
      result.candidate = polished.candidate;
      result.evaluation = polished.evaluation;
      result.summary.polish_improved = true;
    }
  }
  return result;
}

}  // namespace permform

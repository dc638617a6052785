#pragma once

// Simulated annealing over permutations.
//
// Every problem gets a model that keeps enough cached counts to price a move
// in O(n) or better. Size problems (MIS, clique, MVC, MDS, colouring) run an
// outer loop over k: start from a seeded greedy feasible solution, then grow
// k (maximization) or shrink it (minimization) one step at a time, warm
// starting from the previous permutation. A stage that fails to reach zero
// violation ends the search; the last feasible stage is returned.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "permform/core.hpp"
#include "permform/formulations.hpp"
#include "permform/problem.hpp"
#include "permform/sat.hpp"

namespace permform {

struct AnnealParams {
  std::uint64_t seed = 0;
  std::size_t iterations = 100000;
  double initial_temperature = 1.0;
  double cooling_rate = 0.9995;
  std::size_t restarts = 1;

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("anneal: iterations must be >= 1");
    if (restarts < 1) throw std::invalid_argument("anneal: restarts must be >= 1");
    if (!(initial_temperature > 0.0))
      throw std::invalid_argument("anneal: initial temperature must be positive");
    if (!(cooling_rate > 0.0 && cooling_rate < 1.0))
      throw std::invalid_argument("anneal: cooling rate must lie in (0, 1)");
  }
};

/// One annealing stage at a fixed k (or block count).
struct StageTrace {
  std::size_t k = 0;
  std::size_t iterations = 0;
  double final_energy = 0.0;
  /// Best energy after every improvement; non-increasing.
  std::vector<double> best_energy;
};

struct AnnealResult {
  CandidateSolution candidate;
  Evaluation evaluation;
  std::size_t best_restart = 0;
  /// Stages of the winning restart.
  std::vector<StageTrace> stages;
  std::size_t total_iterations = 0;
};

/// Mutable search state shared by every model: order[i] is the 0-based
/// vertex at position i.
struct AnnealState {
  std::vector<std::size_t> order;
  std::size_t k = 0;
  std::vector<std::size_t> blocks;
};

namespace detail {

using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

struct Move {
  int kind = 0;  // model specific
  std::size_t a = 0;
  std::size_t b = 0;
};

inline std::vector<std::vector<std::size_t>> adjacency_lists(const IntMatrix& a) {
  std::vector<std::vector<std::size_t>> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j)) out[i].push_back(j);
  return out;
}

// ---------------------------------------------------------------------------
// Pairs inside a selected side (MIS: edges in the prefix, clique: non-edges
// in the prefix, MVC: edges in the suffix). Energy = 2 x pairs.

class PairsModel {
 public:
  PairsModel(IntMatrix relation, bool select_suffix)
      : rel_(std::move(relation)), suffix_(select_suffix), n_(rel_.rows()) {}

  void load(const AnnealState& s) {
    st_ = s;
    selected_.assign(n_, false);
    for (std::size_t i = 0; i < n_; ++i)
      selected_[st_.order[i]] = suffix_ ? i >= st_.k : i < st_.k;
    cnt_.assign(n_, 0);
    pairs_ = 0;
    for (std::size_t v = 0; v < n_; ++v)
      for (std::size_t w = 0; w < n_; ++w)
        if (selected_[w]) cnt_[v] += rel_(v, w);
    for (std::size_t v = 0; v < n_; ++v)
      if (selected_[v]) pairs_ += cnt_[v];
    pairs_ /= 2;
  }

  const AnnealState& state() const { return st_; }
  double energy() const { return 2.0 * static_cast<double>(pairs_); }

  std::optional<Move> propose(Rng& rng) const {
    if (st_.k == 0 || st_.k >= n_) return std::nullopt;
    return Move{0, uniform_index(rng, st_.k), st_.k + uniform_index(rng, n_ - st_.k)};
  }

  double delta(const Move& m) const {
    const auto [out, in] = endpoints(m);
    return 2.0 * static_cast<double>(cnt_[in] - cnt_[out] - rel_(out, in));
  }

  void apply(const Move& m) {
    const auto [out, in] = endpoints(m);
    pairs_ += cnt_[in] - cnt_[out] - rel_(out, in);
    selected_[out] = false;
    selected_[in] = true;
    for (std::size_t w = 0; w < n_; ++w) cnt_[w] += rel_(w, in) - rel_(w, out);
    std::swap(st_.order[m.a], st_.order[m.b]);
  }

 private:
  // Vertex leaving and vertex entering the selected side.
  std::pair<std::size_t, std::size_t> endpoints(const Move& m) const {
    const std::size_t u = st_.order[m.a], v = st_.order[m.b];
    return suffix_ ? std::pair{v, u} : std::pair{u, v};
  }

  IntMatrix rel_;
  bool suffix_;
  std::size_t n_;
  AnnealState st_;
  std::vector<bool> selected_;
  std::vector<std::int64_t> cnt_;
  std::int64_t pairs_ = 0;
};

// ---------------------------------------------------------------------------
// Dominating set: energy = vertices with no closed neighbour in the prefix.

class DominationModel {
 public:
  explicit DominationModel(const Graph& g) : n_(g.size()), closed_(adjacency_lists(g.adjacency())) {
    for (std::size_t v = 0; v < n_; ++v) closed_[v].push_back(v);
  }

  void load(const AnnealState& s) {
    st_ = s;
    cov_.assign(n_, 0);
    for (std::size_t i = 0; i < st_.k; ++i)
      for (std::size_t w : closed_[st_.order[i]]) ++cov_[w];
    uncovered_ = std::count(cov_.begin(), cov_.end(), 0);
    mark_.assign(n_, false);
  }

  const AnnealState& state() const { return st_; }
  double energy() const { return static_cast<double>(uncovered_); }

  std::optional<Move> propose(Rng& rng) const {
    if (st_.k == 0 || st_.k >= n_) return std::nullopt;
    return Move{0, uniform_index(rng, st_.k), st_.k + uniform_index(rng, n_ - st_.k)};
  }

  double delta(const Move& m) const {
    auto& self = const_cast<DominationModel&>(*this);
    return static_cast<double>(self.shift(st_.order[m.a], st_.order[m.b], false));
  }

  void apply(const Move& m) {
    uncovered_ += shift(st_.order[m.a], st_.order[m.b], true);
    std::swap(st_.order[m.a], st_.order[m.b]);
  }

 private:
  // Change in uncovered count when `out` leaves and `in` joins the prefix.
  std::ptrdiff_t shift(std::size_t out, std::size_t in, bool keep) {
    touched_.clear();
    for (std::size_t w : closed_[out]) touch(w);
    for (std::size_t w : closed_[in]) touch(w);
    std::ptrdiff_t before = 0, after = 0;
    for (std::size_t w : touched_) before += cov_[w] == 0;
    for (std::size_t w : closed_[out]) --cov_[w];
    for (std::size_t w : closed_[in]) ++cov_[w];
    for (std::size_t w : touched_) after += cov_[w] == 0;
    if (!keep) {
      for (std::size_t w : closed_[in]) --cov_[w];
      for (std::size_t w : closed_[out]) ++cov_[w];
    }
    for (std::size_t w : touched_) mark_[w] = false;
    return after - before;
  }

  void touch(std::size_t w) {
    if (!mark_[w]) {
      mark_[w] = true;
      touched_.push_back(w);
    }
  }

  std::size_t n_;
  std::vector<std::vector<std::size_t>> closed_;
  AnnealState st_;
  std::vector<std::int64_t> cov_;
  std::ptrdiff_t uncovered_ = 0;
  std::vector<bool> mark_;
  std::vector<std::size_t> touched_;
};

// ---------------------------------------------------------------------------
// Colouring: energy = 2 x monochromatic edges. Moves swap two positions of
// different colours or shift one slot across a block boundary.

class ColoringModel {
 public:
  explicit ColoringModel(const Graph& g)
      : n_(g.size()), adj_(g.adjacency()), nbrs_(adjacency_lists(g.adjacency())) {}

  void load(const AnnealState& s) {
    st_ = s;
    k_ = st_.blocks.size();
    colour_.assign(n_, 0);
    pos_colour_ = block_labels(st_.blocks);
    for (std::size_t i = 0; i < n_; ++i) colour_[st_.order[i]] = pos_colour_[i];
    cnt_.assign(n_ * k_, 0);
    mono_ = 0;
    for (std::size_t v = 0; v < n_; ++v)
      for (std::size_t w : nbrs_[v]) {
        ++cnt_[v * k_ + colour_[w]];
        if (colour_[w] == colour_[v]) ++mono_;
      }
    mono_ /= 2;
  }

  const AnnealState& state() const { return st_; }
  double energy() const { return 2.0 * static_cast<double>(mono_); }

  std::optional<Move> propose(Rng& rng) const {
    if (k_ < 2) return std::nullopt;
    if (uniform01(rng) < 0.8) {
      for (int tries = 0; tries < 8; ++tries) {
        const std::size_t a = uniform_index(rng, n_), b = uniform_index(rng, n_);
        if (pos_colour_[a] != pos_colour_[b]) return Move{0, a, b};
      }
      return std::nullopt;
    }
    // Boundary between blocks c and c+1; kind 1 grows block c+1, kind 2 grows c.
    const std::size_t c = uniform_index(rng, k_ - 1);
    const int kind = uniform01(rng) < 0.5 ? 1 : 2;
    if (kind == 1 && st_.blocks[c] < 2) return std::nullopt;
    if (kind == 2 && st_.blocks[c + 1] < 2) return std::nullopt;
    return Move{kind, c, 0};
  }

  double delta(const Move& m) const {
    if (m.kind == 0) {
      const std::size_t u = st_.order[m.a], v = st_.order[m.b];
      const std::size_t cu = colour_[u], cv = colour_[v];
      const std::int64_t e = adj_(u, v);
      return 2.0 * static_cast<double>((cnt_[u * k_ + cv] - e) - cnt_[u * k_ + cu] +
                                       (cnt_[v * k_ + cu] - e) - cnt_[v * k_ + cv]);
    }
    const auto [w, from, to] = boundary_target(m);
    return 2.0 * static_cast<double>(cnt_[w * k_ + to] - cnt_[w * k_ + from]);
  }

  void apply(const Move& m) {
    const double d = delta(m);
    mono_ += static_cast<std::int64_t>(std::llround(d / 2.0));
    if (m.kind == 0) {
      const std::size_t u = st_.order[m.a], v = st_.order[m.b];
      const std::size_t cu = colour_[u], cv = colour_[v];
      recolour(u, cu, cv);
      recolour(v, cv, cu);
      std::swap(st_.order[m.a], st_.order[m.b]);
      return;
    }
    const auto [w, from, to] = boundary_target(m);
    recolour(w, from, to);
    const std::size_t c = m.a;
    if (m.kind == 1) {
      --st_.blocks[c];
      ++st_.blocks[c + 1];
    } else {
      ++st_.blocks[c];
      --st_.blocks[c + 1];
    }
    pos_colour_ = block_labels(st_.blocks);
  }

 private:
  struct Recolour {
    std::size_t vertex, from, to;
  };

  Recolour boundary_target(const Move& m) const {
    const std::size_t c = m.a;
    std::size_t end_c = 0;
    for (std::size_t b = 0; b <= c; ++b) end_c += st_.blocks[b];
    if (m.kind == 1) return {st_.order[end_c - 1], c, c + 1};
    return {st_.order[end_c], c + 1, c};
  }

  void recolour(std::size_t v, std::size_t from, std::size_t to) {
    colour_[v] = to;
    for (std::size_t w : nbrs_[v]) {
      --cnt_[w * k_ + from];
      ++cnt_[w * k_ + to];
    }
  }

  std::size_t n_;
  IntMatrix adj_;
  std::vector<std::vector<std::size_t>> nbrs_;
  AnnealState st_;
  std::size_t k_ = 0;
  std::vector<std::size_t> colour_;
  std::vector<std::size_t> pos_colour_;
  std::vector<std::int64_t> cnt_;
  std::int64_t mono_ = 0;
};

// ---------------------------------------------------------------------------
// Max-Cut: energy = -cut. Moves swap across the boundary or shift k by one.

class MaxCutModel {
 public:
  explicit MaxCutModel(const Graph& g) : n_(g.size()), adj_(g.adjacency()) {
    deg_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) deg_[v] = static_cast<std::int64_t>(g.degree(v));
  }

  void load(const AnnealState& s) {
    st_ = s;
    in_s_.assign(n_, false);
    for (std::size_t i = 0; i < st_.k; ++i) in_s_[st_.order[i]] = true;
    ds_.assign(n_, 0);
    cut_ = 0;
    for (std::size_t v = 0; v < n_; ++v)
      for (std::size_t w = 0; w < n_; ++w)
        if (in_s_[w]) ds_[v] += adj_(v, w);
    for (std::size_t v = 0; v < n_; ++v)
      if (in_s_[v]) cut_ += deg_[v] - ds_[v];
  }

  const AnnealState& state() const { return st_; }
  double energy() const { return -static_cast<double>(cut_); }

  std::optional<Move> propose(Rng& rng) const {
    if (n_ < 2) return std::nullopt;
    if (uniform01(rng) < 0.8)
      return Move{0, uniform_index(rng, st_.k), st_.k + uniform_index(rng, n_ - st_.k)};
    if (uniform01(rng) < 0.5) {
      if (st_.k + 1 >= n_) return std::nullopt;
      return Move{1, st_.k, 0};
    }
    if (st_.k <= 1) return std::nullopt;
    return Move{2, st_.k - 1, 0};
  }

  double delta(const Move& m) const { return -static_cast<double>(cut_change(m)); }

  void apply(const Move& m) {
    cut_ += cut_change(m);
    if (m.kind == 0) {
      flip(st_.order[m.a]);
      flip(st_.order[m.b]);
      std::swap(st_.order[m.a], st_.order[m.b]);
    } else if (m.kind == 1) {
      flip(st_.order[m.a]);
      ++st_.k;
    } else {
      flip(st_.order[m.a]);
      --st_.k;
    }
  }

 private:
  std::int64_t cut_change(const Move& m) const {
    if (m.kind == 0) {
      const std::size_t u = st_.order[m.a], v = st_.order[m.b];
      const std::int64_t first = 2 * ds_[u] - deg_[u];
      const std::int64_t dsv = ds_[v] - adj_(u, v);
      return first + deg_[v] - 2 * dsv;
    }
    const std::size_t x = st_.order[m.a];
    return in_s_[x] ? 2 * ds_[x] - deg_[x] : deg_[x] - 2 * ds_[x];
  }

  void flip(std::size_t x) {
    const std::int64_t sign = in_s_[x] ? -1 : 1;
    in_s_[x] = !in_s_[x];
    for (std::size_t w = 0; w < n_; ++w) ds_[w] += sign * adj_(w, x);
  }

  std::size_t n_;
  IntMatrix adj_;
  std::vector<std::int64_t> deg_;
  AnnealState st_;
  std::vector<bool> in_s_;
  std::vector<std::int64_t> ds_;
  std::int64_t cut_ = 0;
};

// ---------------------------------------------------------------------------
// TSP: position swaps and segment reversals.

class TspModel {
 public:
  explicit TspModel(const TspInstance& inst)
      : n_(inst.size()), cost_(inst.cost), symmetric_(inst.cost.is_symmetric()) {}

  void load(const AnnealState& s) {
    st_ = s;
    length_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) length_ += edge(i);
  }

  const AnnealState& state() const { return st_; }
  double energy() const { return length_; }

  std::optional<Move> propose(Rng& rng) const {
    if (n_ < 3) return std::nullopt;
    std::size_t a = uniform_index(rng, n_), b = uniform_index(rng, n_);
    if (a == b) return std::nullopt;
    if (a > b) std::swap(a, b);
    if (uniform01(rng) < 0.5) return Move{0, a, b};
    if (b - a + 1 >= n_) return std::nullopt;
    return Move{1, a, b};
  }

  double delta(const Move& m) const {
    if (m.kind == 0) {
      auto& o = const_cast<std::vector<std::size_t>&>(st_.order);
      const auto edges = swap_edges(m.a, m.b);
      double before = 0.0, after = 0.0;
      for (std::size_t e : edges) before += edge(e);
      std::swap(o[m.a], o[m.b]);
      for (std::size_t e : edges) after += edge(e);
      std::swap(o[m.a], o[m.b]);
      return after - before;
    }
    const auto& o = st_.order;
    const std::size_t prev = (m.a + n_ - 1) % n_, next = (m.b + 1) % n_;
    double before = cost_(o[prev], o[m.a]) + cost_(o[m.b], o[next]);
    double after = cost_(o[prev], o[m.b]) + cost_(o[m.a], o[next]);
    if (!symmetric_)
      for (std::size_t i = m.a; i < m.b; ++i) {
        before += cost_(o[i], o[i + 1]);
        after += cost_(o[i + 1], o[i]);
      }
    return after - before;
  }

  void apply(const Move& m) {
    length_ += delta(m);
    if (m.kind == 0)
      std::swap(st_.order[m.a], st_.order[m.b]);
    else
      std::reverse(st_.order.begin() + static_cast<std::ptrdiff_t>(m.a),
                   st_.order.begin() + static_cast<std::ptrdiff_t>(m.b) + 1);
  }

 private:
  double edge(std::size_t i) const { return cost_(st_.order[i], st_.order[(i + 1) % n_]); }

  std::vector<std::size_t> swap_edges(std::size_t a, std::size_t b) const {
    std::vector<std::size_t> e = {(a + n_ - 1) % n_, a, (b + n_ - 1) % n_, b};
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
  }

  std::size_t n_;
  RealMatrix cost_;
  bool symmetric_;
  AnnealState st_;
  double length_ = 0.0;
};

// ---------------------------------------------------------------------------
// Quadratic objectives sum_ij term(i, j) over position pairs (QAP, GI): a
// swap of positions a and b only touches rows and columns a and b.

template <typename Term>
class QuadraticSwapModel {
 public:
  QuadraticSwapModel(std::size_t n, Term term) : n_(n), term_(std::move(term)) {}

  void load(const AnnealState& s) {
    st_ = s;
    value_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) value_ += term_(st_.order, i, j);
  }

  const AnnealState& state() const { return st_; }
  double energy() const { return value_; }

  std::optional<Move> propose(Rng& rng) const {
    if (n_ < 2) return std::nullopt;
    const std::size_t a = uniform_index(rng, n_), b = uniform_index(rng, n_);
    if (a == b) return std::nullopt;
    return Move{0, a, b};
  }

  double delta(const Move& m) const {
    auto& o = const_cast<std::vector<std::size_t>&>(st_.order);
    const double before = touched(m.a, m.b);
    std::swap(o[m.a], o[m.b]);
    const double after = touched(m.a, m.b);
    std::swap(o[m.a], o[m.b]);
    return after - before;
  }

  void apply(const Move& m) {
    value_ += delta(m);
    std::swap(st_.order[m.a], st_.order[m.b]);
  }

 private:
  double touched(std::size_t a, std::size_t b) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += term_(st_.order, a, j) + term_(st_.order, b, j);
    for (std::size_t i = 0; i < n_; ++i)
      if (i != a && i != b) s += term_(st_.order, i, a) + term_(st_.order, i, b);
    return s;
  }

  std::size_t n_;
  Term term_;
  AnnealState st_;
  double value_ = 0.0;
};

// ---------------------------------------------------------------------------
// SAT: the first n literal positions are the true literals; the clause block
// never moves. Energy = complementarity trace + unsatisfied clauses.

class SatModel {
 public:
  explicit SatModel(const SatInstance& inst) : n_(inst.num_vars), occ_(2 * inst.num_vars) {
    m_ = inst.clauses.size();
    for (std::size_t c = 0; c < m_; ++c)
      for (int lit : inst.clauses[c]) occ_[literal_vertex(lit)].push_back(c);
  }

  void load(const AnnealState& s) {
    st_ = s;
    in_prefix_.assign(2 * n_, false);
    for (std::size_t i = 0; i < n_; ++i) in_prefix_[st_.order[i]] = true;
    conflicts_ = 0;
    for (std::size_t v = 0; v < n_; ++v) conflicts_ += in_prefix_[2 * v] && in_prefix_[2 * v + 1];
    true_count_.assign(m_, 0);
    for (std::size_t lit = 0; lit < 2 * n_; ++lit)
      if (in_prefix_[lit])
        for (std::size_t c : occ_[lit]) ++true_count_[c];
    unsat_ = std::count(true_count_.begin(), true_count_.end(), 0);
  }

  const AnnealState& state() const { return st_; }
  double energy() const { return static_cast<double>(2 * conflicts_ + unsat_); }

  std::optional<Move> propose(Rng& rng) const {
    if (n_ == 0) return std::nullopt;
    return Move{0, uniform_index(rng, n_), n_ + uniform_index(rng, n_)};
  }

  double delta(const Move& m) const {
    auto& self = const_cast<SatModel&>(*this);
    const auto [dc, du] = self.change(st_.order[m.a], st_.order[m.b], false);
    return static_cast<double>(2 * dc + du);
  }

  void apply(const Move& m) {
    const auto [dc, du] = change(st_.order[m.a], st_.order[m.b], true);
    conflicts_ += dc;
    unsat_ += du;
    std::swap(st_.order[m.a], st_.order[m.b]);
  }

 private:
  static std::size_t complement(std::size_t lit) { return lit ^ 1; }

  std::pair<std::ptrdiff_t, std::ptrdiff_t> change(std::size_t out, std::size_t in, bool keep) {
    std::ptrdiff_t dc = 0;
    if (in_prefix_[complement(out)]) --dc;
    if (complement(in) != out && in_prefix_[complement(in)]) ++dc;
    std::ptrdiff_t du = 0;
    for (std::size_t c : occ_[out])
      if (--true_count_[c] == 0) ++du;
    for (std::size_t c : occ_[in])
      if (true_count_[c]++ == 0) --du;
    if (keep) {
      in_prefix_[out] = false;
      in_prefix_[in] = true;
    } else {
      for (std::size_t c : occ_[in]) --true_count_[c];
      for (std::size_t c : occ_[out]) ++true_count_[c];
    }
    return {dc, du};
  }

  std::size_t n_;
  std::size_t m_ = 0;
  std::vector<std::vector<std::size_t>> occ_;
  AnnealState st_;
  std::vector<bool> in_prefix_;
  std::vector<std::int64_t> true_count_;
  std::ptrdiff_t conflicts_ = 0;
  std::ptrdiff_t unsat_ = 0;
};

// ---------------------------------------------------------------------------
// Metropolis stage

template <typename Model>
StageTrace run_stage(Model& model, Rng& rng, const AnnealParams& p, std::optional<double> target) {
  StageTrace trace;
  trace.k = model.state().k;
  double e = model.energy();
  double best_e = e;
  AnnealState best = model.state();
  trace.best_energy.push_back(best_e);
  const auto reached = [&](double v) { return target && v <= *target + 1e-9; };
  if (!reached(e)) {
    // Scale the temperature to the typical move size so T0 is unit-free.
    double scale = 0.0;
    int seen = 0;
    for (int probe = 0; probe < 64; ++probe)
      if (auto mv = model.propose(rng)) {
        const double d = std::abs(model.delta(*mv));
        if (d > 0.0) {
          scale += d;
          ++seen;
        }
      }
    double temperature = p.initial_temperature * (seen ? scale / seen : 1.0);
    for (std::size_t it = 0; it < p.iterations; ++it) {
      ++trace.iterations;
      if (auto mv = model.propose(rng)) {
        const double d = model.delta(*mv);
        if (d <= 0.0 || uniform01(rng) < std::exp(-d / temperature)) {
          model.apply(*mv);
          e += d;
          if (e < best_e - 1e-9) {
            best_e = e;
            best = model.state();
            trace.best_energy.push_back(best_e);
            if (reached(best_e)) break;
          }
        }
      }
      temperature *= p.cooling_rate;
    }
  }
  model.load(best);
  trace.final_energy = model.energy();
  return trace;
}

// ---------------------------------------------------------------------------
// Greedy seeds and warm starts

inline std::vector<std::size_t> shuffled_vertices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

inline std::vector<std::size_t> by_degree(const Graph& g, Rng& rng, bool descending) {
  auto v = shuffled_vertices(g.size(), rng);
  std::stable_sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
    return descending ? g.degree(a) > g.degree(b) : g.degree(a) < g.degree(b);
  });
  return v;
}

inline AnnealState members_first(std::size_t n, const std::vector<std::size_t>& members) {
  AnnealState s;
  std::vector<bool> in(n, false);
  for (std::size_t v : members) {
    in[v] = true;
    s.order.push_back(v);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (!in[v]) s.order.push_back(v);
  s.k = members.size();
  return s;
}

/// Greedy maximal independent set of the relation graph (edges = rel != 0).
inline std::vector<std::size_t> greedy_independent(const IntMatrix& rel,
                                                    const std::vector<std::size_t>& order) {
  std::vector<std::size_t> set;
  for (std::size_t v : order) {
    bool ok = true;
    for (std::size_t w : set)
      if (rel(v, w)) {
        ok = false;
        break;
      }
    if (ok) set.push_back(v);
  }
  return set;
}

inline std::vector<std::size_t> greedy_dominating(const Graph& g, Rng& rng) {
  const std::size_t n = g.size();
  std::vector<bool> covered(n, false);
  std::size_t left = n;
  std::vector<std::size_t> chosen;
  const auto order = shuffled_vertices(n, rng);
  while (left > 0) {
    std::size_t best = order.front(), best_gain = 0;
    for (std::size_t v : order) {
      std::size_t gain = covered[v] ? 0 : 1;
      for (std::size_t w = 0; w < n; ++w) gain += g.has_edge(v, w) && !covered[w];
      if (gain > best_gain) {
        best_gain = gain;
        best = v;
      }
    }
    chosen.push_back(best);
    if (!covered[best]) --left, covered[best] = true;
    for (std::size_t w = 0; w < n; ++w)
      if (g.has_edge(best, w) && !covered[w]) --left, covered[w] = true;
  }
  return chosen;
}

/// Splits an order into maximal conflict-free consecutive blocks.
inline std::vector<std::size_t> greedy_blocks(const Graph& g, const std::vector<std::size_t>& order) {
  std::vector<std::size_t> blocks;
  std::size_t start = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    bool clash = false;
    for (std::size_t j = start; j < i && !clash; ++j) clash = g.has_edge(order[i], order[j]);
    if (clash || i == 0) {
      if (i > 0) blocks.push_back(i - start);
      start = i;
    }
  }
  if (!order.empty()) blocks.push_back(order.size() - start);
  return blocks;
}

inline AnnealState greedy_coloring(const Graph& g, Rng& rng) {
  const std::size_t n = g.size();
  const auto order = by_degree(g, rng, true);
  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t v : order) {
    bool placed = false;
    for (auto& cls : classes) {
      bool ok = true;
      for (std::size_t w : cls)
        if (g.has_edge(v, w)) {
          ok = false;
          break;
        }
      if (ok) {
        cls.push_back(v);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({v});
  }
  AnnealState s;
  for (const auto& cls : classes) {
    s.order.insert(s.order.end(), cls.begin(), cls.end());
    s.blocks.push_back(cls.size());
  }
  s.k = classes.size();
  (void)n;
  return s;
}

inline IntMatrix non_edges(const Graph& g) { return g.complement().adjacency(); }

}  // namespace detail

namespace detail {

inline bool prefix_independent(const IntMatrix& rel, const std::vector<std::size_t>& order,
                               std::size_t k) {
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (rel(order[i], order[j])) return false;
  return true;
}

/// The best feasible k for a fixed order (and blocks for colouring).
inline AnnealState warm_state(Problem p, const Instance& inst, std::vector<std::size_t> order) {
  AnnealState s;
  s.order = std::move(order);
  const std::size_t n = s.order.size();
  switch (p) {
    case Problem::mis:
    case Problem::clique: {
      const Graph& g = graph_of(inst, p);
      const IntMatrix rel = p == Problem::mis ? g.adjacency() : non_edges(g);
      std::size_t k = 1;
      while (k < n && prefix_independent(rel, s.order, k + 1)) ++k;
      s.k = k;
      break;
    }
    case Problem::mvc: {
      const Graph& g = graph_of(inst, p);
      std::size_t k = n;
      // Shrink while the suffix stays edge-free.
      while (k > 0) {
        bool ok = true;
        const std::size_t v = s.order[k - 1];
        for (std::size_t j = k; j < n && ok; ++j) ok = !g.has_edge(v, s.order[j]);
        if (!ok) break;
        --k;
      }
      s.k = k;
      break;
    }
    case Problem::mds: {
      const Graph& g = graph_of(inst, p);
      const auto pi = Permutation::from_zero_based(s.order);
      std::size_t k = 1;
      while (k < n && mds_uncovered(g, pi, k) != 0) ++k;
      s.k = k;
      break;
    }
    case Problem::maxcut: {
      const Graph& g = graph_of(inst, p);
      const auto pi = Permutation::from_zero_based(s.order);
      std::size_t best_k = 1;
      std::int64_t best = -1;
      for (std::size_t k = 1; k < n; ++k) {
        const auto cut = maxcut_value(g, pi, k);
        if (cut > best) best = cut, best_k = k;
      }
      s.k = best_k;
      break;
    }
    case Problem::coloring:
      s.blocks = greedy_blocks(graph_of(inst, p), s.order);
      s.k = s.blocks.size();
      break;
    default: break;
  }
  return s;
}

inline CandidateSolution to_candidate(Problem p, const AnnealState& s) {
  CandidateSolution c;
  c.problem = p;
  c.pi = Permutation::from_zero_based(s.order);
  if (uses_k(p)) c.k = s.k;
  if (p == Problem::coloring) c.blocks = s.blocks;
  return c;
}

inline std::vector<std::size_t> nearest_neighbour_tour(const TspInstance& inst, Rng& rng) {
  const std::size_t n = inst.size();
  std::vector<bool> used(n, false);
  std::vector<std::size_t> tour;
  std::size_t cur = uniform_index(rng, n);
  for (std::size_t step = 0; step < n; ++step) {
    tour.push_back(cur);
    used[cur] = true;
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j] && (next == n || inst.cost(cur, j) < inst.cost(cur, next))) next = j;
    if (next == n) break;
    cur = next;
  }
  return tour;
}

struct RestartOutcome {
  AnnealState best;
  bool found = false;
  std::vector<StageTrace> stages;
  std::size_t iterations = 0;
};

/// k-search driver: `model` prices states, `feasible_energy` is 0.
template <typename Model>
RestartOutcome staged_search(Model& model, AnnealState start, Rng& rng, const AnnealParams& p,
                             bool grow, std::size_t k_limit) {
  RestartOutcome out;
  model.load(start);
  auto first = run_stage(model, rng, p, 0.0);
  out.iterations += first.iterations;
  out.stages.push_back(first);
  if (model.energy() > 1e-9) {
    // Infeasible warm start: keep shrinking (max problems) / growing (min
    // problems) k until feasible.
    AnnealState s = model.state();
    while (model.energy() > 1e-9) {
      if (grow ? s.k <= 1 : s.k >= k_limit) break;
      s.k = grow ? s.k - 1 : s.k + 1;
      model.load(s);
      auto st = run_stage(model, rng, p, 0.0);
      out.iterations += st.iterations;
      out.stages.push_back(st);
      s = model.state();
    }
    if (model.energy() > 1e-9) {
      out.best = model.state();
      return out;
    }
  }
  out.best = model.state();
  out.found = true;
  while (grow ? out.best.k < k_limit : out.best.k > k_limit) {
    AnnealState s = out.best;
    s.k = grow ? s.k + 1 : s.k - 1;
    model.load(s);
    auto st = run_stage(model, rng, p, 0.0);
    out.iterations += st.iterations;
    out.stages.push_back(st);
    if (model.energy() > 1e-9) break;
    out.best = model.state();
  }
  return out;
}

/// Dissolves the smallest colour class into its neighbour block.
inline AnnealState merge_smallest_block(const AnnealState& s) {
  const auto it = std::min_element(s.blocks.begin(), s.blocks.end());
  const std::size_t b = static_cast<std::size_t>(it - s.blocks.begin());
  std::size_t start = 0;
  for (std::size_t i = 0; i < b; ++i) start += s.blocks[i];
  AnnealState out;
  for (std::size_t i = 0; i < s.order.size(); ++i)
    if (i < start || i >= start + s.blocks[b]) out.order.push_back(s.order[i]);
  for (std::size_t i = start; i < start + s.blocks[b]; ++i) out.order.push_back(s.order[i]);
  for (std::size_t i = 0; i < s.blocks.size(); ++i)
    if (i != b) out.blocks.push_back(s.blocks[i]);
  out.blocks.back() += s.blocks[b];
  out.k = out.blocks.size();
  return out;
}

inline RestartOutcome coloring_search(const Graph& g, AnnealState start, Rng& rng,
                                      const AnnealParams& p) {
  RestartOutcome out;
  ColoringModel model(g);
  model.load(start);
  auto first = run_stage(model, rng, p, 0.0);
  out.iterations += first.iterations;
  out.stages.push_back(first);
  if (model.energy() > 1e-9) {
    out.best = model.state();
    return out;
  }
  out.best = model.state();
  out.found = true;
  while (out.best.blocks.size() > 1) {
    model.load(merge_smallest_block(out.best));
    auto st = run_stage(model, rng, p, 0.0);
    out.iterations += st.iterations;
    out.stages.push_back(st);
    if (model.energy() > 1e-9) break;
    out.best = model.state();
  }
  return out;
}

inline RestartOutcome single_stage(auto& model, AnnealState start, Rng& rng, const AnnealParams& p,
                                   std::optional<double> target) {
  RestartOutcome out;
  model.load(start);
  auto st = run_stage(model, rng, p, target);
  out.iterations = st.iterations;
  out.stages.push_back(st);
  out.best = model.state();
  out.found = true;
  return out;
}

inline RestartOutcome anneal_restart(Problem p, const Instance& inst, const AnnealParams& params,
                                     Rng& rng, const std::optional<std::vector<std::size_t>>& warm) {
  const std::size_t n = permutation_size(inst);
  switch (p) {
    case Problem::mis:
    case Problem::clique: {
      const Graph& g = graph_of(inst, p);
      IntMatrix rel = p == Problem::mis ? g.adjacency() : non_edges(g);
      AnnealState start =
          warm ? warm_state(p, inst, *warm)
               : members_first(n, greedy_independent(rel, by_degree(g, rng, p == Problem::clique)));
      PairsModel model(std::move(rel), false);
      return staged_search(model, std::move(start), rng, params, true, n);
    }
    case Problem::mvc: {
      const Graph& g = graph_of(inst, p);
      AnnealState start;
      if (warm) {
        start = warm_state(p, inst, *warm);
      } else {
        // Cover = complement of a greedy independent set.
        const auto indep = greedy_independent(g.adjacency(), by_degree(g, rng, false));
        std::vector<bool> in(n, false);
        for (std::size_t v : indep) in[v] = true;
        std::vector<std::size_t> cover;
        for (std::size_t v = 0; v < n; ++v)
          if (!in[v]) cover.push_back(v);
        start = members_first(n, cover);
      }
      PairsModel model(g.adjacency(), true);
      return staged_search(model, std::move(start), rng, params, false, 0);
    }
    case Problem::mds: {
      const Graph& g = graph_of(inst, p);
      AnnealState start = warm ? warm_state(p, inst, *warm) : members_first(n, greedy_dominating(g, rng));
      DominationModel model(g);
      return staged_search(model, std::move(start), rng, params, false, 1);
    }
    case Problem::coloring: {
      const Graph& g = graph_of(inst, p);
      AnnealState start = warm ? warm_state(p, inst, *warm) : greedy_coloring(g, rng);
      return coloring_search(g, std::move(start), rng, params);
    }
    case Problem::maxcut: {
      const Graph& g = graph_of(inst, p);
      AnnealState start;
      if (warm) {
        start = warm_state(p, inst, *warm);
      } else {
        start.order = shuffled_vertices(n, rng);
        start.k = std::max<std::size_t>(1, n / 2);
      }
      MaxCutModel model(g);
      return single_stage(model, std::move(start), rng, params, std::nullopt);
    }
    case Problem::tsp: {
      const auto& t = instance_as<TspInstance>(inst, p);
      AnnealState start;
      start.order = warm ? *warm : nearest_neighbour_tour(t, rng);
      TspModel model(t);
      return single_stage(model, std::move(start), rng, params, std::nullopt);
    }
    case Problem::qap: {
      const auto& q = instance_as<QapInstance>(inst, p);
      auto term = [&q](const std::vector<std::size_t>& o, std::size_t i, std::size_t j) {
        return q.flow(i, j) * q.dist(o[j], o[i]);
      };
      AnnealState start;
      start.order = warm ? *warm : shuffled_vertices(n, rng);
      QuadraticSwapModel<decltype(term)> model(n, term);
      return single_stage(model, std::move(start), rng, params, std::nullopt);
    }
    case Problem::gi: {
      const auto& gp = instance_as<GraphPair>(inst, p);
      const IntMatrix& a1 = gp.first.adjacency();
      const IntMatrix& a2 = gp.second.adjacency();
      auto term = [&a1, &a2](const std::vector<std::size_t>& o, std::size_t i, std::size_t j) {
        const double d = static_cast<double>(a1(o[i], o[j]) - a2(i, j));
        return d * d;
      };
      AnnealState start;
      start.order = warm ? *warm : shuffled_vertices(n, rng);
      QuadraticSwapModel<decltype(term)> model(n, term);
      return single_stage(model, std::move(start), rng, params, 0.0);
    }
    case Problem::sat: {
      const auto& s = instance_as<SatInstance>(inst, p);
      const std::size_t lits = 2 * s.num_vars;
      AnnealState start;
      if (warm) {
        start.order = *warm;
      } else {
        // One random literal per variable in front, in shuffled order.
        std::vector<std::size_t> front, back;
        for (std::size_t v = 0; v < s.num_vars; ++v) {
          const bool t = uniform01(rng) < 0.5;
          front.push_back(2 * v + (t ? 0 : 1));
          back.push_back(2 * v + (t ? 1 : 0));
        }
        std::shuffle(front.begin(), front.end(), rng);
        std::shuffle(back.begin(), back.end(), rng);
        start.order = front;
        start.order.insert(start.order.end(), back.begin(), back.end());
        for (std::size_t i = lits; i < n; ++i) start.order.push_back(i);
      }
      SatModel model(s);
      return single_stage(model, std::move(start), rng, params, 0.0);
    }
  }
  throw std::logic_error("unreachable");
}

/// True if `a` should replace `b` as the reported result.
inline bool preferable(Problem p, const Evaluation& a, const Evaluation& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible && a.violation != b.violation) return a.violation < b.violation;
  const bool maximize = is_maximization(p) && p != Problem::sat;
  return maximize ? a.objective > b.objective + 1e-12 : a.objective < b.objective - 1e-12;
}

}  // namespace detail

/// Anneals from a given visiting order (positions -> 0-based vertices), or
/// from a seeded greedy start when `warm_order` is empty.
inline AnnealResult anneal_from(Problem p, const Instance& inst, const AnnealParams& params,
                                const std::optional<std::vector<std::size_t>>& warm_order) {
  params.validate();
  const std::size_t n = permutation_size(inst);
  if (n == 0) throw OutOfRange("anneal: empty instance");
  if (p == Problem::tsp && n < 2) throw OutOfRange("anneal: TSP needs at least 2 cities");
  if (p == Problem::maxcut && n < 2) throw OutOfRange("anneal: Max-Cut needs at least 2 vertices");
  if (warm_order) (void)Permutation::from_zero_based(*warm_order);

  AnnealResult result;
  bool have = false;
  for (std::size_t r = 0; r < params.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(params.seed >> 32), static_cast<std::uint32_t>(r)};
    detail::Rng rng(seq);
    auto outcome = detail::anneal_restart(p, inst, params, rng, warm_order);
    CandidateSolution cand = detail::to_candidate(p, outcome.best);
    const Evaluation ev = evaluate(inst, cand);
    result.total_iterations += outcome.iterations;
    if (!have || detail::preferable(p, ev, result.evaluation)) {
      result.candidate = std::move(cand);
      result.evaluation = ev;
      result.best_restart = r;
      result.stages = std::move(outcome.stages);
      have = true;
    }
  }
  return result;
}

inline AnnealResult anneal(Problem p, const Instance& inst, const AnnealParams& params) {
  return anneal_from(p, inst, params, std::nullopt);
}

}  // namespace permform

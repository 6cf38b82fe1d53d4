#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "moran/graph.hpp"
#include "moran/random.hpp"
#include "moran/state.hpp"
#include "moran/weight_index.hpp"

namespace moran {

/// One reproduction event: v copies its type onto w. `replaced` is w's type
/// before the event; the event changed the state iff replaced != S(v).
struct Transition {
  Vertex v;
  Vertex w;
  TypeIndex replaced;
};

/// The discrete-time Moran chain: a State plus the vertex weight index used
/// to draw the reproducing vertex with probability f(v)/F exactly.
class DiscreteProcess {
 public:
  DiscreteProcess(const Graph& graph, State initial) : graph_(&graph), state_(std::move(initial)) {
    if (state_.size() != graph.size())
      fail(ErrorCode::InvalidSize, "state has " + std::to_string(state_.size()) + " vertices, graph has " +
                                       std::to_string(graph.size()));
    std::vector<std::uint64_t> weights(state_.size());
    for (Vertex v = 0; v < weights.size(); ++v) weights[v] = state_.types().weight(state_[v]);
    index_ = WeightIndex(weights);
  }

  const Graph& graph() const noexcept { return *graph_; }
  const State& state() const noexcept { return state_; }
  const WeightIndex& weights() const noexcept { return index_; }

  /// Draws v with probability f(v)/F and w uniformly from N(v), then applies S|_{v->w}.
  Transition step(Rng& rng) {
    const auto v = static_cast<Vertex>(index_.find(uniform_below(rng, index_.total())));
    const auto nbrs = graph_->neighbours(v);
    if (nbrs.empty()) return {v, v, state_[v]};  // n = 1
    const Vertex w = nbrs[uniform_below(rng, nbrs.size())];
    const TypeIndex replaced = state_[w];
    if (replaced != state_[v]) {
      state_.reproduce_unchecked(v, w);
      index_.set(w, state_.types().weight(state_[v]));
    }
    return {v, w, replaced};
  }

 private:
  const Graph* graph_;
  State state_;
  WeightIndex index_;
};

/// When a replicate stops: at fixation of any type, or as soon as alpha has
/// fixated or gone extinct.
struct StopRule {
  enum class Kind { FullFixation, AlphaStopped };
  Kind kind = Kind::FullFixation;
  TypeIndex alpha = 0;

  static StopRule full_fixation() { return {Kind::FullFixation, 0}; }
  static StopRule alpha_stopped(TypeIndex alpha) { return {Kind::AlphaStopped, alpha}; }

  bool done(const State& s) const {
    if (kind == Kind::AlphaStopped) {
      const std::size_t c = s.count(alpha);
      return c == 0 || c == s.size();
    }
    return s.count(s[0]) == s.size();
  }
};

inline constexpr std::uint64_t unlimited_steps = std::numeric_limits<std::uint64_t>::max();

struct NoObserver {
  void operator()(std::uint64_t, const Transition&, const State&) const noexcept {}
};

/// Steps until `rule` holds or `budget` steps have elapsed. Every step counts,
/// including those that leave the state unchanged.
template <class Observer = NoObserver>
AbsorptionRecord run_to_absorption(const Graph& graph, State initial, StopRule rule, std::uint64_t budget, Rng& rng,
                                   Observer&& observe = {}) {
  DiscreteProcess process(graph, std::move(initial));
  AbsorptionRecord record;
  std::uint64_t steps = 0;
  while (!rule.done(process.state())) {
    if (steps == budget) {
      record.outcome = Outcome::Truncated;
      record.steps = steps;
      return record;
    }
    const Transition t = process.step(rng);
    ++steps;
    observe(steps, t, process.state());
  }
  const State& s = process.state();
  record.steps = steps;
  if (rule.kind == StopRule::Kind::AlphaStopped) {
    record.outcome = s.count(rule.alpha) == 0 ? Outcome::Extinct : Outcome::Fixated;
    record.type = rule.alpha;
  } else {
    record.outcome = Outcome::Fixated;
    record.type = s[0];
  }
  return record;
}

/// Exact E[Psi_alpha(M_{t+1}) - Psi_alpha(M_t) | M_t = S], by enumerating
/// every (v, w) reproduction event. Throws AbsorbedState when V_alpha is empty or V.
inline Rational one_step_drift(const State& s, TypeIndex alpha, const Graph& graph) {
  const std::size_t c = s.count(alpha);
  if (c == 0 || c == s.size()) fail(ErrorCode::AbsorbedState, "alpha is extinct or fixated");
  const Rational total = s.total_fitness();
  Rational drift = 0;
  for (Vertex v = 0; v < s.size(); ++v) {
    const auto nbrs = graph.neighbours(v);
    Rational delta = 0;
    for (Vertex w : nbrs) {
      if (s[v] == s[w]) continue;
      const Rational inv_dw(1, static_cast<unsigned long>(graph.degree(w)));
      if (s[v] == alpha) delta += inv_dw;
      else if (s[w] == alpha) delta -= inv_dw;
    }
    if (delta != 0)
      drift += s.types().fitness(s[v]) / total * Rational(1, static_cast<unsigned long>(nbrs.size())) * delta;
  }
  return drift;
}

/// Trajectory CSV: step, reproducing vertex, target vertex, then one count column per type.
class TrajectoryCsv {
 public:
  TrajectoryCsv(std::ostream& out, const TypeSystem& types) : out_(&out) {
    *out_ << "step,v,w";
    for (const auto& name : types.names()) *out_ << ",count_" << name;
    *out_ << '\n';
  }

  void operator()(std::uint64_t step, const Transition& t, const State& s) const {
    *out_ << step << ',' << t.v << ',' << t.w;
    for (TypeIndex j = 0; j < s.types().size(); ++j) *out_ << ',' << s.count(j);
    *out_ << '\n';
  }

 private:
  std::ostream* out_;
};

}  // namespace moran

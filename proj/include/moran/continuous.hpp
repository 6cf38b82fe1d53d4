#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <type_traits>
#include <vector>

#include "moran/process.hpp"

namespace moran {

struct ContinuousStep {
  double holding;  // time spent in the previous state
  Transition transition;
};

/// Continuous-time Moran process. Rather than keeping one exponential clock
/// per vertex, each jump draws the holding time from Exp(F) and the
/// reproducing vertex with probability f(v)/F (the minimum of independent
/// exponentials), so the embedded jump chain is DiscreteProcess itself.
class ContinuousProcess {
 public:
  ContinuousProcess(const Graph& graph, State initial) : chain_(graph, std::move(initial)) {}

  ContinuousStep step(Rng& rng) {
    const double holding = exponential(rng, to_double(chain_.state().total_fitness()));
    time_ += holding;
    return {holding, chain_.step(rng)};
  }

  const State& state() const noexcept { return chain_.state(); }
  double time() const noexcept { return time_; }

 private:
  DiscreteProcess chain_;
  double time_ = 0.0;
};

/// Which clock fired in the coupled chain: Shared moves both copies,
/// FirstOnly moves M alone (f(v) > f'(v)), SecondOnly moves M' alone.
enum class CouplingCase : std::uint8_t { Shared = 0, FirstOnly = 1, SecondOnly = 2 };

struct CoupledEvent {
  std::uint64_t index = 0;
  double time = 0.0;
  CouplingCase which = CouplingCase::Shared;
  Vertex v = 0;
  Vertex w = 0;
};

/// Joint evolution of M (fitness f) and M' (fitness f') that keeps
/// V'_alpha inside V_alpha. Per vertex v the clocks have rates
/// min(f, f'), f - f' when positive and f' - f when positive; the next event
/// is drawn from the normalized rate vector with exact integer weights.
class CoupledProcess {
 public:
  CoupledProcess(const Graph& graph, const TypeSystem& f, const TypeSystem& f_prime, std::vector<TypeIndex> first,
                 std::vector<TypeIndex> second, TypeIndex alpha)
      : graph_(&graph), first_(std::move(first)), second_(std::move(second)), alpha_(alpha) {
    auto reject = [](const std::string& why) { fail(ErrorCode::HypothesisViolated, why); };
    if (f.size() != f_prime.size()) reject("both fitness functions must be defined on the same types");
    if (alpha >= f.size()) reject("alpha is not a type");
    if (f.fitness(alpha) != f_prime.fitness(alpha)) reject("f(alpha) != f'(alpha)");
    std::optional<Rational> max_f, min_f_prime;
    for (TypeIndex j = 0; j < f.size(); ++j) {
      if (j == alpha) continue;
      if (!max_f || f.fitness(j) > *max_f) max_f = f.fitness(j);
      if (!min_f_prime || f_prime.fitness(j) < *min_f_prime) min_f_prime = f_prime.fitness(j);
    }
    if (max_f && *max_f > *min_f_prime) reject("some f(beta) exceeds some f'(beta')");
    if (first_.size() != graph.size() || second_.size() != graph.size())
      reject("initial states must assign a type to every vertex");
    for (Vertex v = 0; v < graph.size(); ++v) {
      if (first_[v] >= f.size() || second_[v] >= f.size()) reject("initial state uses an unknown type");
      if (second_[v] == alpha && first_[v] != alpha) reject("V'_alpha(0) is not a subset of V_alpha(0)");
    }

    Integer lcm = 1;
    mpz_lcm(lcm.get_mpz_t(), f.weight_denominator().get_mpz_t(), f_prime.weight_denominator().get_mpz_t());
    for (TypeIndex j = 0; j < f.size(); ++j) {
      weight_.push_back(to_u64(f.fitness(j).get_num() * (lcm / f.fitness(j).get_den())));
      weight_prime_.push_back(to_u64(f_prime.fitness(j).get_num() * (lcm / f_prime.fitness(j).get_den())));
    }
    scale_ = lcm.get_d();
  }

  /// Samples the next event from the current joint state without applying it;
  /// `time` holds the holding time.
  CoupledEvent draw(Rng& rng) const {
    std::uint64_t total = 0;
    for (Vertex v = 0; v < first_.size(); ++v) total += std::max(weight_[first_[v]], weight_prime_[second_[v]]);
    CoupledEvent e;
    e.time = exponential(rng, static_cast<double>(total) / scale_);
    std::uint64_t r = uniform_below(rng, total);
    for (Vertex v = 0; v < first_.size(); ++v) {
      const std::uint64_t a = weight_[first_[v]], b = weight_prime_[second_[v]];
      const std::uint64_t block = std::max(a, b);
      if (r >= block) {
        r -= block;
        continue;
      }
      e.v = v;
      e.which = r < std::min(a, b) ? CouplingCase::Shared : (a > b ? CouplingCase::FirstOnly : CouplingCase::SecondOnly);
      break;
    }
    const auto nbrs = graph_->neighbours(e.v);
    e.w = nbrs.empty() ? e.v : nbrs[uniform_below(rng, nbrs.size())];
    return e;
  }

  void apply(const CoupledEvent& e) {
    const bool was_outside = outside(e.w);
    if (e.which != CouplingCase::SecondOnly) first_[e.w] = first_[e.v];
    if (e.which != CouplingCase::FirstOnly) second_[e.w] = second_[e.v];
    violations_ += static_cast<std::size_t>(outside(e.w)) - static_cast<std::size_t>(was_outside);
  }

  CoupledEvent step(Rng& rng) {
    CoupledEvent e = draw(rng);
    time_ += e.time;
    e.time = time_;
    e.index = ++events_;
    apply(e);
    return e;
  }

  /// V'_alpha is a subset of V_alpha.
  bool subset_holds() const noexcept { return violations_ == 0; }

  std::span<const TypeIndex> first() const noexcept { return first_; }
  std::span<const TypeIndex> second() const noexcept { return second_; }
  double time() const noexcept { return time_; }
  std::uint64_t events() const noexcept { return events_; }

 private:
  bool outside(Vertex v) const { return second_[v] == alpha_ && first_[v] != alpha_; }

  const Graph* graph_;
  std::vector<TypeIndex> first_, second_;
  TypeIndex alpha_;
  std::vector<std::uint64_t> weight_, weight_prime_;
  double scale_ = 1.0;
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  std::size_t violations_ = 0;
};

struct CoupledRunResult {
  bool violated = false;
  std::optional<std::uint64_t> first_violation;
  std::uint64_t events = 0;
  double time = 0.0;
  std::array<std::uint64_t, 3> case_counts{};
};

inline void write_event_csv_header(std::ostream& out) { out << "event,time,case,v,w\n"; }

inline void write_event_csv(std::ostream& out, const CoupledEvent& e) {
  out << e.index << ',' << e.time << ',' << static_cast<int>(e.which) << ',' << e.v << ',' << e.w << '\n';
}

/// Runs the coupled chain for `horizon` events, checking V'_alpha within V_alpha
/// after every event. Throws HypothesisViolated when the coupling's
/// preconditions fail.
template <class EventSink = std::nullptr_t>
CoupledRunResult coupled_run(const Graph& graph, const TypeSystem& f, const TypeSystem& f_prime,
                             std::vector<TypeIndex> first, std::vector<TypeIndex> second, TypeIndex alpha,
                             std::uint64_t horizon, Rng& rng, EventSink&& sink = nullptr) {
  CoupledProcess chain(graph, f, f_prime, std::move(first), std::move(second), alpha);
  CoupledRunResult result;
  for (std::uint64_t i = 0; i < horizon; ++i) {
    const CoupledEvent e = chain.step(rng);
    ++result.case_counts[static_cast<std::size_t>(e.which)];
    if constexpr (!std::is_same_v<std::decay_t<EventSink>, std::nullptr_t>) sink(e);
    if (!chain.subset_holds() && !result.violated) {
      result.violated = true;
      result.first_violation = e.index;
    }
  }
  result.events = chain.events();
  result.time = chain.time();
  return result;
}

}  // namespace moran

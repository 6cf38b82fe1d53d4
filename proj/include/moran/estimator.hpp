#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <vector>

#include "moran/bounds.hpp"
#include "moran/distribution.hpp"
#include "moran/parallel.hpp"
#include "moran/process.hpp"

namespace moran {

struct EstimatorConfig {
  double eps = 0.1;
  double delta = 0.1;
  double delta_prime = 0.125;
  std::uint64_t master_seed = 0;
  Rational budget_multiplier = 8;
  unsigned threads = 1;
};

/// t = ceil(3 ln(2/delta') n / eps^2): enough alpha-stopped runs for a
/// (1 +- eps) estimate with probability 1 - delta' when pi_alpha >= 1/n.
inline std::uint64_t sample_count(double eps, double delta_prime, std::size_t n) {
  if (!(eps > 0 && eps < 1) || !(delta_prime > 0 && delta_prime < 1))
    fail(ErrorCode::InvalidArgument, "eps and delta' must lie in (0, 1)");
  if (n == 0) fail(ErrorCode::InvalidSize, "n must be positive");
  return static_cast<std::uint64_t>(std::ceil(3.0 * std::log(2.0 / delta_prime) * static_cast<double>(n) / (eps * eps)));
}

// Each repeat is correct with probability >= 3/4; a Chernoff bound on m
// repeats gives a wrong median with probability <= exp(-m/24) <= delta.
inline std::uint64_t median_repeats(double delta) {
  if (!(delta > 0 && delta < 1)) fail(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(24.0 * std::log(1.0 / delta))));
}

/// multiplier * t * B(n), B the expected alpha-absorption bound, evaluated
/// exactly and rounded up.
inline std::uint64_t step_budget(std::size_t n, const TypeSystem& types, TypeIndex alpha, std::uint64_t t,
                                 const Rational& multiplier = Rational(8)) {
  const Rational b = absorption_bound_max_type(n, types, alpha);
  return saturate_u64(ceil(multiplier * Rational(from_u64(t)) * b));
}

struct APrimeResult {
  std::uint64_t fixations = 0;
  std::uint64_t replicates = 0;
  std::uint64_t steps = 0;  // steps charged against the budget
  bool truncated = false;
};

namespace detail {

inline void check_estimator_inputs(const Graph& graph, const TypeSystem& types, TypeIndex alpha,
                                   const InitialDistribution& dist) {
  if (alpha >= types.size()) fail(ErrorCode::UnknownType, "alpha index " + std::to_string(alpha));
  if (!types.is_max(alpha)) fail(ErrorCode::NotMaximal, types.name(alpha) + " is not maximally fit");
  if (dist.kind() == InitialDistribution::Kind::Mut && graph.size() < types.size())
    fail(ErrorCode::TooFewVertices, "D_mut needs at least as many vertices as types");
}

inline AbsorptionRecord run_replicate(const Graph& graph, const TypeSystem& types, TypeIndex alpha,
                                      const InitialDistribution& dist, std::uint64_t master_seed, std::uint64_t repeat,
                                      std::uint64_t replicate, std::uint64_t cap) {
  Rng rng(master_seed, repeat, replicate);
  State initial(types, dist.sample(graph, types, rng));
  AbsorptionRecord rec = run_to_absorption(graph, std::move(initial), StopRule::alpha_stopped(alpha), cap, rng);
  rec.replicate = replicate;
  return rec;
}

}  // namespace detail

/// t alpha-stopped replicates, replicate i drawing from stream (master_seed,
/// repeat, i). The budget applies to the total across replicates, folded in
/// replicate order: once the running total would exceed it the run is
/// truncated. The fold makes the result independent of `threads`.
inline APrimeResult run_aprime(const Graph& graph, const TypeSystem& types, TypeIndex alpha,
                               const InitialDistribution& dist, std::uint64_t t, std::uint64_t master_seed,
                               std::uint64_t repeat = 0, std::uint64_t budget = unlimited_steps, unsigned threads = 1) {
  detail::check_estimator_inputs(graph, types, alpha, dist);
  APrimeResult out;
  out.replicates = t;
  auto charge = [&](const AbsorptionRecord& rec) {
    const std::uint64_t remaining = budget - out.steps;
    if (rec.outcome == Outcome::Truncated || rec.steps > remaining) {
      out.truncated = true;
      out.steps = budget;
      return false;
    }
    out.steps += rec.steps;
    if (rec.outcome == Outcome::Fixated) ++out.fixations;
    return true;
  };
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < t; ++i)
      if (!charge(detail::run_replicate(graph, types, alpha, dist, master_seed, repeat, i, budget - out.steps))) break;
    return out;
  }
  std::vector<AbsorptionRecord> records(t);
  parallel_for(t, threads, [&](std::uint64_t i) {
    records[i] = detail::run_replicate(graph, types, alpha, dist, master_seed, repeat, i, budget);
  });
  for (const auto& rec : records)
    if (!charge(rec)) break;
  return out;
}

inline APrimeResult run_aprime(const Graph& graph, const TypeSystem& types, TypeIndex alpha,
                               const InitialDistribution& dist, double eps, double delta_prime,
                               std::uint64_t master_seed) {
  return run_aprime(graph, types, alpha, dist, sample_count(eps, delta_prime, graph.size()), master_seed);
}

struct Estimate {
  double value = 0.0;
  double eps = 0.0, delta = 0.0, delta_prime = 0.0;
  std::uint64_t t = 0;
  std::uint64_t median_repeats = 0;
  std::vector<std::uint64_t> fixations_per_repeat;
  std::vector<bool> truncated_per_repeat;
  bool truncation_occurred = false;
  std::uint64_t total_steps = 0;
  std::uint64_t step_budget = 0;
  std::uint64_t master_seed = 0;

  std::size_t truncated_repeats() const {
    return static_cast<std::size_t>(std::count(truncated_per_repeat.begin(), truncated_per_repeat.end(), true));
  }
};

/// (eps, delta)-approximation of pi_alpha: the median over
/// median_repeats(delta) budgeted runs of algorithm A', each returning w/t, or
/// 0 if its step budget ran out. With an even repeat count the lower median
/// is reported.
inline Estimate run_fptras(const Graph& graph, const TypeSystem& types, TypeIndex alpha,
                           const InitialDistribution& dist, const EstimatorConfig& config) {
  Estimate est;
  est.eps = config.eps;
  est.delta = config.delta;
  est.delta_prime = config.delta_prime;
  est.master_seed = config.master_seed;
  if (!(config.eps > 0 && config.eps < 1) || !(config.delta > 0 && config.delta < 1) ||
      !(config.delta_prime > 0 && config.delta_prime < 1))
    fail(ErrorCode::InvalidArgument, "eps, delta and delta' must lie in (0, 1)");
  if (config.budget_multiplier <= 0) fail(ErrorCode::InvalidArgument, "budget multiplier must be positive");
  if (types.size() == 1) {
    // alpha is the only type and holds every vertex already
    if (alpha != 0) fail(ErrorCode::UnknownType, "alpha index " + std::to_string(alpha));
    est.value = 1.0;
    return est;
  }
  detail::check_estimator_inputs(graph, types, alpha, dist);

  est.t = sample_count(config.eps, config.delta_prime, graph.size());
  est.median_repeats = median_repeats(config.delta);
  est.step_budget = step_budget(graph.size(), types, alpha, est.t, config.budget_multiplier);
  std::vector<double> values;
  for (std::uint64_t r = 0; r < est.median_repeats; ++r) {
    const auto a = run_aprime(graph, types, alpha, dist, est.t, config.master_seed, r, est.step_budget, config.threads);
    est.fixations_per_repeat.push_back(a.fixations);
    est.truncated_per_repeat.push_back(a.truncated);
    est.truncation_occurred = est.truncation_occurred || a.truncated;
    est.total_steps += a.steps;
    values.push_back(a.truncated ? 0.0 : static_cast<double>(a.fixations) / static_cast<double>(est.t));
  }
  std::sort(values.begin(), values.end());
  est.value = values[(values.size() - 1) / 2];
  return est;
}

inline nlohmann::json to_json(const Estimate& e) {
  return {{"estimate", e.value},
          {"eps", e.eps},
          {"delta", e.delta},
          {"deltaPrime", e.delta_prime},
          {"t", e.t},
          {"medianRepeats", e.median_repeats},
          {"fixationsPerRepeat", e.fixations_per_repeat},
          {"truncatedRepeats", e.truncated_repeats()},
          {"truncated", e.truncation_occurred},
          {"stepBudget", e.step_budget},
          {"totalSteps", e.total_steps},
          {"masterSeed", e.master_seed}};
}

struct PlainMcResult {
  double estimate = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // Wilson 95%
  std::uint64_t replicates = 0;
  std::uint64_t fixations = 0;
  std::uint64_t truncated = 0;
  double mean_steps = 0.0;
  std::uint64_t max_steps = 0;
};

inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054) {
  const double n = static_cast<double>(trials), p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Plain Monte Carlo over alpha-stopped replicates with a Wilson 95% interval.
/// `cap` bounds each replicate; truncated replicates count as non-fixations.
inline PlainMcResult run_plain_mc(const Graph& graph, const TypeSystem& types, TypeIndex alpha,
                                  const InitialDistribution& dist, std::uint64_t replicates, std::uint64_t master_seed,
                                  unsigned threads = 1, std::uint64_t cap = unlimited_steps) {
  if (replicates == 0) fail(ErrorCode::InvalidArgument, "replicates must be at least 1");
  if (alpha >= types.size()) fail(ErrorCode::UnknownType, "alpha index " + std::to_string(alpha));
  std::vector<AbsorptionRecord> records(replicates);
  parallel_for(replicates, threads, [&](std::uint64_t i) {
    records[i] = detail::run_replicate(graph, types, alpha, dist, master_seed, 0, i, cap);
  });
  PlainMcResult out;
  out.replicates = replicates;
  double steps = 0.0;
  for (const auto& rec : records) {
    if (rec.outcome == Outcome::Fixated) ++out.fixations;
    if (rec.outcome == Outcome::Truncated) ++out.truncated;
    steps += static_cast<double>(rec.steps);
    out.max_steps = std::max(out.max_steps, rec.steps);
  }
  out.estimate = static_cast<double>(out.fixations) / static_cast<double>(replicates);
  out.mean_steps = steps / static_cast<double>(replicates);
  std::tie(out.ci_low, out.ci_high) = wilson_interval(out.fixations, replicates);
  return out;
}

inline nlohmann::json to_json(const PlainMcResult& r) {
  return {{"estimate", r.estimate},
          {"ciLow", r.ci_low},
          {"ciHigh", r.ci_high},
          {"replicates", r.replicates},
          {"fixations", r.fixations},
          {"truncated", r.truncated},
          {"meanSteps", r.mean_steps},
          {"maxSteps", r.max_steps}};
}

}  // namespace moran

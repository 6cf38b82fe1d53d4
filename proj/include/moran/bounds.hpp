#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "moran/error.hpp"
#include "moran/rational.hpp"
#include "moran/types.hpp"

namespace moran {

enum class BoundDirection { Lower, Upper };

struct BoundReport {
  std::string quantity;
  Rational value;
  BoundDirection direction = BoundDirection::Upper;
  std::string inputs;  // human-readable description of what the bound was evaluated on
};

namespace detail {
inline Rational cube(std::size_t n) { return Rational(static_cast<unsigned long>(n)) * n * n; }
inline Rational sixth(std::size_t n) { return cube(n) * cube(n); }
// f / (f - g) * (n + 1) * n^3
inline Rational level_term(const Rational& f, const Rational& g, std::size_t n) {
  return f / (f - g) * Rational(static_cast<unsigned long>(n + 1)) * cube(n);
}
}  // namespace detail

/// Upper bound on E[A_alpha] for a maximally fit alpha from any start state with every type present:
///   (|tau_max| - 1) n^6 + f(alpha) / (f(alpha) - f*) (n + 1) n^3,
/// with the second term absent when every type has the same fitness.
inline Rational absorption_bound_max_type(std::size_t n, const TypeSystem& types, TypeIndex alpha) {
  if (types.size() < 2) fail(ErrorCode::UndefinedBound, "absorption bound needs at least two types");
  if (!types.is_max(alpha)) fail(ErrorCode::NotMaximal, types.name(alpha) + " is not maximally fit");
  Rational bound = Rational(static_cast<unsigned long>(types.tau_max().size() - 1)) * detail::sixth(n);
  if (types.f_star()) bound += detail::level_term(types.fitness(alpha), *types.f_star(), n);
  return bound;
}

/// Bounds on the expected total absorption time and on each type's absorption time.
/// Entry 0 is the total bound; the rest follow type order.
inline std::vector<BoundReport> absorption_bounds_full(std::size_t n, const TypeSystem& types) {
  const auto& f = types.levels();
  const auto& mult = types.multiplicities();
  // tail[j] = sum_{i >= j, i >= 1} f_i / (f_i - f_{i-1}) (n + 1) n^3  (0-based levels)
  std::vector<Rational> tail(f.size() + 1, Rational(0));
  for (std::size_t i = f.size(); i-- > 1;) tail[i] = tail[i + 1] + detail::level_term(f[i], f[i - 1], n);
  tail[0] = tail[1];

  std::vector<BoundReport> out;
  const auto nstr = "n=" + std::to_string(n);
  out.push_back({"E[A] total absorption time",
                 Rational(static_cast<unsigned long>(types.max_multiplicity() - 1)) * detail::sixth(n) + tail[1],
                 BoundDirection::Upper, nstr});
  for (TypeIndex j = 0; j < types.size(); ++j) {
    const std::size_t level = types.level_of(j);
    // the lowest level uses the full sum, like the total bound
    const Rational& sum = tail[level];
    out.push_back({"E[A_" + types.name(j) + "] absorption time of " + types.name(j),
                   Rational(static_cast<unsigned long>(mult[level] - 1)) * detail::sixth(n) + sum,
                   BoundDirection::Upper, nstr});
  }
  return out;
}

/// Sandwich for K_n with i vertices of type alpha:
///   (1 - r^i) / (1 - r^n) with r = f(beta)/f(alpha), beta the fittest (lower) or
///   least fit (upper) competitor.
inline std::pair<Rational, Rational> complete_graph_sandwich(const TypeSystem& types, TypeIndex alpha, std::size_t n,
                                                             std::size_t i) {
  if (types.size() < 2) fail(ErrorCode::SingleType, "the sandwich needs a competitor type");
  if (i > n) fail(ErrorCode::InvalidArgument, "i must lie in [0, n]");
  const auto hi = merge_to_two_types(types, alpha, Competitor::Max).competitor;
  const auto lo = merge_to_two_types(types, alpha, Competitor::Min).competitor;
  auto ratio_form = [&](TypeIndex beta) {
    if (types.fitness(beta) == types.fitness(alpha))
      fail(ErrorCode::DegenerateRatio, "f(" + types.name(beta) + ") equals f(alpha)");
    const Rational r = types.fitness(beta) / types.fitness(alpha);
    return Rational((1 - pow(r, i)) / (1 - pow(r, n)));
  };
  return {ratio_form(hi), ratio_form(lo)};
}

/// pi_alpha >= 1/n for alpha maximally fit and D in the admissible family.
inline Rational fixation_lower_bound(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidSize, "n must be positive");
  return Rational(1, static_cast<unsigned long>(n));
}

inline nlohmann::json to_json(const BoundReport& b) {
  return {{"quantity", b.quantity},
          {"value", to_string(b.value)},
          {"valueFloat", to_double(b.value)},
          {"direction", b.direction == BoundDirection::Lower ? "lower" : "upper"},
          {"inputs", b.inputs}};
}

}  // namespace moran

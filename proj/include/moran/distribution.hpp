#pragma once

#include <algorithm>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "moran/graph.hpp"
#include "moran/random.hpp"
#include "moran/rational.hpp"
#include "moran/types.hpp"

namespace moran {

struct WeightedAssignment {
  std::vector<TypeIndex> assignment;
  Rational probability;
};

/// Throws OracleReturnedInvalidState unless the assignment has one entry per
/// vertex, uses known types only and, when `full_range` is set, uses every type.
inline void check_initial_state(std::span<const TypeIndex> assignment, std::size_t n, const TypeSystem& types,
                                bool full_range = true) {
  if (assignment.size() != n)
    fail(ErrorCode::OracleReturnedInvalidState,
         "state has " + std::to_string(assignment.size()) + " entries, graph has " + std::to_string(n) + " vertices");
  std::vector<char> used(types.size(), 0);
  for (TypeIndex t : assignment) {
    if (t >= types.size()) fail(ErrorCode::OracleReturnedInvalidState, "unknown type index " + std::to_string(t));
    used[t] = 1;
  }
  if (full_range)
    for (TypeIndex j = 0; j < types.size(); ++j)
      if (!used[j]) fail(ErrorCode::OracleReturnedInvalidState, "type " + types.name(j) + " is missing");
}

/// Uniform over states with exactly one vertex of each non-ordinary type and
/// every other vertex ordinary: a uniform (k-1)-permutation of distinct vertices.
inline std::vector<TypeIndex> sample_dmut(const Graph& graph, const TypeSystem& types, Rng& rng) {
  const std::size_t n = graph.size(), k = types.size();
  if (n < k)
    fail(ErrorCode::TooFewVertices, std::to_string(k - 1) + " mutant types need more than " + std::to_string(n) +
                                        " vertices");
  std::vector<TypeIndex> out(n, types.ordinary());
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), Vertex{0});
  std::size_t slot = 0;
  for (TypeIndex j = 0; j < k; ++j) {
    if (j == types.ordinary()) continue;
    const std::size_t pick = slot + uniform_below(rng, n - slot);
    std::swap(order[slot], order[pick]);
    out[order[slot]] = j;
    ++slot;
  }
  return out;
}

/// Every state in the support of D_mut with its probability.
inline std::vector<WeightedAssignment> enumerate_dmut(const Graph& graph, const TypeSystem& types) {
  const std::size_t n = graph.size(), k = types.size();
  if (n < k) fail(ErrorCode::TooFewVertices, "D_mut needs n >= k");
  std::vector<TypeIndex> mutants;
  for (TypeIndex j = 0; j < k; ++j)
    if (j != types.ordinary()) mutants.push_back(j);
  std::vector<std::vector<TypeIndex>> states;
  std::vector<TypeIndex> current(n, types.ordinary());
  std::function<void(std::size_t)> place = [&](std::size_t m) {
    if (m == mutants.size()) {
      states.push_back(current);
      return;
    }
    for (Vertex v = 0; v < n; ++v) {
      if (current[v] != types.ordinary()) continue;
      current[v] = mutants[m];
      place(m + 1);
      current[v] = types.ordinary();
    }
  };
  place(0);
  std::vector<WeightedAssignment> out;
  out.reserve(states.size());
  const Rational p(1, static_cast<unsigned long>(states.size()));
  for (auto& s : states) out.push_back({std::move(s), p});
  return out;
}

/// An initial-state distribution: D_mut, an explicit finite list, or an
/// external sampling oracle. Samples are checked for membership of Omega_0
/// (every type present); whether the distribution belongs to the family the
/// 1/n guarantee needs is a property of the whole distribution and is not
/// checked here.
class InitialDistribution {
 public:
  enum class Kind { Mut, ExplicitList, ExternalOracle };
  using Oracle = std::function<std::vector<TypeIndex>(Rng&)>;

  static InitialDistribution mut() { return InitialDistribution(Kind::Mut); }

  static InitialDistribution explicit_list(std::vector<WeightedAssignment> entries) {
    if (entries.empty()) fail(ErrorCode::InvalidArgument, "explicit distribution has no states");
    Rational sum = 0;
    Integer lcm = 1;
    for (const auto& e : entries) {
      if (e.probability < 0) fail(ErrorCode::InvalidArgument, "negative probability");
      if (e.assignment.size() != entries.front().assignment.size())
        fail(ErrorCode::InvalidArgument, "states in an explicit distribution differ in length");
      sum += e.probability;
      mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), e.probability.get_den_mpz_t());
    }
    if (sum != 1) fail(ErrorCode::InvalidArgument, "probabilities sum to " + to_string(sum) + ", not 1");
    InitialDistribution d(Kind::ExplicitList);
    std::uint64_t running = 0;
    for (const auto& e : entries) {
      running += to_u64(e.probability.get_num() * (lcm / e.probability.get_den()));
      d.cumulative_.push_back(running);
    }
    d.entries_ = std::move(entries);
    return d;
  }

  static InitialDistribution external(Oracle oracle) {
    InitialDistribution d(Kind::ExternalOracle);
    d.oracle_ = std::move(oracle);
    return d;
  }

  /// Disables the every-type-present check, e.g. for point masses used in diagnostics.
  InitialDistribution& allow_partial_range(bool allow = true) {
    full_range_ = !allow;
    return *this;
  }

  Kind kind() const noexcept { return kind_; }
  bool requires_full_range() const noexcept { return full_range_; }
  const std::vector<WeightedAssignment>& entries() const noexcept { return entries_; }

  std::vector<TypeIndex> sample(const Graph& graph, const TypeSystem& types, Rng& rng) const {
    std::vector<TypeIndex> out;
    switch (kind_) {
      case Kind::Mut:
        out = sample_dmut(graph, types, rng);
        break;
      case Kind::ExplicitList: {
        const std::uint64_t r = uniform_below(rng, cumulative_.back());
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
        out = entries_[static_cast<std::size_t>(it - cumulative_.begin())].assignment;
        break;
      }
      case Kind::ExternalOracle:
        out = oracle_(rng);
        break;
    }
    check_initial_state(out, graph.size(), types, full_range_);
    return out;
  }

  /// The full support with probabilities; NotEnumerable for external oracles.
  std::vector<WeightedAssignment> enumerate(const Graph& graph, const TypeSystem& types) const {
    switch (kind_) {
      case Kind::Mut:
        return enumerate_dmut(graph, types);
      case Kind::ExplicitList:
        for (const auto& e : entries_) check_initial_state(e.assignment, graph.size(), types, full_range_);
        return entries_;
      case Kind::ExternalOracle:
        break;
    }
    fail(ErrorCode::NotEnumerable, "an external oracle has no enumerable support");
  }

 private:
  explicit InitialDistribution(Kind kind) : kind_(kind) {}

  Kind kind_;
  bool full_range_ = true;
  std::vector<WeightedAssignment> entries_;
  std::vector<std::uint64_t> cumulative_;
  Oracle oracle_;
};

/// JSON lines of {"probability":"p/q","assignment":[typeIndex, ...]}.
inline InitialDistribution parse_distribution_list(std::string_view text) {
  std::vector<WeightedAssignment> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      fail(ErrorCode::MalformedLine, "line " + std::to_string(lineno));
    }
    if (!row.is_object() || !row.contains("probability") || !row.contains("assignment") ||
        !row["assignment"].is_array())
      fail(ErrorCode::MalformedLine, "line " + std::to_string(lineno));
    WeightedAssignment e;
    const auto& p = row["probability"];
    if (p.is_string()) e.probability = parse_rational(p.get<std::string>());
    else if (p.is_number_integer()) e.probability = Rational(std::to_string(p.get<long long>()));
    else fail(ErrorCode::MalformedRational, "line " + std::to_string(lineno));
    for (const auto& t : row["assignment"]) {
      if (!t.is_number_unsigned()) fail(ErrorCode::MalformedLine, "line " + std::to_string(lineno));
      e.assignment.push_back(t.get<TypeIndex>());
    }
    entries.push_back(std::move(e));
  }
  try {
    return InitialDistribution::explicit_list(std::move(entries));
  } catch (const Error& e) {
    // an inconsistent file is an input error, not a caller error
    fail(ErrorCode::MalformedDocument, e.what());
  }
}

}  // namespace moran

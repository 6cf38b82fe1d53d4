#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moran/error.hpp"
#include "moran/fingerprint.hpp"
#include "moran/graph.hpp"
#include "moran/rational.hpp"
#include "moran/types.hpp"

namespace moran {

/// An assignment of types to vertices with cached per-type counts and the
/// total fitness, kept as an integer weight over the type system's shared
/// denominator so updates are exact and O(1).
///
/// A State refers to its TypeSystem, which must outlive it.
class State {
 public:
  State(const TypeSystem& types, std::vector<TypeIndex> assignment)
      : types_(&types), assignment_(std::move(assignment)), counts_(types.size(), 0) {
    if (assignment_.empty()) fail(ErrorCode::InvalidSize, "a state needs at least one vertex");
    for (TypeIndex t : assignment_) {
      if (t >= types.size()) fail(ErrorCode::UnknownType, "type index " + std::to_string(t));
      ++counts_[t];
    }
    Integer total = 0;
    for (TypeIndex j = 0; j < types.size(); ++j) total += from_u64(types.weight(j)) * counts_[j];
    total_weight_ = to_u64(total);
  }

  static State uniform(const TypeSystem& types, std::size_t n, TypeIndex type) {
    return State(types, std::vector<TypeIndex>(n, type));
  }

  const TypeSystem& types() const noexcept { return *types_; }
  std::size_t size() const noexcept { return assignment_.size(); }
  TypeIndex operator[](Vertex v) const { return assignment_[v]; }
  std::span<const TypeIndex> assignment() const noexcept { return assignment_; }
  std::size_t count(TypeIndex j) const { return counts_.at(j); }

  /// F = sum_v f(S(v)) as an exact rational.
  Rational total_fitness() const {
    Rational out(from_u64(total_weight_), types_->weight_denominator());
    out.canonicalize();
    return out;
  }
  std::uint64_t total_weight() const noexcept { return total_weight_; }

  /// S|_{v->w} in place, without the adjacency check.
  void reproduce_unchecked(Vertex v, Vertex w) {
    const TypeIndex from = assignment_[w], to = assignment_[v];
    if (from == to) return;
    assignment_[w] = to;
    --counts_[from];
    ++counts_[to];
    total_weight_ = total_weight_ - types_->weight(from) + types_->weight(to);
#ifdef MORAN_CHECK_INVARIANTS
    assert(recount_matches());
#endif
  }

  /// Recomputes counts and total weight from the raw assignment.
  bool recount_matches() const {
    std::vector<std::size_t> counts(types_->size(), 0);
    std::uint64_t total = 0;
    for (TypeIndex t : assignment_) {
      ++counts[t];
      total += types_->weight(t);
    }
    return counts == counts_ && total == total_weight_;
  }

  // Equality and hashing look at the assignment only.
  friend bool operator==(const State& a, const State& b) { return a.assignment_ == b.assignment_; }

  std::size_t hash() const noexcept {
    std::string_view bytes(reinterpret_cast<const char*>(assignment_.data()),
                           assignment_.size() * sizeof(TypeIndex));
    return static_cast<std::size_t>(fnv1a64(bytes));
  }

 private:
  const TypeSystem* types_;
  std::vector<TypeIndex> assignment_;
  std::vector<std::size_t> counts_;
  std::uint64_t total_weight_ = 0;
};

/// Returns S|_{v->w}: w takes v's type. Throws NotNeighbours unless w is in N(v).
inline State apply_reproduction(const State& s, const Graph& g, Vertex v, Vertex w) {
  if (v >= g.size() || w >= g.size() || !g.adjacent(v, w))
    fail(ErrorCode::NotNeighbours, std::to_string(v) + " -> " + std::to_string(w));
  State next = s;
  next.reproduce_unchecked(v, w);
  return next;
}

/// Psi_j(S): the sum of 1/d(v) over vertices of type j.
inline Rational potential(const State& s, TypeIndex j, const Graph& g) {
  Rational out = 0;
  for (Vertex v = 0; v < s.size(); ++v)
    if (s[v] == j) out += Rational(1, static_cast<unsigned long>(g.degree(v) == 0 ? 1 : g.degree(v)));
  return out;
}

inline std::optional<TypeIndex> is_absorbed(const State& s) {
  const TypeIndex first = s[0];
  return s.count(first) == s.size() ? std::optional<TypeIndex>(first) : std::nullopt;
}

/// How one replicate ended. Fixated means some type holds every vertex;
/// Extinct is only produced by the alpha-stopped rule when alpha died out.
enum class Outcome { Fixated, Extinct, Truncated };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Fixated: return "fixated";
    case Outcome::Extinct: return "extinct";
    case Outcome::Truncated: return "truncated";
  }
  return "unknown";
}

struct AbsorptionRecord {
  Outcome outcome = Outcome::Truncated;
  std::optional<TypeIndex> type;  // fixated type, or the extinct alpha
  std::uint64_t steps = 0;
  std::uint64_t replicate = 0;    // RNG stream identifier under the master seed
};

}  // namespace moran

template <>
struct std::hash<moran::State> {
  std::size_t operator()(const moran::State& s) const noexcept { return s.hash(); }
};

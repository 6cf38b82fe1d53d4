#pragma once

#include <algorithm>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "moran/error.hpp"
#include "moran/rational.hpp"

namespace moran {

using TypeIndex = std::uint32_t;

/// Types, the ordinary type and an exact rational fitness per type, with the
/// derived fitness statistics (f+, f-, f*, tau_max, tau_min, fitness levels).
///
/// Fitness values are also exposed as integer weights over a shared
/// denominator so samplers can draw vertices with exact probabilities.
class TypeSystem {
 public:
  TypeSystem(std::vector<std::string> names, std::vector<Rational> fitness, TypeIndex ordinary = 0)
      : names_(std::move(names)), fitness_(std::move(fitness)), ordinary_(ordinary) {
    if (names_.empty()) fail(ErrorCode::InvalidSize, "at least one type is required");
    if (names_.size() != fitness_.size())
      fail(ErrorCode::InvalidArgument, "names and fitness vectors differ in length");
    std::unordered_set<std::string> seen;
    for (std::size_t j = 0; j < names_.size(); ++j) {
      if (!seen.insert(names_[j]).second) fail(ErrorCode::DuplicateTypeName, names_[j]);
      if (fitness_[j] < 1) fail(ErrorCode::FitnessBelowOne, names_[j] + " has fitness " + to_string(fitness_[j]));
    }
    if (ordinary_ >= names_.size()) fail(ErrorCode::UnknownOrdinary, "index " + std::to_string(ordinary_));
    derive();
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(TypeIndex j) const { return names_.at(j); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Rational& fitness(TypeIndex j) const { return fitness_.at(j); }
  const std::vector<Rational>& fitnesses() const noexcept { return fitness_; }
  TypeIndex ordinary() const noexcept { return ordinary_; }

  std::optional<TypeIndex> index_of(std::string_view name) const {
    for (TypeIndex j = 0; j < names_.size(); ++j)
      if (names_[j] == name) return j;
    return std::nullopt;
  }

  const Rational& f_plus() const noexcept { return levels_.back(); }
  const Rational& f_minus() const noexcept { return levels_.front(); }
  // Largest fitness outside tau_max; absent when every type shares one fitness.
  const std::optional<Rational>& f_star() const noexcept { return f_star_; }
  const std::vector<TypeIndex>& tau_max() const noexcept { return tau_max_; }
  const std::vector<TypeIndex>& tau_min() const noexcept { return tau_min_; }
  bool is_max(TypeIndex j) const { return fitness_.at(j) == f_plus(); }

  // Distinct fitness values f_1 < ... < f_m, their multiplicities l_i and l = max l_i.
  const std::vector<Rational>& levels() const noexcept { return levels_; }
  const std::vector<std::size_t>& multiplicities() const noexcept { return multiplicity_; }
  std::size_t max_multiplicity() const noexcept {
    return *std::max_element(multiplicity_.begin(), multiplicity_.end());
  }
  std::size_t level_of(TypeIndex j) const {
    return static_cast<std::size_t>(std::lower_bound(levels_.begin(), levels_.end(), fitness_.at(j)) -
                                    levels_.begin());
  }

  bool advantageous() const { return fitness_[ordinary_] == f_minus(); }

  /// Integer weight f(j) * L where L is the lcm of all fitness denominators.
  std::uint64_t weight(TypeIndex j) const {
    if (!weights_fit_) fail(ErrorCode::WeightOverflow, "fitness values need more than 64-bit integer weights");
    return weights_[j];
  }
  const Integer& weight_denominator() const noexcept { return denominator_; }

  /// Bit length of all numerators and denominators; diagnostic only.
  std::size_t description_bits() const {
    std::size_t bits = 0;
    for (const auto& f : fitness_)
      bits += mpz_sizeinbase(f.get_num_mpz_t(), 2) + mpz_sizeinbase(f.get_den_mpz_t(), 2);
    return bits;
  }

 private:
  void derive() {
    levels_ = fitness_;
    std::sort(levels_.begin(), levels_.end());
    levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
    multiplicity_.assign(levels_.size(), 0);
    for (const auto& f : fitness_) ++multiplicity_[level_of_value(f)];
    for (TypeIndex j = 0; j < fitness_.size(); ++j) {
      if (fitness_[j] == levels_.back()) tau_max_.push_back(j);
      if (fitness_[j] == levels_.front()) tau_min_.push_back(j);
    }
    if (levels_.size() >= 2) f_star_ = levels_[levels_.size() - 2];

    denominator_ = 1;
    for (const auto& f : fitness_) mpz_lcm(denominator_.get_mpz_t(), denominator_.get_mpz_t(), f.get_den_mpz_t());
    weights_fit_ = true;
    for (const auto& f : fitness_) {
      Integer w = f.get_num() * (denominator_ / f.get_den());
      if (!fits_u64(w)) {
        weights_fit_ = false;
        break;
      }
      weights_.push_back(to_u64(w));
    }
  }

  std::size_t level_of_value(const Rational& f) const {
    return static_cast<std::size_t>(std::lower_bound(levels_.begin(), levels_.end(), f) - levels_.begin());
  }

  std::vector<std::string> names_;
  std::vector<Rational> fitness_;
  TypeIndex ordinary_;
  std::vector<Rational> levels_;
  std::vector<std::size_t> multiplicity_;
  std::vector<TypeIndex> tau_max_, tau_min_;
  std::optional<Rational> f_star_;
  Integer denominator_;
  std::vector<std::uint64_t> weights_;
  bool weights_fit_ = false;
};

inline bool operator==(const TypeSystem& a, const TypeSystem& b) {
  return a.names() == b.names() && a.fitnesses() == b.fitnesses() && a.ordinary() == b.ordinary();
}

/// A parsed type document: the type system plus the optional alpha it names.
struct TypeDocument {
  TypeSystem types;
  std::optional<TypeIndex> alpha;
};

/// Parses {"types":[{"name":..,"fitness":"p/q"}..], "ordinary":.., "alpha":..}.
/// Fitness may be a rational string or a JSON integer.
inline TypeDocument parse_types(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::MalformedDocument, e.what());
  }
  if (!doc.is_object() || !doc.contains("types") || !doc["types"].is_array() || doc["types"].empty())
    fail(ErrorCode::MalformedDocument, "expected an object with a non-empty \"types\" array");
  std::vector<std::string> names;
  std::vector<Rational> fitness;
  for (const auto& entry : doc["types"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() || !entry.contains("fitness"))
      fail(ErrorCode::MalformedDocument, "each type needs a string \"name\" and a \"fitness\"");
    names.push_back(entry["name"].get<std::string>());
    const auto& f = entry["fitness"];
    if (f.is_string())
      fitness.push_back(parse_rational(f.get<std::string>()));
    else if (f.is_number_integer())
      fitness.push_back(Rational(std::to_string(f.get<long long>())));
    else
      fail(ErrorCode::MalformedRational, "fitness of " + names.back() + " must be a \"p/q\" string or an integer");
  }
  if (!doc.contains("ordinary") || !doc["ordinary"].is_string())
    fail(ErrorCode::UnknownOrdinary, "document does not name an ordinary type");
  const auto ordinary_name = doc["ordinary"].get<std::string>();
  auto it = std::find(names.begin(), names.end(), ordinary_name);
  if (it == names.end()) fail(ErrorCode::UnknownOrdinary, ordinary_name);
  TypeSystem types(names, fitness, static_cast<TypeIndex>(it - names.begin()));
  std::optional<TypeIndex> alpha;
  if (doc.contains("alpha") && !doc["alpha"].is_null()) {
    if (!doc["alpha"].is_string()) fail(ErrorCode::MalformedDocument, "\"alpha\" must be a type name");
    alpha = types.index_of(doc["alpha"].get<std::string>());
    if (!alpha) fail(ErrorCode::UnknownType, doc["alpha"].get<std::string>());
  }
  return {std::move(types), alpha};
}

inline nlohmann::json to_json(const TypeSystem& ts) {
  nlohmann::json types = nlohmann::json::array();
  for (TypeIndex j = 0; j < ts.size(); ++j) types.push_back({{"name", ts.name(j)}, {"fitness", to_string(ts.fitness(j))}});
  return {{"types", types}, {"ordinary", ts.name(ts.ordinary())}};
}

enum class Competitor { Max, Min };

/// The two-type system {alpha, beta} and the state map g sending alpha to
/// alpha and every other type to beta.
struct TwoTypeReduction {
  TypeSystem types;                 // index 0 is alpha, index 1 is beta
  TypeIndex competitor;             // beta's index in the original system
  std::vector<TypeIndex> type_map;  // original type -> {0, 1}

  std::vector<TypeIndex> map_assignment(std::span<const TypeIndex> assignment) const {
    std::vector<TypeIndex> out(assignment.size());
    std::transform(assignment.begin(), assignment.end(), out.begin(), [&](TypeIndex t) { return type_map[t]; });
    return out;
  }
};

/// Collapses every type other than alpha into its fittest (Competitor::Max)
/// or least fit (Competitor::Min) representative. Ties pick the lowest index.
inline TwoTypeReduction merge_to_two_types(const TypeSystem& ts, TypeIndex alpha, Competitor mode) {
  if (ts.size() < 2) fail(ErrorCode::SingleType, "merging needs at least two types");
  if (alpha >= ts.size()) fail(ErrorCode::UnknownType, "alpha index " + std::to_string(alpha));
  std::optional<TypeIndex> beta;
  for (TypeIndex j = 0; j < ts.size(); ++j) {
    if (j == alpha) continue;
    if (!beta || (mode == Competitor::Max ? ts.fitness(j) > ts.fitness(*beta) : ts.fitness(j) < ts.fitness(*beta)))
      beta = j;
  }
  std::vector<TypeIndex> map(ts.size(), 1);
  map[alpha] = 0;
  TypeSystem merged({ts.name(alpha), ts.name(*beta)}, {ts.fitness(alpha), ts.fitness(*beta)}, 1);
  return {std::move(merged), *beta, std::move(map)};
}

}  // namespace moran

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "moran/distribution.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"

using namespace moran;
using moran::support::q;
using Assignment = std::vector<TypeIndex>;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

const TypeSystem two_types({"o", "m"}, {q("1"), q("2")}, 0);
const TypeSystem three_types({"o", "a", "b"}, {q("1"), q("2"), q("3")}, 0);

}  // namespace

TEST(SampleDmut, SingleMutantUniformOverVertices) {
  const Graph c5 = cycle_graph(5);
  Rng rng(1);
  const int draws = 100'000;
  std::vector<int> hits(5, 0);
  for (int i = 0; i < draws; ++i) {
    const Assignment s = sample_dmut(c5, two_types, rng);
    ASSERT_EQ(std::count(s.begin(), s.end(), 1), 1);
    ++hits[static_cast<std::size_t>(std::find(s.begin(), s.end(), 1) - s.begin())];
  }
  const double p = 0.2, sigma = std::sqrt(p * (1 - p) / draws);
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(draws), p, 4 * sigma);
}

TEST(SampleDmut, ThreeTypesOnThreeVertices) {
  const Graph k3 = complete_graph(3);
  const auto support_states = enumerate_dmut(k3, three_types);
  ASSERT_EQ(support_states.size(), 6u);
  for (const auto& e : support_states) EXPECT_EQ(e.probability, q("1/6"));
  Rng rng(2);
  const int draws = 60'000;
  std::map<Assignment, int> hits;
  for (int i = 0; i < draws; ++i) ++hits[sample_dmut(k3, three_types, rng)];
  ASSERT_EQ(hits.size(), 6u);
  const double p = 1.0 / 6, sigma = std::sqrt(p * (1 - p) / draws);
  for (const auto& [s, h] : hits) EXPECT_NEAR(h / static_cast<double>(draws), p, 4 * sigma);
}

TEST(SampleDmut, SingleTypeAndTooFewVertices) {
  const TypeSystem one({"o"}, {q("1")}, 0);
  Rng rng(3);
  EXPECT_EQ(sample_dmut(path_graph(4), one, rng), (Assignment{0, 0, 0, 0}));
  const auto only = enumerate_dmut(path_graph(4), one);
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(only[0].probability, 1);
  EXPECT_EQ(code_of([&] { sample_dmut(path_graph(2), three_types, rng); }), ErrorCode::TooFewVertices);
  EXPECT_EQ(code_of([&] { enumerate_dmut(path_graph(2), three_types); }), ErrorCode::TooFewVertices);
}

TEST(InitialDistribution, ExplicitPointMass) {
  const Graph p3 = path_graph(3);
  const auto d = InitialDistribution::explicit_list({{{1, 0, 0}, q("1")}});
  Rng rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(d.sample(p3, two_types, rng), (Assignment{1, 0, 0}));
}

TEST(InitialDistribution, MutDelegatesToDmut) {
  const Graph p3 = path_graph(3);
  Rng a(5), b(5);
  const auto d = InitialDistribution::mut();
  for (int i = 0; i < 100; ++i) EXPECT_EQ(d.sample(p3, two_types, a), sample_dmut(p3, two_types, b));
  EXPECT_EQ(d.enumerate(p3, two_types).size(), 3u);
}

TEST(InitialDistribution, OracleMissingTypeRejected) {
  const Graph p3 = path_graph(3);
  Rng rng(6);
  const auto missing = InitialDistribution::external([](Rng&) { return Assignment{0, 0, 0}; });
  EXPECT_EQ(code_of([&] { missing.sample(p3, two_types, rng); }), ErrorCode::OracleReturnedInvalidState);
  const auto short_state = InitialDistribution::external([](Rng&) { return Assignment{0, 1}; });
  EXPECT_EQ(code_of([&] { short_state.sample(p3, two_types, rng); }), ErrorCode::OracleReturnedInvalidState);
  const auto bad_type = InitialDistribution::external([](Rng&) { return Assignment{0, 1, 4}; });
  EXPECT_EQ(code_of([&] { bad_type.sample(p3, two_types, rng); }), ErrorCode::OracleReturnedInvalidState);
  EXPECT_EQ(code_of([&] { missing.enumerate(p3, two_types); }), ErrorCode::NotEnumerable);
  auto partial = InitialDistribution::external([](Rng&) { return Assignment{0, 0, 0}; });
  partial.allow_partial_range();
  EXPECT_EQ(partial.sample(p3, two_types, rng), (Assignment{0, 0, 0}));
}

TEST(InitialDistribution, ExplicitListFrequenciesAreExact) {
  const Graph p3 = path_graph(3);
  const auto d = InitialDistribution::explicit_list(
      {{{1, 0, 0}, q("1/6")}, {{0, 1, 0}, q("0")}, {{0, 0, 1}, q("1/2")}, {{1, 1, 0}, q("1/3")}});
  Rng rng(7);
  const int draws = 120'000;
  std::map<Assignment, int> hits;
  for (int i = 0; i < draws; ++i) ++hits[d.sample(p3, two_types, rng)];
  EXPECT_EQ(hits.count(Assignment{0, 1, 0}), 0u);
  for (const auto& e : d.entries()) {
    const double p = to_double(e.probability);
    EXPECT_NEAR(hits[e.assignment] / static_cast<double>(draws), p, 4 * std::sqrt(p * (1 - p) / draws) + 1e-12);
  }
}

TEST(ParseDistributionList, RoundTripAndErrors) {
  const auto d = parse_distribution_list(
      "{\"probability\":\"1/4\",\"assignment\":[1,0,0]}\n\n{\"probability\":\"3/4\",\"assignment\":[0,0,1]}\n");
  ASSERT_EQ(d.entries().size(), 2u);
  EXPECT_EQ(d.entries()[1].probability, q("3/4"));
  EXPECT_EQ(d.entries()[1].assignment, (Assignment{0, 0, 1}));
  EXPECT_EQ(code_of([] { parse_distribution_list("{\"probability\":\"1\"}"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { parse_distribution_list("not json"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { parse_distribution_list("{\"probability\":\"1/x\",\"assignment\":[0]}"); }),
            ErrorCode::MalformedRational);
  EXPECT_EQ(code_of([] { parse_distribution_list("{\"probability\":\"1/2\",\"assignment\":[0]}"); }),
            ErrorCode::MalformedDocument);
  EXPECT_EQ(code_of([] { parse_distribution_list(""); }), ErrorCode::MalformedDocument);
}

// Every sample from D_mut is a valid starting state with the right mutant counts.
TEST(SampleDmutProperties, AlwaysInRange) {
  Rng rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 1 + uniform_below(rng, 4);
    const std::size_t n = k + uniform_below(rng, 5);
    std::vector<Rational> f;
    for (std::size_t j = 0; j < k; ++j) f.push_back(Rational(static_cast<unsigned long>(j + 1)));
    const TypeIndex ord = static_cast<TypeIndex>(uniform_below(rng, k));
    const TypeSystem ts = support::make_types(f, ord);
    const Assignment s = sample_dmut(path_graph(n), ts, rng);
    EXPECT_NO_THROW(check_initial_state(s, n, ts));
    for (TypeIndex j = 0; j < k; ++j)
      EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), j)), j == ord ? n - k + 1 : 1u);
  }
}

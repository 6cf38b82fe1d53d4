#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "moran/continuous.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"

using namespace moran;
using moran::support::q;
using Assignment = std::vector<TypeIndex>;

namespace {

const TypeSystem two_types({"o", "m"}, {q("1"), q("2")}, 0);
// alpha = 0 throughout the coupling tests
const TypeSystem lower({"alpha", "beta", "gamma"}, {q("2"), q("1"), q("1")}, 1);
const TypeSystem upper({"alpha", "beta", "gamma"}, {q("2"), q("3/2"), q("3/2")}, 1);

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ContinuousStep, HoldingTimeAndEmbeddedChain) {
  const Graph k2 = complete_graph(2);
  const ContinuousProcess proto(k2, State(two_types, {1, 0}));
  Rng rng(1);
  const int draws = 200'000;
  double sum = 0;
  int first = 0;
  for (int i = 0; i < draws; ++i) {
    ContinuousProcess p = proto;
    const auto e = p.step(rng);
    EXPECT_GT(e.holding, 0.0);
    sum += e.holding;
    first += e.transition.v == 0;
  }
  // Exp(3): mean 1/3, sd 1/3
  EXPECT_NEAR(sum / draws, 1.0 / 3.0, 4 * (1.0 / 3.0) / std::sqrt(draws));
  EXPECT_NEAR(first / static_cast<double>(draws), 2.0 / 3.0, 4 * std::sqrt(2.0 / 9.0 / draws));
}

TEST(ContinuousStep, AbsorbedStateKeepsJumping) {
  const Graph c4 = cycle_graph(4);
  ContinuousProcess p(c4, State(two_types, {1, 1, 1, 1}));
  Rng rng(2);
  double last = 0;
  for (int i = 0; i < 100; ++i) {
    p.step(rng);
    EXPECT_GT(p.time(), last);
    last = p.time();
    EXPECT_EQ(p.state().count(1), 4u);
  }
}

TEST(ContinuousStep, HoldingTimeMeanAtFixedState) {
  const TypeSystem ts({"a", "b", "c"}, {q("1"), q("5/2"), q("7/3")}, 0);
  const Graph g = star_graph(5);
  const ContinuousProcess proto(g, State(ts, {2, 0, 1, 1, 0}));
  const double rate = 1 + 5.0 / 2 + 5.0 / 2 + 7.0 / 3 + 1;
  Rng rng(3);
  const int draws = 100'000;
  double sum = 0;
  for (int i = 0; i < draws; ++i) {
    ContinuousProcess p = proto;
    sum += p.step(rng).holding;
  }
  EXPECT_NEAR(sum / draws, 1 / rate, 4 / rate / std::sqrt(draws));
}

TEST(CoupledRun, IdenticalFitnessKeepsChainsIdentical) {
  const Graph c5 = cycle_graph(5);
  Rng rng(4);
  const Assignment start{0, 1, 2, 1, 0};
  CoupledProcess chain(c5, lower, lower, start, start, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto e = chain.step(rng);
    ASSERT_EQ(e.which, CouplingCase::Shared);
    ASSERT_TRUE(std::equal(chain.first().begin(), chain.first().end(), chain.second().begin()));
  }
  EXPECT_TRUE(chain.subset_holds());
}

TEST(CoupledRun, CycleOfFourNoViolation) {
  const Graph c4 = cycle_graph(4);
  Rng rng(5);
  const Assignment start{0, 1, 2, 1};
  std::ostringstream log;
  write_event_csv_header(log);
  const auto r = coupled_run(c4, lower, upper, start, start, 0, 10'000, rng,
                             [&](const CoupledEvent& e) { write_event_csv(log, e); });
  EXPECT_FALSE(r.violated);
  EXPECT_EQ(r.events, 10'000u);
  EXPECT_GT(r.case_counts[2], 0u);
  std::istringstream in(log.str());
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "event,time,case,v,w");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 10'000u);
}

TEST(CoupledRun, RejectsBrokenHypotheses) {
  const Graph c4 = cycle_graph(4);
  Rng rng(6);
  const Assignment a{0, 1, 1, 1}, b{0, 0, 1, 1};
  EXPECT_EQ(code_of([&] { coupled_run(c4, lower, upper, a, b, 0, 1, rng); }), ErrorCode::HypothesisViolated);
  const TypeSystem shifted({"alpha", "beta", "gamma"}, {q("3"), q("3/2"), q("3/2")}, 1);
  EXPECT_EQ(code_of([&] { coupled_run(c4, lower, shifted, a, a, 0, 1, rng); }), ErrorCode::HypothesisViolated);
  // f(beta) = 3/2 > f'(gamma) = 1
  EXPECT_EQ(code_of([&] { coupled_run(c4, upper, lower, a, a, 0, 1, rng); }), ErrorCode::HypothesisViolated);
  EXPECT_EQ(code_of([&] { coupled_run(c4, lower, upper, a, Assignment{0, 1, 1}, 0, 1, rng); }),
            ErrorCode::HypothesisViolated);
  EXPECT_EQ(code_of([&] { coupled_run(c4, lower, upper, a, Assignment{0, 1, 1, 7}, 0, 1, rng); }),
            ErrorCode::HypothesisViolated);
}

// In the coupled chain, M moves at v with rate f(v) and M' with rate f'(v).
TEST(CoupledRunProperties, MarginalSelectionFrequencies) {
  const Graph g = star_graph(4);
  const Assignment first{0, 1, 0, 2}, second{0, 1, 2, 2};
  const CoupledProcess chain(g, lower, upper, first, second, 0);
  Rng rng(7);
  const int draws = 100'000;
  std::vector<int> moved_first(4, 0), moved_second(4, 0);
  int total_first = 0, total_second = 0;
  for (int i = 0; i < draws; ++i) {
    const auto e = chain.draw(rng);
    if (e.which != CouplingCase::SecondOnly) ++moved_first[e.v], ++total_first;
    if (e.which != CouplingCase::FirstOnly) ++moved_second[e.v], ++total_second;
  }
  auto check = [](const std::vector<int>& hits, int total, const TypeSystem& ts, const Assignment& s) {
    double f_total = 0;
    for (TypeIndex t : s) f_total += to_double(ts.fitness(t));
    for (Vertex v = 0; v < s.size(); ++v) {
      const double p = to_double(ts.fitness(s[v])) / f_total;
      EXPECT_NEAR(hits[v] / static_cast<double>(total), p, 4 * std::sqrt(p * (1 - p) / total)) << v;
    }
  };
  check(moved_first, total_first, lower, first);
  check(moved_second, total_second, upper, second);
}

TEST(CoupledRunProperties, SubsetInvariantOnRandomInstances) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = support::random_connected_graph(2 + uniform_below(rng, 8), rng);
    // f(beta) <= 3/2 <= f'(beta') with a shared alpha fitness
    std::vector<Rational> f{q("5/2")}, fp{q("5/2")};
    for (int j = 0; j < 2; ++j) {
      f.push_back(Rational(static_cast<unsigned long>(2 + uniform_below(rng, 2)), 2ul));
      fp.push_back(Rational(static_cast<unsigned long>(3 + uniform_below(rng, 4)), 2ul));
      f.back().canonicalize();
      fp.back().canonicalize();
    }
    const TypeSystem tf = support::make_types(f, 1), tfp = support::make_types(fp, 1);
    Assignment first(g.size()), second(g.size());
    for (Vertex v = 0; v < g.size(); ++v) {
      first[v] = static_cast<TypeIndex>(uniform_below(rng, 3));
      second[v] = first[v] == 0 && uniform_below(rng, 2) ? TypeIndex{0}
                                                          : static_cast<TypeIndex>(1 + uniform_below(rng, 2));
    }
    const auto r = coupled_run(g, tf, tfp, first, second, 0, 2000, rng);
    ASSERT_FALSE(r.violated) << "trial " << trial;
  }
}

// Mutant fixation on small graph families: exact value, FPTRAS estimate,
// and the closed form where one exists.
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "moran/moran.hpp"

int main() {
  using namespace moran;
  const TypeSystem types({"wild", "mutant"}, {Rational(1), Rational(2)}, 0);
  const TypeIndex mutant = 1;
  const auto dist = InitialDistribution::mut();

  EstimatorConfig cfg;
  cfg.eps = 0.1;
  cfg.delta = 0.1;
  cfg.master_seed = 2024;
  cfg.threads = 4;

  std::vector<std::pair<std::string, Graph>> family = {
      {"complete(6)", complete_graph(6)},
      {"cycle(6)", cycle_graph(6)},
      {"path(6)", path_graph(6)},
      {"star(6)", star_graph(6)},
  };

  std::printf("%-12s %12s %12s %12s %10s\n", "graph", "exact", "estimate", "closed", "1/n");
  for (const auto& [name, g] : family) {
    const auto sol = solve_exact(g, types);
    const auto exact = exact_under_distribution(sol, dist, g, types);
    const auto est = run_fptras(g, types, mutant, dist, cfg);
    std::string closed = "-";
    if (name.rfind("complete", 0) == 0) {
      const auto [lo, hi] = complete_graph_sandwich(types, mutant, g.size(), 1);
      closed = to_string(lo);
      (void)hi;
    }
    std::printf("%-12s %12.6f %12.6f %12s %10.4f\n", name.c_str(), exact.fixation[mutant], est.value, closed.c_str(),
                to_double(fixation_lower_bound(g.size())));
  }
  return 0;
}

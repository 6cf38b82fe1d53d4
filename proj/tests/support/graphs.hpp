#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "moran/graph.hpp"
#include "moran/random.hpp"

namespace moran::support {

inline bool connected(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) parent[find(e.u)] = find(e.v);
  for (std::size_t v = 0; v < n; ++v)
    if (find(v) != find(0)) return false;
  return true;
}

/// All connected graphs on n vertices, one per isomorphism class
/// (1, 1, 2, 6, 21, 112 for n = 1..6).
inline std::vector<Graph> connected_graphs(std::size_t n) {
  std::vector<Edge> pairs;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) pairs.push_back({u, v});
  std::vector<Vertex> perm(n);
  std::set<std::vector<Edge>> canon_seen;
  std::vector<Graph> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (mask >> i & 1) edges.push_back(pairs[i]);
    if (!connected(n, edges)) continue;
    std::iota(perm.begin(), perm.end(), Vertex{0});
    std::vector<Edge> best;
    do {
      std::vector<Edge> relabelled;
      for (const auto& e : edges) {
        Vertex a = perm[e.u], b = perm[e.v];
        relabelled.push_back({std::min(a, b), std::max(a, b)});
      }
      std::sort(relabelled.begin(), relabelled.end());
      if (best.empty() || relabelled < best) best = relabelled;
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (canon_seen.insert(best).second) out.push_back(Graph::from_edges(n, edges));
  }
  return out;
}

/// Random connected graph: a random spanning tree plus each other pair with probability p_extra.
inline Graph random_connected_graph(std::size_t n, Rng& rng, double p_extra = 0.3) {
  std::vector<Edge> edges;
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  for (Vertex v = 1; v < n; ++v) {
    const auto u = static_cast<Vertex>(uniform_below(rng, v));
    edges.push_back({u, v});
    has[u][v] = has[v][u] = 1;
  }
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v)
      if (!has[u][v] && uniform_open01(rng) < p_extra) edges.push_back({u, v});
  return Graph::from_edges(n, edges);
}

}  // namespace moran::support

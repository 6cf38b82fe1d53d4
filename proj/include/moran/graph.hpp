#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moran/error.hpp"
#include "moran/fingerprint.hpp"

namespace moran {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u;
  Vertex v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A simple, undirected, connected graph on vertices 0..n-1.
///
/// Adjacency lists are sorted; the graph is immutable once built, so one
/// instance can be shared read-only by any number of concurrent replicates.
class Graph {
 public:
  /// Validates and builds the graph. Edges may be given in either orientation.
  /// Throws SelfLoop, DuplicateEdge, Disconnected or InvalidSize.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges) {
    if (n == 0) fail(ErrorCode::InvalidSize, "graph needs at least one vertex");
    Graph g;
    g.adjacency_.resize(n);
    for (const Edge& e : edges) {
      if (e.u >= n || e.v >= n)
        fail(ErrorCode::InvalidSize, "edge " + std::to_string(e.u) + " " + std::to_string(e.v) +
                                         " references a vertex >= " + std::to_string(n));
      if (e.u == e.v) fail(ErrorCode::SelfLoop, "edge " + std::to_string(e.u) + " " + std::to_string(e.v));
      g.adjacency_[e.u].push_back(e.v);
      g.adjacency_[e.v].push_back(e.u);
    }
    for (Vertex v = 0; v < n; ++v) {
      auto& nbrs = g.adjacency_[v];
      std::sort(nbrs.begin(), nbrs.end());
      auto dup = std::adjacent_find(nbrs.begin(), nbrs.end());
      if (dup != nbrs.end()) {
        const Vertex a = std::min(v, *dup), b = std::max(v, *dup);
        fail(ErrorCode::DuplicateEdge, "edge " + std::to_string(a) + " " + std::to_string(b));
      }
    }
    g.edge_count_ = edges.size();
    if (auto orphan = g.first_unreachable())
      fail(ErrorCode::Disconnected, "vertex " + std::to_string(*orphan) + " is not reachable from vertex 0");
    return g;
  }

  std::size_t size() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t degree(Vertex v) const { return adjacency_[v].size(); }
  std::span<const Vertex> neighbours(Vertex v) const { return adjacency_[v]; }

  bool adjacent(Vertex v, Vertex w) const {
    const auto& nbrs = adjacency_[v];
    return std::binary_search(nbrs.begin(), nbrs.end(), w);
  }

  /// Canonical edge list: u < v, sorted lexicographically.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (Vertex u = 0; u < size(); ++u)
      for (Vertex v : adjacency_[u])
        if (u < v) out.push_back({u, v});
    return out;
  }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& nbrs : adjacency_) d = std::max(d, nbrs.size());
    return d;
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.adjacency_ == b.adjacency_; }

 private:
  Graph() = default;

  std::optional<Vertex> first_unreachable() const {
    std::vector<char> seen(size(), 0);
    std::vector<Vertex> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      for (Vertex w : adjacency_[v])
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    for (Vertex v = 0; v < size(); ++v)
      if (!seen[v]) return v;
    return std::nullopt;
  }

  std::vector<std::vector<Vertex>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Parses the edge-list format: '#' comments, blank lines, an optional
/// "n <count>" header and one "u v" pair per line.
inline Graph parse_graph(std::string_view text) {
  std::vector<Edge> edges;
  std::optional<std::size_t> declared;
  std::size_t max_index = 0;
  bool any_edge = false;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    auto bad = [&] { fail(ErrorCode::MalformedLine, "line " + std::to_string(lineno)); };
    auto read_index = [&](const std::string& token) -> std::size_t {
      if (token.empty() || token.size() > 9 ||
          !std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }))
        bad();
      return std::stoul(token);
    };
    std::string second, extra;
    if (!(fields >> second) || (fields >> extra)) bad();
    if (first == "n") {
      if (declared || any_edge) bad();
      declared = read_index(second);
      continue;
    }
    const std::size_t u = read_index(first), v = read_index(second);
    if (u == v) fail(ErrorCode::SelfLoop, "line " + std::to_string(lineno) + ": " + std::to_string(u) + " " + std::to_string(v));
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
    max_index = std::max({max_index, u, v});
    any_edge = true;
  }
  std::size_t n = declared.value_or(any_edge ? max_index + 1 : 0);
  if (declared && any_edge && max_index >= *declared)
    fail(ErrorCode::InvalidSize, "edge endpoint " + std::to_string(max_index) + " exceeds declared count " +
                                     std::to_string(*declared));
  return Graph::from_edges(n, edges);
}

inline std::string serialize(const Graph& g) {
  std::string out = "n " + std::to_string(g.size()) + "\n";
  for (const Edge& e : g.edges()) out += std::to_string(e.u) + " " + std::to_string(e.v) + "\n";
  return out;
}

inline std::uint64_t fingerprint(const Graph& g) { return fnv1a64(serialize(g)); }

inline Graph complete_graph(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidSize, "complete graph needs n >= 1");
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) edges.push_back({u, v});
  return Graph::from_edges(n, edges);
}

inline Graph path_graph(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidSize, "path needs n >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});
  return Graph::from_edges(n, edges);
}

inline Graph cycle_graph(std::size_t n) {
  if (n < 3) fail(ErrorCode::InvalidSize, "cycle needs n >= 3");
  std::vector<Edge> edges;
  for (Vertex v = 0; v < n; ++v) edges.push_back({v, static_cast<Vertex>((v + 1) % n)});
  return Graph::from_edges(n, edges);
}

inline Graph star_graph(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidSize, "star needs n >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 1; v < n; ++v) edges.push_back({0, v});
  return Graph::from_edges(n, edges);
}

}  // namespace moran

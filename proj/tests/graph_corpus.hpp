#pragma once

// Small-graph corpora shared by the optimizer tests and the acceptance run.

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oracles/oracles.hpp"
#include "qvnet/topology.hpp"

namespace qvnet::testing {

struct Shape {
  int n;
  std::vector<std::pair<int, int>> edges;
};

/// The connected graphs on 2..4 nodes, one per isomorphism class.
inline std::vector<Shape> connected_shapes() {
  return {
      {2, {{0, 1}}},
      {3, {{0, 1}, {1, 2}}},                                  // path
      {3, {{0, 1}, {1, 2}, {0, 2}}},                          // triangle
      {4, {{0, 1}, {1, 2}, {2, 3}}},                          // path
      {4, {{0, 1}, {0, 2}, {0, 3}}},                          // star
      {4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}},                  // cycle
      {4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}},                  // paw
      {4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}},          // diamond
      {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}},  // complete
  };
}

/// Calls f once for every assignment of capacities lo..hi to the shape's edges.
inline void for_each_capacity(const Shape& s, int lo, int hi, const std::function<void(const oracle::SmallGraph&)>& f) {
  std::vector<int> caps(s.edges.size(), lo);
  for (;;) {
    oracle::SmallGraph g{s.n, {}};
    for (std::size_t i = 0; i < s.edges.size(); ++i) g.add(s.edges[i].first, s.edges[i].second, Rational(caps[i]));
    f(g);
    std::size_t i = 0;
    while (i < caps.size() && caps[i] == hi) caps[i++] = lo;
    if (i == caps.size()) return;
    ++caps[i];
  }
}

inline std::string node_name(int v) { return std::string(1, static_cast<char>('A' + v)); }

inline NetworkGraph to_network(const oracle::SmallGraph& g) {
  GraphSpec spec;
  for (int v = 0; v < g.n; ++v) spec.nodes.push_back(node_name(v));
  for (const auto& [e, c] : g.cap) spec.links.push_back({node_name(e.first), node_name(e.second), c, std::nullopt});
  return build_graph(spec);
}

/// Random connected graph on n nodes: a random spanning tree plus extra edges.
inline oracle::SmallGraph random_connected(std::mt19937_64& rng, int n, int max_cap) {
  oracle::SmallGraph g{n, {}};
  auto cap = [&] { return Rational(1 + static_cast<std::int64_t>(rng() % static_cast<unsigned>(max_cap))); };
  for (int v = 1; v < n; ++v) g.add(v, static_cast<int>(rng() % static_cast<unsigned>(v)), cap());
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (!g.adjacent(u, v) && rng() % 3 == 0) g.add(u, v, cap());
    }
  }
  return g;
}

inline std::vector<std::tuple<int, int, std::int64_t>> integer_edges(const oracle::SmallGraph& g) {
  std::vector<std::tuple<int, int, std::int64_t>> out;
  for (const auto& [e, c] : g.cap) out.emplace_back(e.first, e.second, c.floor());
  return out;
}

}  // namespace qvnet::testing

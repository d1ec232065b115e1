#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qvnet/rational.hpp"

namespace qvnet {

/// Node identifier. Nonempty; ordered lexicographically.
class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string name);

  [[nodiscard]] const std::string& str() const noexcept { return name_; }

  friend bool operator==(const NodeId&, const NodeId&) = default;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;

 private:
  std::string name_;
};

/// Unordered node pair, normalized so that `a() < b()`. Equal endpoints
/// throw ErrorCode::invalid_pair.
class NodePair {
 public:
  NodePair() = default;
  NodePair(NodeId x, NodeId y);

  [[nodiscard]] const NodeId& a() const noexcept { return a_; }
  [[nodiscard]] const NodeId& b() const noexcept { return b_; }
  [[nodiscard]] bool contains(const NodeId& n) const noexcept { return a_ == n || b_ == n; }
  /// "A-B"
  [[nodiscard]] std::string str() const { return a_.str() + "-" + b_.str(); }

  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;

 private:
  NodeId a_;
  NodeId b_;
};

struct PhysicalLink {
  NodePair endpoints;
  Rational rate;  // key blocks per tick
  std::optional<double> distance_km;
};

struct LinkSpec {
  std::string a;
  std::string b;
  Rational rate;
  std::optional<double> distance_km;
};

struct GraphSpec {
  std::vector<std::string> nodes;
  std::vector<LinkSpec> links;
};

/// Simple path; hop i joins nodes[i] and nodes[i+1].
struct Path {
  std::vector<NodeId> nodes;

  [[nodiscard]] std::size_t hop_count() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
  [[nodiscard]] std::vector<NodePair> hops() const;
  [[nodiscard]] Path reversed() const;
  /// "A-B-C"
  [[nodiscard]] std::string str() const;

  friend bool operator==(const Path&, const Path&) = default;
};

/// Validated, immutable physical network. Nodes and links are kept sorted.
class NetworkGraph {
 public:
  [[nodiscard]] const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<PhysicalLink>& links() const noexcept { return links_; }

  [[nodiscard]] bool has_node(const NodeId& n) const;
  [[nodiscard]] const PhysicalLink* find_link(const NodePair& p) const;
  /// Sorted neighbours of `n`.
  [[nodiscard]] const std::vector<NodeId>& neighbours(const NodeId& n) const;

  /// Throws ErrorCode::no_path if the node sequence is not a simple path here.
  void check_path(const Path& p) const;

  friend NetworkGraph build_graph(const GraphSpec& spec);

 private:
  std::vector<NodeId> nodes_;
  std::vector<PhysicalLink> links_;
  std::map<NodeId, std::vector<NodeId>> adjacency_;
};

constexpr std::size_t kDefaultMaxHops = 8;

/// Validates and builds a graph. Errors: UnknownNode, DuplicateLink,
/// SelfLoop, NegativeRate (and DuplicateNode for a repeated node name).
NetworkGraph build_graph(const GraphSpec& spec);

/// All simple paths src→dst with at most `max_hops` hops, ordered by
/// (hop count, node sequence).
std::vector<Path> enumerate_paths(const NetworkGraph& g, const NodeId& src, const NodeId& dst,
                                  std::size_t max_hops = kDefaultMaxHops);

struct ConnectivityEntry {
  NodePair pair;
  bool reachable = false;
};

std::vector<ConnectivityEntry> validate_connectivity(const NetworkGraph& g, const std::set<NodePair>& pairs);

}  // namespace qvnet

#include "qvnet/topology.hpp"

#include <algorithm>
#include <deque>

#include "qvnet/error.hpp"

namespace qvnet {

NodeId::NodeId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw Error(ErrorCode::unknown_node, "empty node name");
}

NodePair::NodePair(NodeId x, NodeId y) {
  if (x == y) throw Error(ErrorCode::invalid_pair, "pair (" + x.str() + "," + y.str() + ") has equal endpoints");
  if (y < x) std::swap(x, y);
  a_ = std::move(x);
  b_ = std::move(y);
}

std::vector<NodePair> Path::hops() const {
  std::vector<NodePair> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) out.emplace_back(nodes[i], nodes[i + 1]);
  return out;
}

Path Path::reversed() const {
  Path p{nodes};
  std::reverse(p.nodes.begin(), p.nodes.end());
  return p;
}

std::string Path::str() const {
  std::string out;
  for (const auto& n : nodes) {
    if (!out.empty()) out += '-';
    out += n.str();
  }
  return out;
}

bool NetworkGraph::has_node(const NodeId& n) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), n);
}

const PhysicalLink* NetworkGraph::find_link(const NodePair& p) const {
  const auto it = std::lower_bound(links_.begin(), links_.end(), p,
                                   [](const PhysicalLink& l, const NodePair& q) { return l.endpoints < q; });
  if (it == links_.end() || it->endpoints != p) return nullptr;
  return &*it;
}

const std::vector<NodeId>& NetworkGraph::neighbours(const NodeId& n) const {
  static const std::vector<NodeId> kNone;
  const auto it = adjacency_.find(n);
  return it == adjacency_.end() ? kNone : it->second;
}

void NetworkGraph::check_path(const Path& p) const {
  if (p.nodes.size() < 2) throw Error(ErrorCode::no_path, "path '" + p.str() + "' has no hops");
  std::set<NodeId> seen;
  for (const auto& n : p.nodes) {
    if (!has_node(n)) throw Error(ErrorCode::no_path, "path '" + p.str() + "' visits unknown node " + n.str());
    if (!seen.insert(n).second) throw Error(ErrorCode::no_path, "path '" + p.str() + "' is not simple");
  }
  for (const auto& hop : p.hops()) {
    if (find_link(hop) == nullptr) throw Error(ErrorCode::no_path, "path '" + p.str() + "' uses missing link " + hop.str());
  }
}

NetworkGraph build_graph(const GraphSpec& spec) {
  NetworkGraph g;
  for (const auto& name : spec.nodes) g.nodes_.emplace_back(name);
  std::sort(g.nodes_.begin(), g.nodes_.end());
  if (const auto dup = std::adjacent_find(g.nodes_.begin(), g.nodes_.end()); dup != g.nodes_.end()) {
    throw Error(ErrorCode::duplicate_node, dup->str());
  }
  for (const auto& l : spec.links) {
    for (const auto* end : {&l.a, &l.b}) {
      if (!g.has_node(NodeId(*end))) throw Error(ErrorCode::unknown_node, *end + " in link " + l.a + "-" + l.b);
    }
    if (l.a == l.b) throw Error(ErrorCode::self_loop, l.a + "-" + l.b);
    if (l.rate < Rational(0)) throw Error(ErrorCode::negative_rate, l.a + "-" + l.b + " rate " + l.rate.to_string());
    g.links_.push_back(PhysicalLink{NodePair(NodeId(l.a), NodeId(l.b)), l.rate, l.distance_km});
  }
  std::sort(g.links_.begin(), g.links_.end(),
            [](const PhysicalLink& x, const PhysicalLink& y) { return x.endpoints < y.endpoints; });
  const auto dup = std::adjacent_find(g.links_.begin(), g.links_.end(), [](const auto& x, const auto& y) {
    return x.endpoints == y.endpoints;
  });
  if (dup != g.links_.end()) throw Error(ErrorCode::duplicate_link, dup->endpoints.str());

  for (const auto& n : g.nodes_) g.adjacency_[n];
  for (const auto& l : g.links_) {
    g.adjacency_[l.endpoints.a()].push_back(l.endpoints.b());
    g.adjacency_[l.endpoints.b()].push_back(l.endpoints.a());
  }
  for (auto& [_, adj] : g.adjacency_) std::sort(adj.begin(), adj.end());
  return g;
}

namespace {

void dfs_paths(const NetworkGraph& g, const NodeId& dst, std::size_t max_hops, std::vector<NodeId>& stack,
               std::set<NodeId>& on_stack, std::vector<Path>& out) {
  const NodeId& here = stack.back();
  if (here == dst) {
    out.push_back(Path{stack});
    return;
  }
  if (stack.size() - 1 == max_hops) return;
  for (const auto& next : g.neighbours(here)) {
    if (on_stack.contains(next)) continue;
    stack.push_back(next);
    on_stack.insert(next);
    dfs_paths(g, dst, max_hops, stack, on_stack, out);
    on_stack.erase(next);
    stack.pop_back();
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const NetworkGraph& g, const NodeId& src, const NodeId& dst,
                                  std::size_t max_hops) {
  if (!g.has_node(src)) throw Error(ErrorCode::unknown_node, src.str());
  if (!g.has_node(dst)) throw Error(ErrorCode::unknown_node, dst.str());
  if (src == dst) throw Error(ErrorCode::invalid_pair, "source equals destination " + src.str());
  std::vector<Path> out;
  std::vector<NodeId> stack{src};
  std::set<NodeId> on_stack{src};
  dfs_paths(g, dst, max_hops, stack, on_stack, out);
  std::stable_sort(out.begin(), out.end(), [](const Path& x, const Path& y) {
    if (x.nodes.size() != y.nodes.size()) return x.nodes.size() < y.nodes.size();
    return x.nodes < y.nodes;
  });
  return out;
}

std::vector<ConnectivityEntry> validate_connectivity(const NetworkGraph& g, const std::set<NodePair>& pairs) {
  std::vector<ConnectivityEntry> report;
  std::map<NodeId, int> component;
  int next_id = 0;
  for (const auto& start : g.nodes()) {
    if (component.contains(start)) continue;
    std::deque<NodeId> queue{start};
    component[start] = next_id;
    while (!queue.empty()) {
      const NodeId n = queue.front();
      queue.pop_front();
      for (const auto& m : g.neighbours(n)) {
        if (component.emplace(m, next_id).second) queue.push_back(m);
      }
    }
    ++next_id;
  }
  for (const auto& p : pairs) {
    for (const auto* n : {&p.a(), &p.b()}) {
      if (!g.has_node(*n)) throw Error(ErrorCode::unknown_node, n->str());
    }
    report.push_back({p, component.at(p.a()) == component.at(p.b())});
  }
  return report;
}

}  // namespace qvnet

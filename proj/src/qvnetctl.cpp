#include "qvnet/qvnetctl.hpp"

#include <algorithm>

#include "qvnet/error.hpp"

namespace qvnet {

std::string_view to_string(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::balanced: return "balanced";
    case BehaviorKind::broadcast: return "broadcast";
    case BehaviorKind::high_throughput: return "high_throughput";
  }
  return "balanced";
}

BehaviorKind parse_behavior_kind(std::string_view text) {
  if (text == "balanced") return BehaviorKind::balanced;
  if (text == "broadcast") return BehaviorKind::broadcast;
  if (text == "high_throughput" || text == "high-throughput") return BehaviorKind::high_throughput;
  throw Error(ErrorCode::parse_error, "unknown behavior '" + std::string(text) + "'");
}

std::string_view to_string(DenyReason reason) {
  switch (reason) {
    case DenyReason::access_denied: return "AccessDenied";
    case DenyReason::quota_exceeded: return "QuotaExceeded";
    case DenyReason::schedule_closed: return "ScheduleClosed";
    case DenyReason::no_path: return "NoPath";
    case DenyReason::insufficient_keys: return "InsufficientKeys";
  }
  return "Unknown";
}

QVNet assemble_qvnet(const std::vector<TrunkLink>& trunks, const SubConnectionId& id) {
  QVNet net;
  net.id = id;
  for (const auto& trunk : trunks) {
    const auto it = trunk.quotas.find(id);
    if (it == trunk.quotas.end()) continue;
    net.qvlinks.push_back(QVLink{trunk.pair, id, it->second * trunk.rate, trunk.kind});
  }
  std::sort(net.qvlinks.begin(), net.qvlinks.end(),
            [](const QVLink& x, const QVLink& y) { return x.pair < y.pair; });
  net.empty = net.qvlinks.empty();
  return net;
}

std::set<NodeId> member_nodes(const QVNet& qvnet) {
  std::set<NodeId> out;
  for (const auto& l : qvnet.qvlinks) {
    out.insert(l.pair.a());
    out.insert(l.pair.b());
  }
  return out;
}

NetworkGraph qvnet_subgraph(const QVNet& qvnet) {
  GraphSpec spec;
  for (const auto& n : member_nodes(qvnet)) spec.nodes.push_back(n.str());
  for (const auto& l : qvnet.qvlinks) {
    if (l.kind != TrunkKind::physical) continue;
    spec.links.push_back(LinkSpec{l.pair.a().str(), l.pair.b().str(), l.rate, std::nullopt});
  }
  return build_graph(spec);
}

std::vector<std::string> check_policy(const QVNet& qvnet) {
  std::vector<std::string> problems;
  const auto members = member_nodes(qvnet);
  const std::string where = "qvnet '" + qvnet.id.str() + "': ";
  const auto& b = qvnet.behavior;
  if (b.kind == BehaviorKind::broadcast) {
    if (!b.hub) problems.push_back(where + "broadcast behavior needs a hub");
    else if (!members.contains(*b.hub)) problems.push_back(where + "hub " + b.hub->str() + " is not a member node");
  }
  if (b.kind == BehaviorKind::high_throughput) {
    if (!b.pair) {
      problems.push_back(where + "high_throughput behavior needs a pair");
    } else {
      for (const auto* n : {&b.pair->first, &b.pair->second}) {
        if (!members.contains(*n)) problems.push_back(where + "pair node " + n->str() + " is not a member node");
      }
      if (b.pair->first == b.pair->second) problems.push_back(where + "high_throughput pair has equal endpoints");
    }
  }
  if (!qvnet.routing.static_routes.empty()) {
    const NetworkGraph sub = qvnet_subgraph(qvnet);
    for (const auto& [key, path] : qvnet.routing.static_routes) {
      try {
        sub.check_path(path);
        if (path.nodes.front() != key.first || path.nodes.back() != key.second) {
          problems.push_back(where + "static route " + path.str() + " does not join " + key.first.str() + " and " +
                             key.second.str());
        }
      } catch (const Error& e) {
        problems.push_back(where + "static route invalid: " + e.what());
      }
    }
  }
  for (const auto& w : qvnet.schedule) {
    if (w.to < w.from) {
      problems.push_back(where + "schedule window [" + std::to_string(w.from) + "," + std::to_string(w.to) +
                         ") is inverted");
    }
  }
  for (const auto& rule : qvnet.access) {
    if (rule.max_blocks_per_tick < 0) problems.push_back(where + "negative max_blocks_per_tick for " + rule.principal);
  }
  return problems;
}

AccessDecision authorize(const QVNet& qvnet, std::string_view principal, const NodePair& pair, std::int64_t count,
                         std::int64_t tick, std::int64_t usage_this_tick) {
  std::optional<std::int64_t> best_limit;
  for (const auto& rule : qvnet.access) {
    if (rule.principal != principal && rule.principal != kWildcardPrincipal) continue;
    if (rule.allowed_pairs && !rule.allowed_pairs->contains(pair)) continue;
    best_limit = std::max(best_limit.value_or(rule.max_blocks_per_tick), rule.max_blocks_per_tick);
  }
  if (!best_limit) return AccessDecision::deny(DenyReason::access_denied);
  if (usage_this_tick + count > *best_limit) return AccessDecision::deny(DenyReason::quota_exceeded);
  if (!qvnet.schedule.empty()) {
    const bool open = std::any_of(qvnet.schedule.begin(), qvnet.schedule.end(),
                                  [tick](const ScheduleWindow& w) { return w.from <= tick && tick < w.to; });
    if (!open) return AccessDecision::deny(DenyReason::schedule_closed);
  }
  return AccessDecision::allow();
}

}  // namespace qvnet

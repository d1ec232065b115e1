#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qvnet/topology.hpp"
#include "qvnet/virtlink.hpp"

namespace qvnet {

enum class BehaviorKind { balanced, broadcast, high_throughput };

std::string_view to_string(BehaviorKind kind);
BehaviorKind parse_behavior_kind(std::string_view text);

struct Behavior {
  BehaviorKind kind = BehaviorKind::balanced;
  std::optional<NodeId> hub;                              // broadcast only
  std::optional<std::pair<NodeId, NodeId>> pair;          // high_throughput only
};

enum class RoutingKind { shortest_path, static_map };

/// Static routes are keyed by the ordered (src, dst) pair; a route for
/// (src, dst) also serves (dst, src) reversed when no explicit reverse exists.
struct RoutingPolicy {
  RoutingKind kind = RoutingKind::shortest_path;
  std::map<std::pair<NodeId, NodeId>, Path> static_routes;
};

constexpr std::string_view kWildcardPrincipal = "*";

struct AccessRule {
  std::string principal;                          // "*" matches anyone
  std::optional<std::set<NodePair>> allowed_pairs;  // empty optional = any pair
  std::int64_t max_blocks_per_tick = 0;
};

/// Half-open tick interval [from, to).
struct ScheduleWindow {
  std::int64_t from = 0;
  std::int64_t to = 0;
};

struct QVNet {
  SubConnectionId id;
  std::vector<QVLink> qvlinks;
  Behavior behavior;
  RoutingPolicy routing;
  std::vector<AccessRule> access;
  std::vector<ScheduleWindow> schedule;  // empty = always open
  bool empty = false;
};

/// Collects the QVLinks of every trunk whose sub-connection set contains
/// `id`. An id carried by no trunk yields an empty QVNet with `empty` set.
QVNet assemble_qvnet(const std::vector<TrunkLink>& trunks, const SubConnectionId& id);

std::set<NodeId> member_nodes(const QVNet& qvnet);

/// Routing substrate of a QVNet: its member nodes joined by its physical
/// QVLinks, each weighted with the QVLink rate.
NetworkGraph qvnet_subgraph(const QVNet& qvnet);

/// Policy consistency problems (hub or pair not a member, static route not
/// inside the QVNet, inverted schedule window); empty when consistent.
std::vector<std::string> check_policy(const QVNet& qvnet);

enum class DenyReason { access_denied, quota_exceeded, schedule_closed, no_path, insufficient_keys };

std::string_view to_string(DenyReason reason);

struct AccessDecision {
  bool allowed = true;
  std::optional<DenyReason> reason;

  static AccessDecision allow() { return {}; }
  static AccessDecision deny(DenyReason r) { return {false, r}; }
  friend bool operator==(const AccessDecision&, const AccessDecision&) = default;
};

/// Checks, in order, that some rule admits principal and pair, that the
/// request fits the most permissive matching per-tick quota, and that the
/// tick falls inside a schedule window.
AccessDecision authorize(const QVNet& qvnet, std::string_view principal, const NodePair& pair, std::int64_t count,
                         std::int64_t tick, std::int64_t usage_this_tick);

}  // namespace qvnet

#include "qvnet/kms_core.hpp"

#include <algorithm>
#include <deque>

#include "qvnet/error.hpp"

namespace qvnet {

std::int64_t LedgerEntry::phys_total() const {
  std::int64_t sum = 0;
  for (const auto& [_, n] : phys_consumed) sum += n;
  return sum;
}

Path route(const QVNet& qvnet, const NodeId& src, const NodeId& dst, std::size_t max_hops) {
  if (src == dst) throw Error(ErrorCode::invalid_pair, "route from " + src.str() + " to itself");

  if (qvnet.routing.kind == RoutingKind::static_map) {
    const auto& routes = qvnet.routing.static_routes;
    if (const auto it = routes.find({src, dst}); it != routes.end()) return it->second;
    if (const auto it = routes.find({dst, src}); it != routes.end()) return it->second.reversed();
    throw Error(ErrorCode::missing_static_route, src.str() + "-" + dst.str() + " in " + qvnet.id.str());
  }

  const auto members = member_nodes(qvnet);
  if (!members.contains(src) || !members.contains(dst)) {
    throw Error(ErrorCode::no_path, src.str() + "-" + dst.str() + " not inside " + qvnet.id.str());
  }
  const NetworkGraph sub = qvnet_subgraph(qvnet);

  // BFS distances to dst, then walk from src always taking the smallest
  // neighbour one step closer: the lexicographically first shortest path.
  std::map<NodeId, std::size_t> dist{{dst, 0}};
  std::deque<NodeId> queue{dst};
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    for (const auto& m : sub.neighbours(n)) {
      if (dist.emplace(m, dist.at(n) + 1).second) queue.push_back(m);
    }
  }
  const auto it = dist.find(src);
  if (it == dist.end() || it->second > max_hops) {
    throw Error(ErrorCode::no_path, src.str() + "-" + dst.str() + " in " + qvnet.id.str());
  }
  Path p{{src}};
  while (p.nodes.back() != dst) {
    const std::size_t d = dist.at(p.nodes.back());
    for (const auto& m : sub.neighbours(p.nodes.back())) {
      const auto md = dist.find(m);
      if (md != dist.end() && md->second + 1 == d) {
        p.nodes.push_back(m);
        break;
      }
    }
  }
  return p;
}

KmsState::KmsState(NetworkGraph graph, std::vector<TrunkLink> trunks, std::vector<QVNet> qvnets, KmsConfig config)
    : graph_(std::make_shared<const NetworkGraph>(std::move(graph))),
      vault_(*graph_),
      trunks_(std::move(trunks)),
      config_(config) {
  for (auto& q : qvnets) {
    const SubConnectionId id = q.id;
    qvnets_.emplace(id, std::move(q));
  }
  for (const auto& t : trunks_) {
    if (t.kind != TrunkKind::physical) continue;
    if (graph_->find_link(t.pair) == nullptr) throw Error(ErrorCode::no_path, "trunk on missing link " + t.pair.str());
    for (const auto& [c, f] : t.quotas) budgets_[{t.pair, c}].rate = f * t.rate;
  }
  rebuild_qvnet_links();
}

void KmsState::rebuild_qvnet_links() {
  for (auto& [id, q] : qvnets_) {
    const QVNet fresh = assemble_qvnet(trunks_, id);
    q.qvlinks = fresh.qvlinks;
    q.empty = fresh.empty;
  }
}

const QVNet& KmsState::qvnet(const SubConnectionId& id) const {
  const auto it = qvnets_.find(id);
  if (it == qvnets_.end()) throw Error(ErrorCode::qvnet_not_found, id.str());
  return it->second;
}

Path KmsState::route(const SubConnectionId& id, const NodeId& src, const NodeId& dst) const {
  return qvnet::route(qvnet(id), src, dst, config_.max_hops);
}

void KmsState::begin_tick(std::int64_t tick) {
  vault_.tick_generate(tick, config_.seed);
  tick_ = tick;
  usage_.clear();

  for (auto& [key, b] : budgets_) {
    b.level = min(b.level + b.rate, b.rate * Rational(config_.carry_ticks));
  }
  for (const auto& t : trunks_) {
    if (t.kind != TrunkKind::physical) continue;
    BlockMap demands;
    for (const auto& [c, _] : t.quotas) demands[c] = budgets_.at({t.pair, c}).level.floor();
    const auto grants = resolve_contention(t, demands, static_cast<std::int64_t>(vault_.available(t.pair)));
    for (const auto& [c, g] : grants) budgets_.at({t.pair, c}).allowance = g;
  }
}

KeyGrant KmsState::request_key(const KeyRequest& req) {
  const QVNet& net = qvnet(req.qvnet_id);
  if (req.count < 1) throw Error(ErrorCode::validation_error, "request count must be positive");
  if (!tick_ || req.tick != *tick_) {
    throw Error(ErrorCode::non_monotonic_tick, "request for tick " + std::to_string(req.tick) + " outside current tick");
  }

  KeyGrant grant;
  grant.request = req;
  LedgerEntry entry;
  entry.tick = req.tick;
  entry.qvnet_id = req.qvnet_id;
  entry.principal = req.principal;
  entry.src = req.src;
  entry.dst = req.dst;
  entry.requested = req.count;

  auto finish = [&](std::optional<DenyReason> reason) {
    grant.denial_reason = grant.granted < req.count ? reason : std::nullopt;
    entry.granted = grant.granted;
    entry.denial_reason = grant.denial_reason;
    ledger_.push_back(std::move(entry));
    return grant;
  };

  const NodePair pair(req.src, req.dst);
  std::int64_t& used = usage_[{req.qvnet_id, req.principal}];
  const auto decision = authorize(net, req.principal, pair, req.count, req.tick, used);
  if (!decision.allowed) return finish(decision.reason);

  Path path;
  try {
    path = qvnet::route(net, req.src, req.dst, config_.max_hops);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::no_path || e.code() == ErrorCode::missing_static_route) {
      return finish(DenyReason::no_path);
    }
    throw;
  }
  entry.path = path;
  const auto hops = path.hops();

  std::int64_t grantable = req.count;
  for (const auto& hop : hops) {
    const auto it = budgets_.find({hop, req.qvnet_id});
    grantable = std::min(grantable, it == budgets_.end() ? 0 : it->second.allowance);
  }

  for (std::int64_t i = 0; i < grantable; ++i) {
    try {
      auto transcript = vault_.xor_relay(path, config_.relay_mode);
      entry.consumed_ids.insert(entry.consumed_ids.end(), transcript.consumed_ids.begin(),
                                transcript.consumed_ids.end());
      grant.transcripts.push_back(std::move(transcript));
      ++grant.granted;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::insufficient_keys) throw;
      break;
    }
  }
  for (const auto& hop : hops) {
    auto& b = budgets_.at({hop, req.qvnet_id});
    b.allowance -= grant.granted;
    b.level -= Rational(grant.granted);
    if (grant.granted > 0) {
      entry.trunk_charges[hop] = grant.granted;
      entry.phys_consumed[hop] = grant.granted;
    }
  }
  used += grant.granted;
  return finish(DenyReason::insufficient_keys);
}

void KmsState::set_quotas(const NodePair& trunk, const QuotaMap& quotas) {
  validate_quotas(quotas);
  const auto it = std::find_if(trunks_.begin(), trunks_.end(), [&](const TrunkLink& t) { return t.pair == trunk; });
  if (it == trunks_.end()) throw Error(ErrorCode::no_path, "no trunk " + trunk.str());
  for (const auto& [c, _] : quotas) {
    if (!it->quotas.contains(c)) throw Error(ErrorCode::unknown_subconnection, c.str() + " on " + trunk.str());
  }
  for (const auto& [c, _] : it->quotas) {
    if (!quotas.contains(c)) throw Error(ErrorCode::unknown_subconnection, c.str() + " missing from new quotas");
  }
  it->quotas = quotas;
  if (it->kind == TrunkKind::physical) {
    for (const auto& [c, f] : quotas) {
      auto& b = budgets_.at({trunk, c});
      b.rate = f * it->rate;
      b.level = min(b.level, b.rate * Rational(config_.carry_ticks));
    }
  }
  rebuild_qvnet_links();
}

Rational KmsState::budget_level(const NodePair& trunk, const SubConnectionId& c) const {
  const auto it = budgets_.find({trunk, c});
  return it == budgets_.end() ? Rational(0) : it->second.level;
}

std::int64_t KmsState::allowance(const NodePair& trunk, const SubConnectionId& c) const {
  const auto it = budgets_.find({trunk, c});
  return it == budgets_.end() ? 0 : it->second.allowance;
}

LedgerReport ledger_report(const std::vector<LedgerEntry>& ledger, std::int64_t from, std::int64_t to) {
  LedgerReport out;
  auto add = [](LedgerTotals& t, const LedgerEntry& e) {
    ++t.requests;
    t.requested += e.requested;
    t.granted += e.granted;
    t.phys_consumed += e.phys_total();
    if (e.denial_reason) t.denied[*e.denial_reason] += e.requested - e.granted;
  };
  for (const auto& e : ledger) {
    if (e.tick < from || e.tick >= to) continue;
    add(out.per_qvnet[e.qvnet_id], e);
    add(out.per_principal[e.principal], e);
    add(out.total, e);
  }
  return out;
}

}  // namespace qvnet

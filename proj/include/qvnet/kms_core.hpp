#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qvnet/keymat.hpp"
#include "qvnet/qvnetctl.hpp"

namespace qvnet {

struct KeyRequest {
  SubConnectionId qvnet_id;
  std::string principal;
  NodeId src;
  NodeId dst;
  std::int64_t count = 1;
  std::int64_t tick = 0;
};

struct KeyGrant {
  KeyRequest request;
  std::int64_t granted = 0;
  std::vector<RelayTranscript> transcripts;
  std::optional<DenyReason> denial_reason;  // set iff granted < count
};

/// One processed request. Every request produces an entry, including denials.
struct LedgerEntry {
  std::int64_t tick = 0;
  SubConnectionId qvnet_id;
  std::string principal;
  NodeId src;
  NodeId dst;
  std::int64_t requested = 0;
  std::int64_t granted = 0;
  std::optional<DenyReason> denial_reason;
  std::optional<Path> path;
  std::map<NodePair, std::int64_t> trunk_charges;  // sub-connection `qvnet_id` on each trunk
  std::map<NodePair, std::int64_t> phys_consumed;
  std::vector<std::uint64_t> consumed_ids;

  [[nodiscard]] std::int64_t phys_total() const;
};

struct KmsConfig {
  std::uint64_t seed = 0;
  RelayMode relay_mode = RelayMode::hop_by_hop;
  std::size_t max_hops = kDefaultMaxHops;
  std::int64_t carry_ticks = 4;  // sub-connection budgets cap at this many ticks of rate
};

/// Fewest-hop path inside the QVNet, ties broken by the lexicographically
/// smallest node sequence, or the configured static route.
/// Errors: InvalidPair (src == dst), NoPath, MissingStaticRoute.
Path route(const QVNet& qvnet, const NodeId& src, const NodeId& dst, std::size_t max_hops = kDefaultMaxHops);

/// Key management for every QVNet of one network, sharing one vault.
///
/// Each tick: `begin_tick` generates key material and refills the
/// per-(trunk, sub-connection) budgets, then requests are served in call
/// order. A budget grows by the QVLink rate each tick up to `carry_ticks`
/// ticks' worth; at the start of a tick the physical blocks on each trunk are
/// split among its sub-connections with `resolve_contention`, using the
/// whole-block budgets as demands, so oversubscribed trunks are shared by
/// quota weight instead of arrival order.
class KmsState {
 public:
  KmsState(NetworkGraph graph, std::vector<TrunkLink> trunks, std::vector<QVNet> qvnets, KmsConfig config);

  void begin_tick(std::int64_t tick);
  KeyGrant request_key(const KeyRequest& req);

  /// Route using the QVNet's routing policy.
  [[nodiscard]] Path route(const SubConnectionId& id, const NodeId& src, const NodeId& dst) const;

  /// Replace a trunk's quota function; only between ticks.
  void set_quotas(const NodePair& trunk, const QuotaMap& quotas);

  [[nodiscard]] const NetworkGraph& graph() const noexcept { return *graph_; }
  [[nodiscard]] const KeyVault& vault() const noexcept { return vault_; }
  [[nodiscard]] const std::vector<TrunkLink>& trunks() const noexcept { return trunks_; }
  [[nodiscard]] const std::map<SubConnectionId, QVNet>& qvnets() const noexcept { return qvnets_; }
  [[nodiscard]] const QVNet& qvnet(const SubConnectionId& id) const;
  [[nodiscard]] const std::vector<LedgerEntry>& ledger() const noexcept { return ledger_; }
  [[nodiscard]] std::optional<std::int64_t> current_tick() const noexcept { return tick_; }

  [[nodiscard]] Rational budget_level(const NodePair& trunk, const SubConnectionId& c) const;
  [[nodiscard]] std::int64_t allowance(const NodePair& trunk, const SubConnectionId& c) const;

 private:
  struct Budget {
    Rational rate;
    Rational level;
    std::int64_t allowance = 0;
  };
  using BudgetKey = std::pair<NodePair, SubConnectionId>;

  void rebuild_qvnet_links();

  std::shared_ptr<const NetworkGraph> graph_;
  KeyVault vault_;
  std::vector<TrunkLink> trunks_;
  std::map<SubConnectionId, QVNet> qvnets_;
  KmsConfig config_;
  std::map<BudgetKey, Budget> budgets_;
  std::map<std::pair<SubConnectionId, std::string>, std::int64_t> usage_;
  std::vector<LedgerEntry> ledger_;
  std::optional<std::int64_t> tick_;
};

struct LedgerTotals {
  std::int64_t requests = 0;
  std::int64_t requested = 0;
  std::int64_t granted = 0;
  std::int64_t phys_consumed = 0;
  std::map<DenyReason, std::int64_t> denied;  // blocks not granted, by reason

  friend bool operator==(const LedgerTotals&, const LedgerTotals&) = default;
};

struct LedgerReport {
  std::map<SubConnectionId, LedgerTotals> per_qvnet;
  std::map<std::string, LedgerTotals> per_principal;
  LedgerTotals total;
};

/// Sums ledger entries with tick in [from, to).
LedgerReport ledger_report(const std::vector<LedgerEntry>& ledger, std::int64_t from, std::int64_t to);

}  // namespace qvnet

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvnet/behavior_opt.hpp"
#include "qvnet/error.hpp"
#include "qvnet/kms_core.hpp"
#include "qvnet/qvnet_updater.hpp"

namespace qvnet {

/// A fully validated scenario. `qvnets` carry both policy and the QVLinks
/// assembled from `trunks`.
struct Scenario {
  std::string name;
  GraphSpec graph_spec;
  NetworkGraph graph;
  std::vector<TrunkLink> trunks;
  std::vector<QVNet> qvnets;
  std::vector<KeyRequest> workload;  // ordered by (tick, sequence)
  std::int64_t duration = 0;
  std::uint64_t seed = 0;
  std::optional<UpdateRule> updater;
  std::size_t max_hops = kDefaultMaxHops;
  RelayMode relay_mode = RelayMode::hop_by_hop;
  std::int64_t window = 100;
  std::int64_t carry_ticks = 4;
  double tick_seconds = 1.0;  // documentation only
};

/// Thrown by `load_scenario` with every problem found, not just the first.
class ScenarioError : public Error {
 public:
  ScenarioError(ErrorCode code, std::vector<std::string> problems);
  [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Errors: ScenarioError with ParseError (malformed JSON) or ValidationError.
Scenario load_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::string& path);

struct TickRow {
  std::int64_t tick = 0;
  SubConnectionId qvnet;
  std::int64_t requested = 0;
  std::int64_t granted = 0;
  std::int64_t denied_access = 0;
  std::int64_t denied_quota = 0;
  std::int64_t denied_schedule = 0;
  std::int64_t denied_nopath = 0;
  std::int64_t denied_insufficient = 0;
  std::int64_t phys_consumed = 0;
};

/// Granted blocks for one target pair of one QVNet over [from, to).
struct PairWindow {
  SubConnectionId qvnet;
  NodePair pair;
  std::int64_t from = 0;
  std::int64_t to = 0;
  std::int64_t granted = 0;

  [[nodiscard]] Rational rate() const { return {granted, to - from}; }
};

struct PlannedAllocation {
  std::optional<Allocation> allocation;
  std::optional<std::string> error;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::int64_t duration = 0;
  std::vector<TickRow> rows;                                 // sorted by (tick, qvnet)
  std::vector<NodePair> links;                               // occupancy column order
  std::vector<std::vector<std::uint64_t>> occupancy;         // per tick, available blocks per link
  std::vector<PairWindow> pair_windows;                      // sorted by (qvnet, pair, from)
  std::map<SubConnectionId, PlannedAllocation> allocations;  // planned before the run
  std::map<NodePair, QuotaMap> final_quotas;
  VaultSnapshot final_vault;
  std::vector<LedgerEntry> ledger;
};

/// Runs the scenario tick by tick: generate keys and refill budgets, serve
/// this tick's requests in order, observe demand, and rebalance quotas when
/// the updater period divides tick+1. Deterministic in (scenario, seed).
MetricsReport run(const Scenario& s);

enum class MetricsFormat { csv, json };

constexpr std::string_view kMetricsCsvHeader =
    "tick,qvnet,requested,granted,denied_access,denied_quota,denied_schedule,denied_nopath,denied_insufficient,"
    "phys_consumed";

std::string emit_metrics(const MetricsReport& r, MetricsFormat format);

/// Allocation as a JSON document (used by `solve`).
std::string allocation_json(const SubConnectionId& id, const LpInstance& lp, const Allocation& alloc);

}  // namespace qvnet

#include "qvnet/sim_engine.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace qvnet {

using nlohmann::json;

namespace {

void count_entry(TickRow& row, const LedgerEntry& e) {
  row.requested += e.requested;
  row.granted += e.granted;
  row.phys_consumed += e.phys_total();
  if (!e.denial_reason) return;
  const std::int64_t denied = e.requested - e.granted;
  switch (*e.denial_reason) {
    case DenyReason::access_denied: row.denied_access += denied; break;
    case DenyReason::quota_exceeded: row.denied_quota += denied; break;
    case DenyReason::schedule_closed: row.denied_schedule += denied; break;
    case DenyReason::no_path: row.denied_nopath += denied; break;
    case DenyReason::insufficient_keys: row.denied_insufficient += denied; break;
  }
}

std::vector<PairWindow> pair_windows(const std::vector<LedgerEntry>& ledger, std::int64_t duration,
                                     std::int64_t window) {
  std::map<std::pair<SubConnectionId, NodePair>, std::map<std::int64_t, std::int64_t>> granted;
  for (const auto& e : ledger) granted[{e.qvnet_id, NodePair(e.src, e.dst)}][e.tick / window] += e.granted;
  std::vector<PairWindow> out;
  for (const auto& [key, per_window] : granted) {
    for (std::int64_t from = 0; from < duration; from += window) {
      const auto it = per_window.find(from / window);
      out.push_back(PairWindow{key.first, key.second, from, std::min(from + window, duration),
                               it == per_window.end() ? 0 : it->second});
    }
  }
  return out;
}

}  // namespace

MetricsReport run(const Scenario& s) {
  MetricsReport report;
  report.scenario = s.name;
  report.seed = s.seed;
  report.duration = s.duration;

  for (const auto& q : s.qvnets) {
    PlannedAllocation planned;
    try {
      const auto lp = build_lp(q, q.behavior, qvnet_capacities(q), s.max_hops);
      planned.allocation = solve_behavior(lp);
    } catch (const Error& e) {
      planned.error = e.what();
    }
    report.allocations.emplace(q.id, std::move(planned));
  }

  KmsConfig config;
  config.seed = s.seed;
  config.relay_mode = s.relay_mode;
  config.max_hops = s.max_hops;
  config.carry_ticks = s.carry_ticks;
  KmsState kms(s.graph, s.trunks, s.qvnets, config);

  for (const auto& l : s.graph.links()) report.links.push_back(l.endpoints);

  DemandStats stats;
  if (s.updater) {
    stats.alpha = s.updater->ewma_alpha;
    for (const auto& t : s.trunks) {
      if (t.kind != TrunkKind::physical) continue;
      for (const auto& [c, _] : t.quotas) stats.series[{t.pair, c}];
    }
  }

  auto next = s.workload.begin();
  for (std::int64_t tick = 0; tick < s.duration; ++tick) {
    kms.begin_tick(tick);
    const std::size_t first_entry = kms.ledger().size();
    for (; next != s.workload.end() && next->tick == tick; ++next) kms.request_key(*next);
    const std::span<const LedgerEntry> slice(kms.ledger().data() + first_entry, kms.ledger().size() - first_entry);

    for (const auto& q : s.qvnets) {
      TickRow row;
      row.tick = tick;
      row.qvnet = q.id;
      for (const auto& e : slice) {
        if (e.qvnet_id == q.id) count_entry(row, e);
      }
      report.rows.push_back(row);
    }
    std::vector<std::uint64_t> occ;
    for (const auto& l : report.links) occ.push_back(kms.vault().available(l));
    report.occupancy.push_back(std::move(occ));

    if (s.updater) {
      stats = observe(std::move(stats), tick_demand(slice, tick), tick);
      if ((tick + 1) % s.updater->period == 0) {
        for (const auto& t : kms.trunks()) {
          if (t.kind != TrunkKind::physical) continue;
          const QuotaMap fresh = snap_quotas(rebalance(t, stats, *s.updater), *s.updater);
          if (fresh != t.quotas) kms.set_quotas(t.pair, fresh);
        }
      }
    }
  }

  for (const auto& t : kms.trunks()) report.final_quotas[t.pair] = t.quotas;
  report.final_vault = kms.vault().snapshot();
  report.ledger = kms.ledger();
  report.pair_windows = pair_windows(report.ledger, s.duration, s.window);
  return report;
}

namespace {

json rational_json(const Rational& r) { return r.to_string(); }

json allocation_body(const Allocation& a, const LpInstance* lp) {
  json j;
  j["behavior"] = std::string(to_string(a.kind));
  j["objective"] = rational_json(a.objective);
  j["objective_value"] = a.objective.to_double();
  j["exact"] = a.exact;
  j["commodities"] = json::array();
  for (std::size_t i = 0; i < a.commodities.size(); ++i) {
    json c;
    c["src"] = a.commodities[i].src.str();
    c["dst"] = a.commodities[i].dst.str();
    c["rate"] = rational_json(a.rates[i]);
    if (lp != nullptr) {
      c["paths"] = json::array();
      for (std::size_t p = 0; p < lp->paths[i].size(); ++p) {
        c["paths"].push_back({{"path", lp->paths[i][p].str()}, {"flow", rational_json(a.path_flows[i][p])}});
      }
    }
    j["commodities"].push_back(std::move(c));
  }
  return j;
}

}  // namespace

std::string allocation_json(const SubConnectionId& id, const LpInstance& lp, const Allocation& alloc) {
  json j = allocation_body(alloc, &lp);
  j["qvnet"] = id.str();
  j["links"] = json::array();
  for (std::size_t e = 0; e < lp.links.size(); ++e) {
    j["links"].push_back({{"link", lp.links[e].str()}, {"capacity", rational_json(lp.capacities[e])}});
  }
  return j.dump(2) + "\n";
}

std::string emit_metrics(const MetricsReport& r, MetricsFormat format) {
  if (format == MetricsFormat::csv) {
    std::ostringstream out;
    out << kMetricsCsvHeader << '\n';
    for (const auto& row : r.rows) {
      out << row.tick << ',' << row.qvnet.str() << ',' << row.requested << ',' << row.granted << ','
          << row.denied_access << ',' << row.denied_quota << ',' << row.denied_schedule << ',' << row.denied_nopath
          << ',' << row.denied_insufficient << ',' << row.phys_consumed << '\n';
    }
    return out.str();
  }

  json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["duration"] = r.duration;
  j["rows"] = json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"tick", row.tick},
                         {"qvnet", row.qvnet.str()},
                         {"requested", row.requested},
                         {"granted", row.granted},
                         {"denied_access", row.denied_access},
                         {"denied_quota", row.denied_quota},
                         {"denied_schedule", row.denied_schedule},
                         {"denied_nopath", row.denied_nopath},
                         {"denied_insufficient", row.denied_insufficient},
                         {"phys_consumed", row.phys_consumed}});
  }
  j["links"] = json::array();
  for (const auto& l : r.links) j["links"].push_back(l.str());
  j["occupancy"] = r.occupancy;
  j["pair_windows"] = json::array();
  for (const auto& w : r.pair_windows) {
    j["pair_windows"].push_back({{"qvnet", w.qvnet.str()},
                                 {"pair", w.pair.str()},
                                 {"from", w.from},
                                 {"to", w.to},
                                 {"granted", w.granted},
                                 {"rate", rational_json(w.rate())}});
  }
  j["allocations"] = json::object();
  for (const auto& [id, planned] : r.allocations) {
    if (planned.allocation) {
      j["allocations"][id.str()] = allocation_body(*planned.allocation, nullptr);
    } else {
      j["allocations"][id.str()] = {{"error", planned.error.value_or("")}};
    }
  }
  j["final_quotas"] = json::object();
  for (const auto& [pair, quotas] : r.final_quotas) {
    json q = json::object();
    for (const auto& [c, f] : quotas) q[c.str()] = rational_json(f);
    j["final_quotas"][pair.str()] = std::move(q);
  }
  j["final_vault"] = json::object();
  for (const auto& [pair, counts] : r.final_vault) {
    j["final_vault"][pair.str()] = {{"available", counts.available},
                                    {"reserved", counts.reserved},
                                    {"consumed", counts.consumed},
                                    {"generated", counts.generated}};
  }
  return j.dump(2) + "\n";
}

}  // namespace qvnet

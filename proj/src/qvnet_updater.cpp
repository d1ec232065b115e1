#include "qvnet/qvnet_updater.hpp"

#include <algorithm>
#include <set>

#include "qvnet/error.hpp"

namespace qvnet {

QuotaBounds UpdateRule::bounds_for(const SubConnectionId& c) const {
  const auto it = bounds.find(c);
  return it == bounds.end() ? QuotaBounds{} : it->second;
}

std::vector<std::string> check_rule(const UpdateRule& rule) {
  std::vector<std::string> problems;
  if (rule.period < 1) problems.push_back("updater period must be >= 1");
  if (rule.ewma_alpha <= Rational(0) || rule.ewma_alpha > Rational(1)) {
    problems.push_back("ewma_alpha must be in (0,1], got " + rule.ewma_alpha.to_string());
  }
  Rational floors;
  for (const auto& [c, b] : rule.bounds) {
    if (b.floor < Rational(0) || b.ceiling > Rational(1)) {
      problems.push_back("bounds of " + c.str() + " must lie in [0,1]");
    }
    if (b.floor > b.ceiling) problems.push_back("floor above ceiling for " + c.str());
    floors += b.floor;
  }
  if (floors > Rational(1)) problems.push_back("quota floors sum to " + floors.to_string() + " > 1");
  return problems;
}

std::map<SeriesKey, DemandSeries> tick_demand(std::span<const LedgerEntry> entries, std::int64_t tick) {
  std::map<SeriesKey, DemandSeries> out;
  for (const auto& e : entries) {
    if (e.tick != tick || !e.path) continue;
    for (const auto& hop : e.path->hops()) {
      auto& s = out[{hop, e.qvnet_id}];
      s.requested_ewma += Rational(e.requested);
      s.granted_ewma += Rational(e.granted);
    }
  }
  return out;
}

DemandStats observe(DemandStats stats, const std::map<SeriesKey, DemandSeries>& current, std::int64_t tick) {
  if (stats.last_tick && tick <= *stats.last_tick) {
    throw Error(ErrorCode::non_monotonic_tick, "observe at tick " + std::to_string(tick));
  }
  stats.last_tick = tick;
  for (const auto& [key, _] : current) stats.series[key];
  const Rational keep = Rational(1) - stats.alpha;
  for (auto& [key, s] : stats.series) {
    const auto it = current.find(key);
    const DemandSeries now = it == current.end() ? DemandSeries{} : it->second;
    s.requested_ewma = (stats.alpha * now.requested_ewma + keep * s.requested_ewma).quantize(kEwmaResolution);
    s.granted_ewma = (stats.alpha * now.granted_ewma + keep * s.granted_ewma).quantize(kEwmaResolution);
  }
  return stats;
}

QuotaMap rebalance(const TrunkLink& trunk, const DemandStats& stats, const UpdateRule& rule) {
  if (const auto problems = check_rule(rule); !problems.empty()) {
    throw Error(ErrorCode::invalid_rule, problems.front());
  }
  struct Item {
    SubConnectionId id;
    Rational demand;
    QuotaBounds bounds;
  };
  std::vector<Item> items;
  Rational total_demand;
  for (const auto& [c, _] : trunk.quotas) {
    const auto it = stats.series.find({trunk.pair, c});
    const Rational d = it == stats.series.end() ? Rational(0) : it->second.requested_ewma;
    items.push_back({c, d, rule.bounds_for(c)});
    total_demand += d;
  }
  if (total_demand.is_zero()) return trunk.quotas;

  // share(level) = clamp(level * demand, floor, ceiling); find the level where
  // the shares sum to 1. The sum is continuous and nondecreasing in level.
  auto share = [](const Item& x, const Rational& level) {
    return min(max(level * x.demand, x.bounds.floor), x.bounds.ceiling);
  };
  auto sum_at = [&](const Rational& level) {
    Rational s;
    for (const auto& x : items) s += share(x, level);
    return s;
  };
  auto result_at = [&](const Rational& level) {
    QuotaMap out;
    for (const auto& x : items) out[x.id] = share(x, level);
    return out;
  };

  Rational saturated;
  for (const auto& x : items) saturated += x.demand.is_zero() ? x.bounds.floor : x.bounds.ceiling;
  if (saturated <= Rational(1)) {
    QuotaMap out;
    for (const auto& x : items) out[x.id] = x.demand.is_zero() ? x.bounds.floor : x.bounds.ceiling;
    return out;
  }

  std::set<Rational> breakpoints{Rational(0)};
  for (const auto& x : items) {
    if (x.demand.is_zero()) continue;
    breakpoints.insert(x.bounds.floor / x.demand);
    breakpoints.insert(x.bounds.ceiling / x.demand);
  }
  Rational lo_level(0);
  for (const auto& b : breakpoints) {
    if (sum_at(b) == Rational(1)) return result_at(b);
    if (sum_at(b) < Rational(1)) {
      lo_level = b;
      continue;
    }
    // The level lies strictly inside (lo_level, b). Items pinned on that
    // interval keep their bound; the free ones split the rest by demand.
    // Working with demand ratios keeps denominators small.
    QuotaMap out;
    Rational pinned;
    Rational free_demand;
    for (const auto& x : items) {
      if (x.demand.is_zero()) {
        out[x.id] = x.bounds.floor;
      } else if (x.bounds.ceiling / x.demand <= lo_level) {
        out[x.id] = x.bounds.ceiling;
      } else if (x.bounds.floor / x.demand >= b) {
        out[x.id] = x.bounds.floor;
      } else {
        free_demand += x.demand;
        continue;
      }
      pinned += out[x.id];
    }
    for (const auto& x : items) {
      if (!out.contains(x.id)) out[x.id] = (x.demand / free_demand) * (Rational(1) - pinned);
    }
    return out;
  }
  // Unreachable: the largest breakpoint saturates every demander.
  return result_at(lo_level);
}

QuotaMap snap_quotas(const QuotaMap& quotas, const UpdateRule& rule) {
  QuotaMap out;
  for (const auto& [c, f] : quotas) out[c] = max(f.quantize(kQuotaResolution), min(rule.bounds_for(c).floor, f));
  return out;
}

}  // namespace qvnet

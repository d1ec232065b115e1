#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qvnet/kms_core.hpp"
#include "qvnet/virtlink.hpp"

namespace qvnet {

struct DemandSeries {
  Rational requested_ewma;
  Rational granted_ewma;
};

using SeriesKey = std::pair<NodePair, SubConnectionId>;

/// Smoothed per-(trunk, sub-connection) demand. EWMA values are rounded down
/// to multiples of 2^-24 after each update to keep denominators bounded, so a
/// silent series decays to exactly zero.
struct DemandStats {
  Rational alpha{1};
  std::map<SeriesKey, DemandSeries> series;
  std::optional<std::int64_t> last_tick;
};

constexpr std::int64_t kEwmaResolution = std::int64_t{1} << 24;

struct QuotaBounds {
  Rational floor{0};
  Rational ceiling{1};
};

struct UpdateRule {
  std::int64_t period = 1;
  Rational ewma_alpha{1};
  std::map<SubConnectionId, QuotaBounds> bounds;  // missing entries use [0, 1]

  [[nodiscard]] QuotaBounds bounds_for(const SubConnectionId& c) const;
};

/// Problems with a rule (period < 1, alpha outside (0,1], floor > ceiling,
/// bounds outside [0,1], floors summing above 1); empty when valid.
std::vector<std::string> check_rule(const UpdateRule& rule);

/// Requested and granted blocks per (trunk, sub-connection) for one tick.
/// A request counts against every trunk on its route.
std::map<SeriesKey, DemandSeries> tick_demand(std::span<const LedgerEntry> entries, std::int64_t tick);

/// ewma' = alpha * current + (1 - alpha) * ewma for every tracked series;
/// series absent from `current` observe zero. Ticks must strictly increase.
DemandStats observe(DemandStats stats, const std::map<SeriesKey, DemandSeries>& current, std::int64_t tick);

/// New quotas for `trunk`, proportional to the requested-demand EWMA,
/// clamped to each sub-connection's [floor, ceiling] with the clamped share
/// redistributed over the rest, so the sum never exceeds 1. Zero total demand
/// returns the current quotas unchanged.
/// Errors: InvalidRule.
QuotaMap rebalance(const TrunkLink& trunk, const DemandStats& stats, const UpdateRule& rule);

constexpr std::int64_t kQuotaResolution = std::int64_t{1} << 20;

/// Rounds each quota down to a multiple of 2^-20, but never below its floor.
/// Bounds and the sum stay satisfied; applied quotas keep small denominators
/// so budget arithmetic cannot overflow over long runs.
QuotaMap snap_quotas(const QuotaMap& quotas, const UpdateRule& rule);

}  // namespace qvnet

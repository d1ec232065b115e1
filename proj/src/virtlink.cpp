#include "qvnet/virtlink.hpp"

#include <algorithm>

#include "qvnet/error.hpp"

namespace qvnet {

SubConnectionId::SubConnectionId(std::string label) : label_(std::move(label)) {
  if (label_.empty()) throw Error(ErrorCode::unknown_subconnection, "empty sub-connection id");
}

Rational TrunkLink::quota_sum() const {
  Rational sum;
  for (const auto& [_, f] : quotas) sum += f;
  return sum;
}

void validate_quotas(const QuotaMap& quotas) {
  if (quotas.empty()) throw Error(ErrorCode::empty_subconn_set, "trunk has no sub-connections");
  for (const auto& [c, f] : quotas) {
    if (f < Rational(0) || f > Rational(1)) {
      throw Error(ErrorCode::invalid_quota, c.str() + " = " + f.to_string());
    }
  }
}

SplitResult split_trunk(const TrunkLink& trunk, const QuotaMap& quotas) {
  validate_quotas(quotas);
  SplitResult out;
  Rational sum;
  for (const auto& [c, f] : quotas) {
    out.qvlinks.push_back(QVLink{trunk.pair, c, f * trunk.rate, trunk.kind});
    sum += f;
  }
  out.oversubscribed = sum > Rational(1);
  return out;
}

namespace {

struct Claim {
  SubConnectionId id;
  Rational weight;
  Rational demand;
  Rational share;
};

// Weighted max-min fill of `capacity` over `claims` (weights must be > 0).
// Returns the capacity left over.
Rational water_fill(std::vector<Claim*> active, Rational capacity) {
  while (!active.empty() && capacity > Rational(0)) {
    Rational total_weight;
    for (const auto* c : active) total_weight += c->weight;
    const Rational level = capacity / total_weight;
    std::vector<Claim*> still_active;
    bool any_saturated = false;
    for (auto* c : active) {
      if (c->demand <= level * c->weight) {
        c->share = c->demand;
        capacity -= c->demand;
        any_saturated = true;
      } else {
        still_active.push_back(c);
      }
    }
    if (!any_saturated) {
      for (auto* c : active) c->share = level * c->weight;
      return Rational(0);
    }
    active = std::move(still_active);
  }
  return capacity;
}

}  // namespace

BlockMap resolve_contention(const TrunkLink& trunk, const BlockMap& demands, std::int64_t available) {
  std::vector<Claim> claims;
  claims.reserve(demands.size());
  for (const auto& [id, demand] : demands) {
    const auto q = trunk.quotas.find(id);
    if (q == trunk.quotas.end()) throw Error(ErrorCode::unknown_subconnection, id.str() + " on " + trunk.pair.str());
    claims.push_back(Claim{id, q->second, Rational(std::max<std::int64_t>(demand, 0)), Rational(0)});
  }

  std::vector<Claim*> weighted;
  std::vector<Claim*> unweighted;
  for (auto& c : claims) {
    if (c.demand.is_zero()) continue;
    (c.weight > Rational(0) ? weighted : unweighted).push_back(&c);
  }
  Rational left = water_fill(weighted, Rational(std::max<std::int64_t>(available, 0)));
  for (auto* c : unweighted) c->weight = Rational(1);
  water_fill(unweighted, left);

  // Largest-remainder rounding. `claims` is already in id order, so a stable
  // sort on the remainder breaks ties lexicographically.
  BlockMap granted;
  Rational exact_total;
  std::int64_t floor_total = 0;
  for (const auto& c : claims) {
    granted[c.id] = c.share.floor();
    floor_total += c.share.floor();
    exact_total += c.share;
  }
  std::int64_t spare = exact_total.floor() - floor_total;
  std::vector<const Claim*> order;
  for (const auto& c : claims) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const Claim* x, const Claim* y) { return x->share.frac() > y->share.frac(); });
  for (const auto* c : order) {
    if (spare <= 0) break;
    if (c->share.frac().is_zero()) break;
    ++granted[c->id];
    --spare;
  }
  return granted;
}

}  // namespace qvnet

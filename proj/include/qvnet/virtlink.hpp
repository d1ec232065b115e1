#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qvnet/topology.hpp"

namespace qvnet {

/// Sub-connection label, e.g. "red". Doubles as the QVNet identifier.
class SubConnectionId {
 public:
  SubConnectionId() = default;
  explicit SubConnectionId(std::string label);

  [[nodiscard]] const std::string& str() const noexcept { return label_; }

  friend bool operator==(const SubConnectionId&, const SubConnectionId&) = default;
  friend auto operator<=>(const SubConnectionId&, const SubConnectionId&) = default;

 private:
  std::string label_;
};

using QuotaMap = std::map<SubConnectionId, Rational>;

enum class TrunkKind { physical, logical };

/// A link viewed as a carrier of sub-connections: pair, rate r, the
/// sub-connection set C (the keys of `quotas`, so k = |C|) and the quota
/// function f. Quotas need not sum to 1.
struct TrunkLink {
  NodePair pair;
  TrunkKind kind = TrunkKind::physical;
  Rational rate;
  QuotaMap quotas;

  [[nodiscard]] std::size_t subconn_count() const noexcept { return quotas.size(); }
  [[nodiscard]] bool carries(const SubConnectionId& c) const { return quotas.contains(c); }
  [[nodiscard]] Rational quota_sum() const;
};

struct QVLink {
  NodePair pair;
  SubConnectionId subconn;
  Rational rate;  // f(c) * r
  TrunkKind kind = TrunkKind::physical;
};

struct SplitResult {
  std::vector<QVLink> qvlinks;  // sorted by sub-connection
  bool oversubscribed = false;  // sum of quotas > 1
};

/// Throws InvalidQuota for a fraction outside [0,1] and EmptySubconnSet for
/// an empty quota map.
void validate_quotas(const QuotaMap& quotas);

/// One QVLink per sub-connection with rate f(c)·r. Oversubscription is
/// reported, not rejected.
SplitResult split_trunk(const TrunkLink& trunk, const QuotaMap& quotas);
inline SplitResult split_trunk(const TrunkLink& trunk) { return split_trunk(trunk, trunk.quotas); }

using BlockMap = std::map<SubConnectionId, std::int64_t>;

/// Divides `available` indivisible blocks among competing sub-connections.
///
/// Weighted max-min water-filling with weights f(c): a sub-connection never
/// gets more than it asked for, and capacity left by satisfied demanders is
/// shared among the rest in proportion to their weights. Fractional shares
/// are turned into whole blocks by largest remainder, ties going to the
/// lexicographically smaller id. Demanders with zero weight are served only
/// from capacity that positive-weight demanders leave unused, in equal shares.
BlockMap resolve_contention(const TrunkLink& trunk, const BlockMap& demands, std::int64_t available);

}  // namespace qvnet

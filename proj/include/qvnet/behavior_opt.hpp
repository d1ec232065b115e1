#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qvnet/qvnetctl.hpp"

namespace qvnet {

/// A target pair. Direction only matters for reporting (broadcast lists the
/// hub first); capacity and rates are direction-free.
struct Commodity {
  NodeId src;
  NodeId dst;
  friend bool operator==(const Commodity&, const Commodity&) = default;
};

/// Path-based max-concurrent-flow program for one QVNet behavior:
///
///   maximize t
///   s.t.  sum of flows over paths crossing link e  <= capacity(e)
///         sum of flows of commodity i              >= t
///         sum of flows of commodity i              <= cap(i)   (logical trunks only)
///         flows >= 0
struct LpInstance {
  BehaviorKind kind = BehaviorKind::balanced;
  std::vector<Commodity> commodities;
  std::vector<std::vector<Path>> paths;  // candidate paths per commodity; one variable each
  std::vector<NodePair> links;           // one capacity constraint each
  std::vector<Rational> capacities;
  std::vector<std::optional<Rational>> commodity_caps;

  [[nodiscard]] std::size_t variable_count() const;
  [[nodiscard]] std::size_t constraint_count() const { return links.size(); }
};

struct Allocation {
  BehaviorKind kind = BehaviorKind::balanced;
  std::vector<Commodity> commodities;
  std::vector<Rational> rates;
  std::vector<std::vector<Rational>> path_flows;  // parallel to LpInstance::paths
  Rational objective;
  bool exact = true;
  std::size_t iterations = 0;
};

using CapacityMap = std::map<NodePair, Rational>;

/// The commodity list a behavior asks for over `members`: every pair for
/// balanced, hub to each other member for broadcast, the single configured
/// pair for high-throughput.
std::vector<Commodity> commodities_for(const Behavior& behavior, const std::set<NodeId>& members);

/// Effective LP capacities of a QVNet: the QVLink rate on each physical trunk.
CapacityMap qvnet_capacities(const QVNet& qvnet);

/// Errors: EmptyQVNet, NoPath (a commodity without candidate path),
/// ValidationError (capacity missing for an underlying link, hub or pair not
/// a member).
LpInstance build_lp(const QVNet& qvnet, const Behavior& behavior, const CapacityMap& capacities,
                    std::size_t max_hops = kDefaultMaxHops);

struct SolveOptions {
  bool exact = true;  // exact rational simplex; otherwise double precision
  std::size_t max_iterations = 100'000;
};

/// Optimal allocation for `lp`. The exact solver falls back to double
/// precision when an optimal value does not fit 64-bit rationals.
/// Errors: NumericalFailure when the iteration cap is hit.
Allocation solve_behavior(const LpInstance& lp, const SolveOptions& options = {});

enum class ViolationKind { shape, negative_flow, capacity, rate_sum, objective, commodity_cap };

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// Independent feasibility and consistency check; returns no violations on
/// success. Exact allocations are checked exactly, others to 1e-9.
std::vector<Violation> verify_allocation(const Allocation& alloc, const LpInstance& lp);

}  // namespace qvnet

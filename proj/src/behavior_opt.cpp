#include "qvnet/behavior_opt.hpp"

#include <gmpxx.h>

#include <cmath>
#include <sstream>

#include "qvnet/error.hpp"
#include "simplex.hpp"

namespace qvnet {

std::size_t LpInstance::variable_count() const {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.size();
  return n;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::shape: return "shape";
    case ViolationKind::negative_flow: return "negative_flow";
    case ViolationKind::capacity: return "capacity";
    case ViolationKind::rate_sum: return "rate_sum";
    case ViolationKind::objective: return "objective";
    case ViolationKind::commodity_cap: return "commodity_cap";
  }
  return "unknown";
}

std::vector<Commodity> commodities_for(const Behavior& behavior, const std::set<NodeId>& members) {
  std::vector<Commodity> out;
  switch (behavior.kind) {
    case BehaviorKind::balanced:
      for (auto i = members.begin(); i != members.end(); ++i) {
        for (auto j = std::next(i); j != members.end(); ++j) out.push_back({*i, *j});
      }
      break;
    case BehaviorKind::broadcast:
      if (!behavior.hub) throw Error(ErrorCode::validation_error, "broadcast behavior without hub");
      if (!members.contains(*behavior.hub)) {
        throw Error(ErrorCode::validation_error, "hub " + behavior.hub->str() + " is not a member");
      }
      for (const auto& n : members) {
        if (n != *behavior.hub) out.push_back({*behavior.hub, n});
      }
      break;
    case BehaviorKind::high_throughput:
      if (!behavior.pair) throw Error(ErrorCode::validation_error, "high_throughput behavior without pair");
      for (const auto* n : {&behavior.pair->first, &behavior.pair->second}) {
        if (!members.contains(*n)) throw Error(ErrorCode::validation_error, "pair node " + n->str() + " is not a member");
      }
      if (behavior.pair->first == behavior.pair->second) {
        throw Error(ErrorCode::invalid_pair, "high_throughput pair has equal endpoints");
      }
      out.push_back({behavior.pair->first, behavior.pair->second});
      break;
  }
  return out;
}

CapacityMap qvnet_capacities(const QVNet& qvnet) {
  CapacityMap caps;
  for (const auto& l : qvnet.qvlinks) {
    if (l.kind == TrunkKind::physical) caps[l.pair] = l.rate;
  }
  return caps;
}

LpInstance build_lp(const QVNet& qvnet, const Behavior& behavior, const CapacityMap& capacities,
                    std::size_t max_hops) {
  if (qvnet.qvlinks.empty()) throw Error(ErrorCode::empty_qvnet, qvnet.id.str());
  const NetworkGraph sub = qvnet_subgraph(qvnet);

  LpInstance lp;
  lp.kind = behavior.kind;
  lp.commodities = commodities_for(behavior, member_nodes(qvnet));
  if (lp.commodities.empty()) throw Error(ErrorCode::empty_qvnet, qvnet.id.str() + " has no target pairs");

  for (const auto& link : sub.links()) {
    const auto it = capacities.find(link.endpoints);
    if (it == capacities.end()) {
      throw Error(ErrorCode::validation_error, "no capacity for link " + link.endpoints.str());
    }
    lp.links.push_back(link.endpoints);
    lp.capacities.push_back(it->second);
  }

  for (const auto& c : lp.commodities) {
    auto paths = enumerate_paths(sub, c.src, c.dst, max_hops);
    if (paths.empty()) throw Error(ErrorCode::no_path, c.src.str() + "-" + c.dst.str());
    lp.paths.push_back(std::move(paths));

    std::optional<Rational> cap;
    const NodePair key(c.src, c.dst);
    for (const auto& l : qvnet.qvlinks) {
      if (l.kind == TrunkKind::logical && l.pair == key) cap = l.rate;
    }
    lp.commodity_caps.push_back(cap);
  }
  return lp;
}

namespace {

mpq_class to_mpq(const Rational& r) {
  mpq_class q(mpz_class(static_cast<long>(r.num())), mpz_class(static_cast<long>(r.den())));
  q.canonicalize();
  return q;
}

std::optional<Rational> from_mpq(const mpq_class& q) {
  if (!q.get_num().fits_slong_p() || !q.get_den().fits_slong_p()) return std::nullopt;
  return Rational(q.get_num().get_si(), q.get_den().get_si());
}

// Row-major constraint system in the column order
//   [path flows of commodity 0, commodity 1, ..., t].
template <class T>
struct Program {
  std::vector<std::vector<T>> a;
  std::vector<T> b;
  std::vector<T> c;
};

template <class T, class Convert>
Program<T> lower(const LpInstance& lp, Convert convert) {
  Program<T> prog;
  const std::size_t n = lp.variable_count() + 1;
  const std::size_t t_col = n - 1;

  std::map<NodePair, std::size_t> link_row;
  for (std::size_t e = 0; e < lp.links.size(); ++e) {
    link_row[lp.links[e]] = e;
    prog.a.emplace_back(n, T(0));
    prog.b.push_back(convert(lp.capacities[e]));
  }
  std::size_t col = 0;
  for (std::size_t i = 0; i < lp.commodities.size(); ++i) {
    std::vector<T> demand_row(n, T(0));
    demand_row[t_col] = T(1);
    std::vector<T> cap_row(n, T(0));
    for (const auto& path : lp.paths[i]) {
      for (const auto& hop : path.hops()) prog.a[link_row.at(hop)][col] += T(1);
      demand_row[col] = T(-1);
      cap_row[col] = T(1);
      ++col;
    }
    prog.a.push_back(std::move(demand_row));
    prog.b.push_back(T(0));
    if (lp.commodity_caps[i]) {
      prog.a.push_back(std::move(cap_row));
      prog.b.push_back(convert(*lp.commodity_caps[i]));
    }
  }
  prog.c.assign(n, T(0));
  prog.c[t_col] = T(1);
  return prog;
}

template <class T, class ToRational>
Allocation package(const LpInstance& lp, const detail::SimplexResult<T>& res, ToRational to_rational) {
  Allocation out;
  out.kind = lp.kind;
  out.commodities = lp.commodities;
  out.iterations = res.iterations;
  std::size_t col = 0;
  for (std::size_t i = 0; i < lp.commodities.size(); ++i) {
    std::vector<Rational> flows;
    T rate(0);
    for (std::size_t p = 0; p < lp.paths[i].size(); ++p) {
      flows.push_back(to_rational(res.x[col]));
      rate += res.x[col];
      ++col;
    }
    out.path_flows.push_back(std::move(flows));
    out.rates.push_back(to_rational(rate));
  }
  out.objective = to_rational(res.objective);
  return out;
}

Allocation solve_double(const LpInstance& lp, std::size_t max_iterations) {
  constexpr double kEps = 1e-12;
  const auto prog = lower<double>(lp, [](const Rational& r) { return r.to_double(); });
  const auto res = detail::simplex_maximize<double>(prog.a, prog.b, prog.c, max_iterations,
                                                    [](double v) { return v > kEps; });
  if (!res) throw Error(ErrorCode::numerical_failure, "simplex iteration cap reached");
  auto approx = [](double v) { return Rational::approximate(std::fabs(v) < kEps ? 0.0 : v); };
  Allocation out = package(lp, *res, approx);
  out.exact = false;
  return out;
}

}  // namespace

Allocation solve_behavior(const LpInstance& lp, const SolveOptions& options) {
  if (lp.commodities.empty() || lp.paths.size() != lp.commodities.size()) {
    throw Error(ErrorCode::empty_qvnet, "LP has no commodities");
  }
  if (!options.exact) return solve_double(lp, options.max_iterations);

  const auto prog = lower<mpq_class>(lp, to_mpq);
  const auto res = detail::simplex_maximize<mpq_class>(prog.a, prog.b, prog.c, options.max_iterations,
                                                       [](const mpq_class& v) { return sgn(v) > 0; });
  if (!res) throw Error(ErrorCode::numerical_failure, "simplex iteration cap reached");

  bool fits = true;
  auto convert = [&fits](const mpq_class& q) {
    const auto r = from_mpq(q);
    if (!r) fits = false;
    return r.value_or(Rational(0));
  };
  Allocation out = package(lp, *res, convert);
  if (!fits) return solve_double(lp, options.max_iterations);
  return out;
}

std::vector<Violation> verify_allocation(const Allocation& alloc, const LpInstance& lp) {
  std::vector<Violation> out;
  auto report = [&out](ViolationKind k, std::string detail) { out.push_back({k, std::move(detail)}); };

  if (alloc.rates.size() != lp.commodities.size() || alloc.path_flows.size() != lp.paths.size()) {
    report(ViolationKind::shape, "commodity count mismatch");
    return out;
  }
  for (std::size_t i = 0; i < lp.paths.size(); ++i) {
    if (alloc.path_flows[i].size() != lp.paths[i].size()) {
      report(ViolationKind::shape, "path count mismatch for commodity " + std::to_string(i));
      return out;
    }
  }

  // Exact comparison for exact allocations, 1e-9 slack otherwise.
  const double tol = alloc.exact ? 0.0 : 1e-9;
  auto exceeds = [&](const Rational& lhs, const Rational& rhs) {
    return alloc.exact ? lhs > rhs : lhs.to_double() > rhs.to_double() + tol;
  };
  auto differs = [&](const Rational& lhs, const Rational& rhs) {
    return alloc.exact ? lhs != rhs : std::fabs(lhs.to_double() - rhs.to_double()) > tol;
  };

  std::map<NodePair, Rational> load;
  for (std::size_t i = 0; i < lp.paths.size(); ++i) {
    Rational sum;
    for (std::size_t p = 0; p < lp.paths[i].size(); ++p) {
      const Rational& f = alloc.path_flows[i][p];
      if (exceeds(Rational(0), f)) report(ViolationKind::negative_flow, lp.paths[i][p].str() + " = " + f.to_string());
      sum += f;
      const auto& nodes = lp.paths[i][p].nodes;
      for (std::size_t h = 0; h + 1 < nodes.size(); ++h) load[NodePair(nodes[h], nodes[h + 1])] += f;
    }
    const std::string name = lp.commodities[i].src.str() + "-" + lp.commodities[i].dst.str();
    if (differs(sum, alloc.rates[i])) {
      report(ViolationKind::rate_sum, name + ": rate " + alloc.rates[i].to_string() + " != flows " + sum.to_string());
    }
    if (lp.commodity_caps[i] && exceeds(sum, *lp.commodity_caps[i])) {
      report(ViolationKind::commodity_cap, name + " exceeds " + lp.commodity_caps[i]->to_string());
    }
  }
  for (std::size_t e = 0; e < lp.links.size(); ++e) {
    const Rational used = load.contains(lp.links[e]) ? load.at(lp.links[e]) : Rational(0);
    if (exceeds(used, lp.capacities[e])) {
      report(ViolationKind::capacity,
             lp.links[e].str() + ": load " + used.to_string() + " > " + lp.capacities[e].to_string());
    }
  }
  for (const auto& [link, used] : load) {
    if (std::find(lp.links.begin(), lp.links.end(), link) == lp.links.end() && used > Rational(0)) {
      report(ViolationKind::capacity, link.str() + " carries flow but has no capacity");
    }
  }

  Rational min_rate = alloc.rates.front();
  for (const auto& r : alloc.rates) min_rate = min(min_rate, r);
  if (differs(alloc.objective, min_rate)) {
    report(ViolationKind::objective,
           "objective " + alloc.objective.to_string() + " != min rate " + min_rate.to_string());
  }
  return out;
}

}  // namespace qvnet

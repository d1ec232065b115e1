#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "qvnet/error.hpp"
#include "qvnet/kms_core.hpp"
#include "test_helpers.hpp"

using namespace qvnet;
using namespace qvnet::testing;

namespace {

QVNet open_qvnet(const std::vector<TrunkLink>& trunks, const std::string& id) {
  QVNet net = assemble_qvnet(trunks, C(id));
  net.access = {open_rule()};
  return net;
}

KmsState single_qvnet_state(const NetworkGraph& g, std::uint64_t seed = 1) {
  const auto trunks = uniform_trunks(g, "red");
  return KmsState(g, trunks, {open_qvnet(trunks, "red")}, KmsConfig{seed});
}

KeyRequest req(const std::string& id, const std::string& principal, const std::string& a, const std::string& b,
               std::int64_t count, std::int64_t tick) {
  return KeyRequest{C(id), principal, N(a), N(b), count, tick};
}

}  // namespace

TEST_CASE("two-hop request consumes one block per physical link") {
  auto kms = single_qvnet_state(chain_abc(R(4)));
  kms.begin_tick(0);
  const auto g = kms.request_key(req("red", "alice", "A", "C", 1, 0));
  CHECK(g.granted == 1);
  CHECK_FALSE(g.denial_reason.has_value());
  REQUIRE(g.transcripts.size() == 1);
  CHECK(g.transcripts[0].consumed_ids.size() == 2);
  REQUIRE(kms.ledger().size() == 1);
  CHECK(kms.ledger()[0].phys_total() == 2);
  CHECK(kms.ledger()[0].path->str() == "A-B-C");
  std::uint64_t consumed = 0;
  for (const auto& [_, c] : kms.vault().snapshot()) consumed += c.consumed;
  CHECK(consumed == 2);
}

TEST_CASE("pair in another component is denied with NoPath") {
  const auto g = build_graph(spec_of({"A", "B", "C", "D"}, {{"A", "B", R(2)}, {"C", "D", R(2)}}));
  auto kms = single_qvnet_state(g);
  kms.begin_tick(0);
  const auto grant = kms.request_key(req("red", "p", "A", "D", 1, 0));
  CHECK(grant.granted == 0);
  CHECK(grant.denial_reason == DenyReason::no_path);
  CHECK_FALSE(kms.ledger()[0].path.has_value());
}

TEST_CASE("request beyond this tick's budget is granted partially") {
  const auto g = build_graph(spec_of({"A", "B"}, {{"A", "B", R(2)}}));
  auto kms = single_qvnet_state(g);
  kms.begin_tick(0);
  CHECK(kms.allowance(P("A", "B"), C("red")) == 2);
  const auto grant = kms.request_key(req("red", "p", "A", "B", 5, 0));
  CHECK(grant.granted == 2);
  CHECK(grant.transcripts.size() == 2);
  CHECK(grant.denial_reason == DenyReason::insufficient_keys);
  CHECK(kms.allowance(P("A", "B"), C("red")) == 0);
}

TEST_CASE("budgets follow an independent replay of rate, carry cap and vault stock") {
  // Fractional rate 3/2 on one link with sub-connection quota 1/2.
  const auto g = build_graph(spec_of({"A", "B"}, {{"A", "B", R(3, 2)}}));
  const std::vector<TrunkLink> trunks{{P("A", "B"), TrunkKind::physical, R(3, 2), {{C("x"), R(1, 2)}, {C("y"), R(1, 2)}}}};
  KmsState kms(g, trunks, {open_qvnet(trunks, "x"), open_qvnet(trunks, "y")}, KmsConfig{3});
  std::mt19937_64 rng(8);

  // Replay state: x's level, y idle; vault stock from floor(t·r).
  Rational level_x;
  Rational level_y;
  std::int64_t consumed = 0;
  for (std::int64_t t = 0; t < 300; ++t) {
    kms.begin_tick(t);
    level_x = min(level_x + R(3, 4), R(3));
    level_y = min(level_y + R(3, 4), R(3));
    const std::int64_t stock = (R(3, 2) * R(t + 1)).floor() - consumed;
    // Both demands fit the stock or are split by weight; replay the split by hand.
    std::int64_t dx = level_x.floor();
    std::int64_t dy = level_y.floor();
    std::int64_t ax = dx;
    std::int64_t ay = dy;
    if (dx + dy > stock) {
      // Equal weights: even split, surplus from the smaller demander to the other, tie to "x".
      const std::int64_t half = stock / 2;
      ax = std::min(dx, half + (stock % 2));
      ay = std::min(dy, stock - ax);
      ax = std::min(dx, stock - ay);
    }
    CHECK(kms.allowance(P("A", "B"), C("x")) == ax);
    CHECK(kms.allowance(P("A", "B"), C("y")) == ay);

    const std::int64_t ask = static_cast<std::int64_t>(rng() % 4);
    if (ask > 0) {
      const auto grant = kms.request_key(req("x", "p", "A", "B", ask, t));
      CHECK(grant.granted == std::min(ask, ax));
      level_x -= R(grant.granted);
      consumed += grant.granted;
    }
    CHECK(kms.budget_level(P("A", "B"), C("x")) == level_x);
  }
}

TEST_CASE("route picks the lexicographically first shortest path") {
  auto kms = single_qvnet_state(diamond());
  CHECK(kms.route(C("red"), N("A"), N("D")).str() == "A-B-D");
  CHECK(kms.route(C("red"), N("D"), N("A")).str() == "D-B-A");
  try {
    (void)kms.route(C("red"), N("A"), N("A"));
    FAIL("expected InvalidPair");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_pair);
  }
  CHECK_THROWS_AS((void)kms.route(C("blue"), N("A"), N("D")), Error);

  QVNet fixed = whole_graph_qvnet(diamond());
  fixed.routing.kind = RoutingKind::static_map;
  fixed.routing.static_routes[{N("A"), N("D")}] = path_of({"A", "C", "D"});
  CHECK(route(fixed, N("A"), N("D")).str() == "A-C-D");
  CHECK(route(fixed, N("D"), N("A")).str() == "D-C-A");
  try {
    (void)route(fixed, N("B"), N("C"));
    FAIL("expected MissingStaticRoute");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_static_route);
  }
}

TEST_CASE("route agrees with the first enumerated path") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    GraphSpec spec;
    const int n = 3 + static_cast<int>(rng() % 4);
    for (int v = 0; v < n; ++v) spec.nodes.push_back(std::string(1, static_cast<char>('A' + v)));
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (rng() % 2) spec.links.push_back({spec.nodes[u], spec.nodes[v], R(1), std::nullopt});
      }
    }
    const auto g = build_graph(spec);
    const auto net = whole_graph_qvnet(g);
    if (net.empty) continue;
    const auto members = member_nodes(net);
    for (const auto& s : members) {
      for (const auto& d : members) {
        if (s == d) continue;
        const auto paths = enumerate_paths(qvnet_subgraph(net), s, d);
        if (paths.empty()) {
          CHECK_THROWS_AS((void)route(net, s, d), Error);
        } else {
          CHECK(route(net, s, d) == paths.front());
        }
      }
    }
  }
}

TEST_CASE("denials are recorded with their reason") {
  const auto g = chain_abc(R(4));
  const auto trunks = uniform_trunks(g, "red");
  QVNet net = assemble_qvnet(trunks, C("red"));
  net.access = {AccessRule{"alice", std::set<NodePair>{P("A", "C")}, 3}};
  net.schedule = {ScheduleWindow{0, 2}};
  KmsState kms(g, trunks, {net}, KmsConfig{});
  kms.begin_tick(0);
  CHECK(kms.request_key(req("red", "bob", "A", "C", 1, 0)).denial_reason == DenyReason::access_denied);
  CHECK(kms.request_key(req("red", "alice", "A", "C", 2, 0)).granted == 2);
  CHECK(kms.request_key(req("red", "alice", "A", "C", 2, 0)).denial_reason == DenyReason::quota_exceeded);
  kms.begin_tick(1);
  CHECK(kms.request_key(req("red", "alice", "A", "C", 2, 1)).granted == 2);  // usage resets per tick
  kms.begin_tick(2);
  CHECK(kms.request_key(req("red", "alice", "A", "C", 1, 2)).denial_reason == DenyReason::schedule_closed);
  CHECK_THROWS_AS(kms.request_key(req("nope", "alice", "A", "C", 1, 2)), Error);
  CHECK_THROWS_AS(kms.request_key(req("red", "alice", "A", "C", 1, 1)), Error);  // stale tick

  const auto rep = ledger_report(kms.ledger(), 0, 3);
  CHECK(rep.total.requests == 5);
  CHECK(rep.total.granted == 4);
  CHECK(rep.total.phys_consumed == 8);
  CHECK(rep.per_principal.at("bob").denied.at(DenyReason::access_denied) == 1);
  CHECK(rep.per_principal.at("alice").denied.at(DenyReason::quota_exceeded) == 2);
  CHECK(ledger_report(kms.ledger(), 5, 9).total == LedgerTotals{});
  CHECK(ledger_report(kms.ledger(), 1, 2).total.granted == 2);
}

TEST_CASE("ledger groups by QVNet") {
  const auto g = chain_abc(R(4));
  std::vector<TrunkLink> trunks;
  for (const auto& l : g.links()) {
    trunks.push_back(TrunkLink{l.endpoints, TrunkKind::physical, l.rate, {{C("red"), R(1, 2)}, {C("blue"), R(1, 2)}}});
  }
  KmsState kms(g, trunks, {open_qvnet(trunks, "red"), open_qvnet(trunks, "blue")}, KmsConfig{});
  kms.begin_tick(0);
  kms.request_key(req("red", "p", "A", "C", 1, 0));
  kms.request_key(req("blue", "p", "A", "B", 1, 0));
  const auto rep = ledger_report(kms.ledger(), 0, 1);
  REQUIRE(rep.per_qvnet.size() == 2);
  CHECK(rep.per_qvnet.begin()->first == C("blue"));
  CHECK(rep.per_qvnet.at(C("red")).phys_consumed == 2);
  CHECK(rep.per_qvnet.at(C("blue")).phys_consumed == 1);
  CHECK(rep.per_principal.size() == 1);
}

TEST_CASE("first-come first-served starves a direct pair, a reserved sub-connection does not") {
  const auto g = chain_abc(R(2));
  auto run = [&](bool reserve) {
    std::vector<TrunkLink> trunks;
    if (reserve) {
      trunks = {TrunkLink{P("A", "B"), TrunkKind::physical, R(2), {{C("main"), R(1, 2)}, {C("ab"), R(1, 2)}}},
                TrunkLink{P("B", "C"), TrunkKind::physical, R(2), {{C("main"), R(1)}}}};
    } else {
      trunks = uniform_trunks(g, "main");
    }
    std::vector<QVNet> nets{open_qvnet(trunks, "main")};
    if (reserve) nets.push_back(open_qvnet(trunks, "ab"));
    KmsState kms(g, trunks, nets, KmsConfig{4});
    std::int64_t ab = 0;
    for (std::int64_t t = 0; t < 200; ++t) {
      kms.begin_tick(t);
      kms.request_key(req("main", "flood", "A", "C", 10, t));
      ab += kms.request_key(req(reserve ? "ab" : "main", "direct", "A", "B", 10, t)).granted;
    }
    return ab;
  };
  CHECK(run(false) == 0);
  CHECK(run(true) >= 200 - 2);  // rate 1 per tick over 200 ticks
}

TEST_CASE("flooding one QVNet leaves the other's grants unchanged") {
  const auto g = chain_abc(R(4));
  std::vector<TrunkLink> trunks;
  for (const auto& l : g.links()) {
    trunks.push_back(TrunkLink{l.endpoints, TrunkKind::physical, l.rate, {{C("red"), R(1, 4)}, {C("blue"), R(3, 4)}}});
  }
  auto run = [&](bool flood) {
    KmsState kms(g, trunks, {open_qvnet(trunks, "red"), open_qvnet(trunks, "blue")}, KmsConfig{6});
    std::vector<std::int64_t> red;
    for (std::int64_t t = 0; t < 150; ++t) {
      kms.begin_tick(t);
      if (flood) kms.request_key(req("blue", "b", "A", "C", 100, t));
      red.push_back(kms.request_key(req("red", "r", "A", "C", 3, t)).granted);
      if (flood) kms.request_key(req("blue", "b", "B", "C", 100, t));
    }
    return red;
  };
  CHECK(run(true) == run(false));
}

TEST_CASE("set_quotas rescales budgets and QVLinks") {
  const auto g = build_graph(spec_of({"A", "B"}, {{"A", "B", R(8)}}));
  const std::vector<TrunkLink> trunks{{P("A", "B"), TrunkKind::physical, R(8), {{C("x"), R(1, 2)}, {C("y"), R(1, 2)}}}};
  KmsState kms(g, trunks, {open_qvnet(trunks, "x"), open_qvnet(trunks, "y")}, KmsConfig{});
  for (std::int64_t t = 0; t < 5; ++t) kms.begin_tick(t);
  CHECK(kms.budget_level(P("A", "B"), C("x")) == R(16));
  kms.set_quotas(P("A", "B"), {{C("x"), R(1, 8)}, {C("y"), R(7, 8)}});
  CHECK(kms.budget_level(P("A", "B"), C("x")) == R(4));
  CHECK(kms.qvnet(C("y")).qvlinks[0].rate == R(7));
  CHECK_THROWS_AS(kms.set_quotas(P("A", "B"), {{C("x"), R(1)}}), Error);
  CHECK_THROWS_AS(kms.set_quotas(P("A", "B"), {{C("x"), R(1, 2)}, {C("z"), R(1, 2)}}), Error);
}

TEST_CASE("random workloads conserve blocks, never reuse ids and replay deterministically") {
  const auto g = build_graph(spec_of({"A", "B", "C", "D"},
                                     {{"A", "B", R(3)}, {"B", "C", R(5, 2)}, {"C", "D", R(2)}, {"A", "D", R(1)}}));
  std::vector<TrunkLink> trunks;
  for (const auto& l : g.links()) {
    trunks.push_back(TrunkLink{l.endpoints, TrunkKind::physical, l.rate, {{C("red"), R(1, 3)}, {C("blue"), R(2, 3)}}});
  }
  auto run = [&] {
    KmsState kms(g, trunks, {open_qvnet(trunks, "red"), open_qvnet(trunks, "blue")}, KmsConfig{99});
    std::mt19937_64 rng(4);
    const std::vector<std::string> names{"A", "B", "C", "D"};
    for (std::int64_t t = 0; t < 400; ++t) {
      kms.begin_tick(t);
      for (int k = 0; k < 3; ++k) {
        const auto& a = names[rng() % 4];
        const auto& b = names[rng() % 4];
        if (a == b) continue;
        const auto grant = kms.request_key(req(rng() % 2 ? "red" : "blue", "p", a, b, 1 + static_cast<std::int64_t>(rng() % 3), t));
        CHECK(grant.granted == static_cast<std::int64_t>(grant.transcripts.size()));
        CHECK(grant.denial_reason.has_value() == (grant.granted < grant.request.count));
      }
    }
    return kms;
  };
  const auto kms = run();
  std::set<std::uint64_t> ids;
  std::int64_t phys = 0;
  for (const auto& e : kms.ledger()) {
    for (auto id : e.consumed_ids) CHECK(ids.insert(id).second);
    phys += e.phys_total();
    if (e.path) CHECK(e.phys_total() == e.granted * static_cast<std::int64_t>(e.path->hop_count()));
  }
  std::uint64_t consumed = 0;
  for (const auto& [_, c] : kms.vault().snapshot()) {
    CHECK(c.generated == c.available + c.reserved + c.consumed);
    CHECK(c.reserved == 0);
    consumed += c.consumed;
  }
  CHECK(static_cast<std::uint64_t>(phys) == consumed);
  CHECK(phys > 0);

  const auto again = run();
  REQUIRE(again.ledger().size() == kms.ledger().size());
  for (std::size_t i = 0; i < kms.ledger().size(); ++i) {
    CHECK(again.ledger()[i].consumed_ids == kms.ledger()[i].consumed_ids);
    CHECK(again.ledger()[i].granted == kms.ledger()[i].granted);
  }
}

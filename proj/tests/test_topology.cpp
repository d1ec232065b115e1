#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles/oracles.hpp"
#include "qvnet/error.hpp"
#include "qvnet/topology.hpp"
#include "test_helpers.hpp"

using namespace qvnet;
using namespace qvnet::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected qvnet::Error");
  return ErrorCode::overflow;
}

}  // namespace

TEST_CASE("rational arithmetic stays exact") {
  CHECK(R(1, 2) + R(1, 4) == R(3, 4));
  CHECK(R(8) * R(1, 8) == R(1));
  CHECK(R(-3, 2).floor() == -2);
  CHECK(R(7, 2).frac() == R(1, 2));
  CHECK(Rational::parse("3/6") == R(1, 2));
  CHECK(Rational::parse("0.125") == R(1, 8));
  CHECK(Rational::parse("-2.5") == R(-5, 2));
  CHECK(Rational::parse(" 4 ") == R(4));
  CHECK(R(6, -4).to_string() == "-3/2");
  CHECK(Rational::approximate(0.333333333333) == R(1, 3));
  CHECK(R(1, 3).quantize(24) == R(8, 24));
  CHECK(code_of([] { (void)Rational::parse("1/0"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { (void)Rational::parse("abc"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { (void)(R(INT64_MAX) + R(1)); }) == ErrorCode::overflow);
}

TEST_CASE("build_graph accepts minimal and chain graphs") {
  const auto g = build_graph(spec_of({"A", "B"}, {{"A", "B", R(4)}}));
  CHECK(g.nodes().size() == 2);
  CHECK(g.links().size() == 1);
  CHECK(g.find_link(P("B", "A"))->rate == R(4));

  const auto chain = chain_abc();
  CHECK(chain.nodes().size() == 3);
  CHECK(chain.links().size() == 2);
  CHECK(chain.find_link(P("A", "C")) == nullptr);
}

TEST_CASE("build_graph rejects malformed input") {
  CHECK(code_of([] { build_graph(spec_of({"A"}, {{"A", "A", R(1)}})); }) == ErrorCode::self_loop);
  CHECK(code_of([] { build_graph(spec_of({"A"}, {{"A", "B", R(1)}})); }) == ErrorCode::unknown_node);
  CHECK(code_of([] { build_graph(spec_of({"A", "B"}, {{"A", "B", R(1)}, {"B", "A", R(2)}})); }) ==
        ErrorCode::duplicate_link);
  CHECK(code_of([] { build_graph(spec_of({"A", "B"}, {{"A", "B", R(-1)}})); }) == ErrorCode::negative_rate);
  CHECK(code_of([] { build_graph(spec_of({"A", "A"}, {})); }) == ErrorCode::duplicate_node);
}

TEST_CASE("enumerate_paths examples") {
  const auto chain = chain_abc();
  const auto cp = enumerate_paths(chain, N("A"), N("C"), 4);
  REQUIRE(cp.size() == 1);
  CHECK(cp[0].str() == "A-B-C");

  // Frozen from the brute-force oracle: diamond A→D has exactly two paths.
  oracle::SmallGraph d{4, {}};
  d.add(0, 1, R(1));
  d.add(0, 2, R(1));
  d.add(1, 3, R(1));
  d.add(2, 3, R(1));
  CHECK(oracle::brute_force_paths(d, 0, 3, 4) == std::set<std::vector<int>>{{0, 1, 3}, {0, 2, 3}});
  const auto dp = enumerate_paths(diamond(), N("A"), N("D"), 4);
  REQUIRE(dp.size() == 2);
  CHECK(dp[0].str() == "A-B-D");
  CHECK(dp[1].str() == "A-C-D");

  const auto split = build_graph(spec_of({"A", "B", "C", "D"}, {{"A", "B", R(1)}, {"C", "D", R(1)}}));
  CHECK(enumerate_paths(split, N("A"), N("D")).empty());

  CHECK(code_of([&] { enumerate_paths(chain, N("A"), N("Z")); }) == ErrorCode::unknown_node);
  CHECK(enumerate_paths(chain, N("A"), N("C"), 1).empty());
}

TEST_CASE("enumerate_paths matches brute force on random graphs up to six nodes") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    oracle::SmallGraph sg{n, {}};
    GraphSpec spec;
    for (int v = 0; v < n; ++v) spec.nodes.push_back(std::string(1, static_cast<char>('A' + v)));
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (rng() % 2 == 0) continue;
        sg.add(u, v, R(1));
        spec.links.push_back({spec.nodes[u], spec.nodes[v], R(1), std::nullopt});
      }
    }
    const auto g = build_graph(spec);
    const int max_hops = 1 + static_cast<int>(rng() % 5);
    const auto expected = oracle::brute_force_paths(sg, 0, n - 1, max_hops);
    const auto got = enumerate_paths(g, N("A"), NodeId(spec.nodes[n - 1]), static_cast<std::size_t>(max_hops));
    std::set<std::vector<int>> got_set;
    for (const auto& p : got) {
      std::vector<int> seq;
      for (const auto& node : p.nodes) seq.push_back(node.str()[0] - 'A');
      got_set.insert(seq);
    }
    CHECK(got_set.size() == got.size());  // duplicate-free
    CHECK(got_set == expected);
    for (std::size_t i = 1; i < got.size(); ++i) {
      const bool ordered = got[i - 1].hop_count() < got[i].hop_count() ||
                           (got[i - 1].hop_count() == got[i].hop_count() && got[i - 1].nodes < got[i].nodes);
      CHECK(ordered);
    }
  }
}

TEST_CASE("path ordering does not depend on input order") {
  std::vector<std::tuple<std::string, std::string, Rational>> links{
      {"A", "B", R(1)}, {"A", "C", R(1)}, {"B", "D", R(1)}, {"C", "D", R(1)}, {"B", "C", R(1)}, {"D", "E", R(1)}};
  std::vector<std::string> nodes{"A", "B", "C", "D", "E"};
  const auto reference = enumerate_paths(build_graph(spec_of(nodes, links)), N("A"), N("E"));
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(links.begin(), links.end(), rng);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    auto flipped = links;
    for (auto& [a, b, r] : flipped) {
      if (rng() % 2) std::swap(a, b);
    }
    CHECK(enumerate_paths(build_graph(spec_of(nodes, flipped)), N("A"), N("E")) == reference);
  }
}

TEST_CASE("validate_connectivity") {
  const auto chain = chain_abc();
  auto rep = validate_connectivity(chain, {P("A", "C")});
  REQUIRE(rep.size() == 1);
  CHECK(rep[0].reachable);

  const auto two = build_graph(spec_of({"A", "B", "C", "D"}, {{"A", "B", R(1)}, {"C", "D", R(1)}}));
  rep = validate_connectivity(two, {P("A", "D"), P("C", "D")});
  REQUIRE(rep.size() == 2);
  CHECK_FALSE(rep[0].reachable);
  CHECK(rep[1].reachable);

  CHECK(validate_connectivity(chain, {}).empty());
  CHECK(code_of([&] { validate_connectivity(chain, {P("A", "Q")}); }) == ErrorCode::unknown_node);
}

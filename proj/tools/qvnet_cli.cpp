// qvnet: validate, solve, run and split QKD virtual network scenarios.
//
// Exit status: 0 on success, 1 when the scenario or a referenced entity is
// invalid, 2 on usage errors.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qvnet/sim_engine.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

int report(const qvnet::ScenarioError& e) {
  std::cerr << "invalid scenario: " << e.problems().size() << " problem(s)\n";
  for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
  return kInvalid;
}

std::optional<qvnet::NodePair> parse_pair(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == text.size()) return std::nullopt;
  try {
    return qvnet::NodePair(qvnet::NodeId(text.substr(0, dash)), qvnet::NodeId(text.substr(dash + 1)));
  } catch (const qvnet::Error&) {
    return std::nullopt;
  }
}

int cmd_validate(const std::string& path) {
  const auto s = qvnet::load_scenario_file(path);
  std::cout << "ok: " << (s.name.empty() ? path : s.name) << ": " << s.graph.nodes().size() << " nodes, "
            << s.graph.links().size() << " links, " << s.trunks.size() << " trunks, " << s.qvnets.size()
            << " qvnets, " << s.workload.size() << " requests over " << s.duration << " ticks\n";
  return kOk;
}

struct SolveArgs {
  std::string qvnet;
  std::string behavior;
  std::string hub;
  std::string pair;
  std::size_t max_hops = 0;
};

int cmd_solve(const std::string& path, const SolveArgs& a) {
  const auto s = qvnet::load_scenario_file(path);
  const auto it = std::find_if(s.qvnets.begin(), s.qvnets.end(), [&](const qvnet::QVNet& q) { return q.id.str() == a.qvnet; });
  if (it == s.qvnets.end()) {
    std::cerr << "QVNetNotFound: " << a.qvnet << '\n';
    return kInvalid;
  }
  qvnet::Behavior behavior = it->behavior;
  if (!a.behavior.empty()) {
    behavior = qvnet::Behavior{qvnet::parse_behavior_kind(a.behavior), std::nullopt, std::nullopt};
    if (!a.hub.empty()) behavior.hub = qvnet::NodeId(a.hub);
    if (!a.pair.empty()) {
      const auto p = parse_pair(a.pair);
      if (!p) {
        std::cerr << "--pair expects A-B\n";
        return kUsage;
      }
      behavior.pair = std::pair{p->a(), p->b()};
    }
  }
  const auto lp = qvnet::build_lp(*it, behavior, qvnet::qvnet_capacities(*it), a.max_hops ? a.max_hops : s.max_hops);
  const auto alloc = qvnet::solve_behavior(lp);
  if (const auto v = qvnet::verify_allocation(alloc, lp); !v.empty()) {
    for (const auto& x : v) std::cerr << "violation " << qvnet::to_string(x.kind) << ": " << x.detail << '\n';
    return kInvalid;
  }
  std::cout << qvnet::allocation_json(it->id, lp, alloc);
  return kOk;
}

int cmd_run(const std::string& path, const std::string& out, const std::string& format,
            const std::optional<std::uint64_t>& seed) {
  auto s = qvnet::load_scenario_file(path);
  if (seed) s.seed = *seed;
  const auto text =
      qvnet::emit_metrics(qvnet::run(s), format == "json" ? qvnet::MetricsFormat::json : qvnet::MetricsFormat::csv);
  std::ofstream f(out, std::ios::binary);
  if (!f) {
    std::cerr << "cannot write " << out << '\n';
    return kInvalid;
  }
  f << text;
  return kOk;
}

int cmd_split(const std::string& path, const std::string& trunk) {
  const auto s = qvnet::load_scenario_file(path);
  const auto pair = parse_pair(trunk);
  if (!pair) {
    std::cerr << "--trunk expects A-B\n";
    return kUsage;
  }
  const auto it = std::find_if(s.trunks.begin(), s.trunks.end(), [&](const qvnet::TrunkLink& t) { return t.pair == *pair; });
  if (it == s.trunks.end()) {
    std::cerr << "no trunk " << pair->str() << '\n';
    return kInvalid;
  }
  const auto res = qvnet::split_trunk(*it);
  std::cout << "trunk " << it->pair.str() << " (" << (it->kind == qvnet::TrunkKind::physical ? "physical" : "logical")
            << ", rate " << it->rate.to_string() << ")\n";
  std::cout << std::left << std::setw(20) << "subconn" << std::setw(12) << "quota" << "rate\n";
  for (const auto& l : res.qvlinks) {
    std::cout << std::left << std::setw(20) << l.subconn.str() << std::setw(12) << it->quotas.at(l.subconn).to_string()
              << l.rate.to_string() << '\n';
  }
  if (res.oversubscribed) std::cout << "warning: quotas sum to " << it->quota_sum().to_string() << " > 1\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QKD virtual network simulator"};
  app.require_subcommand(1);

  std::string scenario;
  auto* validate = app.add_subcommand("validate", "Check a scenario and list every problem");
  validate->add_option("scenario", scenario, "Scenario JSON file")->required();

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Optimal key-rate allocation for one QVNet, as JSON");
  solve->add_option("scenario", scenario, "Scenario JSON file")->required();
  solve->add_option("--qvnet", solve_args.qvnet, "QVNet id")->required();
  solve->add_option("--behavior", solve_args.behavior, "Override: balanced, broadcast or high_throughput")
      ->check(CLI::IsMember({"balanced", "broadcast", "high_throughput"}));
  solve->add_option("--hub", solve_args.hub, "Hub node for a broadcast override");
  solve->add_option("--pair", solve_args.pair, "Node pair A-B for a high_throughput override");
  solve->add_option("--max-hops", solve_args.max_hops, "Candidate path length limit")->check(CLI::PositiveNumber);

  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write metrics");
  run->add_option("scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--out", out, "Metrics output file")->required();
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--seed", seed, "Override the scenario seed");

  std::string trunk;
  auto* split = app.add_subcommand("split", "Show the QVLinks a trunk splits into");
  split->add_option("scenario", scenario, "Scenario JSON file")->required();
  split->add_option("--trunk", trunk, "Trunk as A-B")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(scenario);
    if (*solve) return cmd_solve(scenario, solve_args);
    if (*run) return cmd_run(scenario, out, format, seed);
    if (*split) return cmd_split(scenario, trunk);
  } catch (const qvnet::ScenarioError& e) {
    return report(e);
  } catch (const qvnet::Error& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}

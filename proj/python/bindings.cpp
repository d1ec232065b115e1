// Thin string-typed bindings; the Python package converts rationals to
// fractions.Fraction and JSON documents to dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qvnet/sim_engine.hpp"

namespace py = pybind11;
using namespace qvnet;

namespace {

using RationalText = std::map<std::string, std::string>;

QuotaMap quota_map(const RationalText& in) {
  QuotaMap out;
  for (const auto& [id, f] : in) out.emplace(SubConnectionId(id), Rational::parse(f));
  return out;
}

RationalText text_map(const QuotaMap& in) {
  RationalText out;
  for (const auto& [id, f] : in) out.emplace(id.str(), f.to_string());
  return out;
}

TrunkLink trunk_of(const std::string& rate, const RationalText& quotas) {
  return TrunkLink{NodePair(NodeId("a"), NodeId("b")), TrunkKind::physical, Rational::parse(rate), quota_map(quotas)};
}

py::dict summary(const Scenario& s) {
  py::dict d;
  d["name"] = s.name;
  d["nodes"] = s.graph.nodes().size();
  d["links"] = s.graph.links().size();
  d["trunks"] = s.trunks.size();
  std::vector<std::string> ids;
  for (const auto& q : s.qvnets) ids.push_back(q.id.str());
  d["qvnets"] = ids;
  d["requests"] = s.workload.size();
  d["duration"] = s.duration;
  d["seed"] = s.seed;
  return d;
}

std::string run_text(const std::string& json_text, const std::string& format, std::optional<std::uint64_t> seed) {
  if (format != "csv" && format != "json") throw py::value_error("format must be 'csv' or 'json'");
  auto s = load_scenario(json_text);
  if (seed) s.seed = *seed;
  py::gil_scoped_release unlocked;
  return emit_metrics(run(s), format == "json" ? MetricsFormat::json : MetricsFormat::csv);
}

std::string solve_text(const std::string& json_text, const std::string& qvnet, const std::optional<std::string>& behavior,
                       const std::optional<std::string>& hub, const std::optional<std::pair<std::string, std::string>>& pair,
                       std::size_t max_hops) {
  const auto s = load_scenario(json_text);
  const auto it = std::find_if(s.qvnets.begin(), s.qvnets.end(), [&](const QVNet& q) { return q.id.str() == qvnet; });
  if (it == s.qvnets.end()) throw Error(ErrorCode::qvnet_not_found, qvnet);
  Behavior b = it->behavior;
  if (behavior) {
    b = Behavior{parse_behavior_kind(*behavior), std::nullopt, std::nullopt};
    if (hub) b.hub = NodeId(*hub);
    if (pair) b.pair = std::pair{NodeId(pair->first), NodeId(pair->second)};
  }
  const auto lp = build_lp(*it, b, qvnet_capacities(*it), max_hops ? max_hops : s.max_hops);
  return allocation_json(it->id, lp, solve_behavior(lp));
}

std::pair<RationalText, bool> split(const std::string& rate, const RationalText& quotas) {
  const auto res = split_trunk(trunk_of(rate, quotas));
  RationalText rates;
  for (const auto& l : res.qvlinks) rates.emplace(l.subconn.str(), l.rate.to_string());
  return {rates, res.oversubscribed};
}

std::map<std::string, std::int64_t> contention(const std::string& rate, const RationalText& quotas,
                                               const std::map<std::string, std::int64_t>& demands,
                                               std::int64_t available) {
  BlockMap d;
  for (const auto& [id, n] : demands) d.emplace(SubConnectionId(id), n);
  std::map<std::string, std::int64_t> out;
  for (const auto& [id, n] : resolve_contention(trunk_of(rate, quotas), d, available)) out.emplace(id.str(), n);
  return out;
}

RationalText rebalance_text(const RationalText& quotas, const RationalText& demand,
                            const std::map<std::string, std::pair<std::string, std::string>>& bounds, bool snap) {
  const TrunkLink trunk = trunk_of("1", quotas);
  DemandStats stats;
  for (const auto& [id, d] : demand) {
    const Rational v = Rational::parse(d);
    stats.series[{trunk.pair, SubConnectionId(id)}] = DemandSeries{v, v};
  }
  UpdateRule rule;
  for (const auto& [id, b] : bounds) {
    rule.bounds[SubConnectionId(id)] = QuotaBounds{Rational::parse(b.first), Rational::parse(b.second)};
  }
  auto fresh = rebalance(trunk, stats, rule);
  if (snap) fresh = snap_quotas(fresh, rule);
  return text_map(fresh);
}

}  // namespace

PYBIND11_MODULE(_qvnet, m) {
  m.doc() = "QKD virtual network simulator core";

  // Leaked on purpose: the translator may run until interpreter shutdown.
  static py::handle qvnet_error = py::exception<Error>(m, "QVNetError", PyExc_ValueError).release();
  static py::handle scenario_error = py::exception<ScenarioError>(m, "ScenarioError", qvnet_error.ptr()).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ScenarioError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(scenario_error)(e.what());
      exc.attr("problems") = e.problems();
      PyErr_SetObject(scenario_error.ptr(), exc.ptr());
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(qvnet_error)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(qvnet_error.ptr(), exc.ptr());
    }
  });

  m.def("load", [](const std::string& text) { return summary(load_scenario(text)); }, py::arg("json_text"));
  m.def("run", &run_text, py::arg("json_text"), py::arg("format") = "csv", py::arg("seed") = std::nullopt);
  m.def("solve", &solve_text, py::arg("json_text"), py::arg("qvnet"), py::arg("behavior") = std::nullopt,
        py::arg("hub") = std::nullopt, py::arg("pair") = std::nullopt, py::arg("max_hops") = 0);
  m.def("split_trunk", &split, py::arg("rate"), py::arg("quotas"));
  m.def("resolve_contention", &contention, py::arg("rate"), py::arg("quotas"), py::arg("demands"), py::arg("available"));
  m.def("rebalance", &rebalance_text, py::arg("quotas"), py::arg("demand"), py::arg("bounds"), py::arg("snap") = false);
  m.attr("METRICS_CSV_HEADER") = std::string(kMetricsCsvHeader);
}

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "qvnet/sim_engine.hpp"

namespace qvnet {

using nlohmann::json;

ScenarioError::ScenarioError(ErrorCode code, std::vector<std::string> problems)
    : Error(code, [&] {
        std::string msg = std::to_string(problems.size()) + " problem(s)";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

namespace {

// Collects problems instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& where, const std::string& what) { problems.push_back(where + ": " + what); }

  const json* field(const json& obj, const char* key, const std::string& where, bool required = true) {
    if (!obj.is_object()) {
      fail(where, "expected an object");
      return nullptr;
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(where, std::string("missing field '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> text(const json& obj, const char* key, const std::string& where, bool required = true) {
    const json* v = field(obj, key, where, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string() || v->get_ref<const std::string&>().empty()) {
      fail(where, std::string("'") + key + "' must be a nonempty string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::int64_t> integer(const json& obj, const char* key, const std::string& where,
                                      bool required = true) {
    const json* v = field(obj, key, where, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(where, std::string("'") + key + "' must be an integer");
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<Rational> rational(const json& v, const std::string& where) {
    try {
      if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
      if (v.is_number_float()) return Rational::parse(v.dump());
      if (v.is_string()) return Rational::parse(v.get<std::string>());
    } catch (const Error& e) {
      fail(where, e.what());
      return std::nullopt;
    }
    fail(where, "expected a number or a \"p/q\" string");
    return std::nullopt;
  }

  std::optional<Rational> rational(const json& obj, const char* key, const std::string& where, bool required = true) {
    const json* v = field(obj, key, where, required);
    if (v == nullptr) return std::nullopt;
    return rational(*v, where + "." + key);
  }

  std::optional<std::vector<std::string>> names(const json& v, const std::string& where) {
    if (!v.is_array()) {
      fail(where, "expected an array of node names");
      return std::nullopt;
    }
    std::vector<std::string> out;
    for (const auto& n : v) {
      if (!n.is_string() || n.get_ref<const std::string&>().empty()) {
        fail(where, "node names must be nonempty strings");
        return std::nullopt;
      }
      out.push_back(n.get<std::string>());
    }
    return out;
  }
};

std::string at(const std::string& section, std::size_t i) { return section + "[" + std::to_string(i) + "]"; }

void read_graph(Reader& r, const json& doc, Scenario& s, std::set<std::string>& nodes) {
  const json* g = r.field(doc, "graph", "scenario");
  if (g == nullptr) return;
  if (const json* ns = r.field(*g, "nodes", "graph")) {
    if (auto list = r.names(*ns, "graph.nodes")) {
      for (const auto& n : *list) {
        if (!nodes.insert(n).second) r.fail("graph.nodes", "duplicate node '" + n + "'");
      }
      s.graph_spec.nodes.assign(nodes.begin(), nodes.end());
    }
  }
  const json* ls = r.field(*g, "links", "graph");
  if (ls == nullptr) return;
  if (!ls->is_array()) {
    r.fail("graph.links", "expected an array");
    return;
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < ls->size(); ++i) {
    const json& l = (*ls)[i];
    const std::string where = at("graph.links", i);
    auto a = r.text(l, "a", where);
    auto b = r.text(l, "b", where);
    auto rate = r.rational(l, "rate", where);
    if (!a || !b || !rate) continue;
    bool ok = true;
    for (const auto* n : {&*a, &*b}) {
      if (!nodes.contains(*n)) {
        r.fail(where, "UnknownNode '" + *n + "'");
        ok = false;
      }
    }
    if (*a == *b) {
      r.fail(where, "SelfLoop on '" + *a + "'");
      ok = false;
    }
    if (*rate < Rational(0)) {
      r.fail(where, "NegativeRate " + rate->to_string());
      ok = false;
    }
    if (!seen.insert(std::minmax(*a, *b)).second) {
      r.fail(where, "DuplicateLink " + *a + "-" + *b);
      ok = false;
    }
    std::optional<double> km;
    if (const json* d = r.field(l, "distance_km", where, false)) {
      if (!d->is_number() || d->get<double>() < 0) {
        r.fail(where, "distance_km must be a nonnegative number");
      } else {
        km = d->get<double>();
      }
    }
    if (ok) s.graph_spec.links.push_back(LinkSpec{*a, *b, *rate, km});
  }
}

void read_trunks(Reader& r, const json& doc, Scenario& s, const std::set<std::string>& nodes) {
  const json* ts = r.field(doc, "trunks", "scenario");
  if (ts == nullptr) return;
  if (!ts->is_array()) {
    r.fail("trunks", "expected an array");
    return;
  }
  std::set<NodePair> seen;
  for (std::size_t i = 0; i < ts->size(); ++i) {
    const json& t = (*ts)[i];
    const std::string where = at("trunks", i);
    auto a = r.text(t, "a", where);
    auto b = r.text(t, "b", where);
    if (!a || !b) continue;
    if (!nodes.contains(*a) || !nodes.contains(*b) || *a == *b) {
      r.fail(where, "trunk endpoints must be two distinct declared nodes");
      continue;
    }
    TrunkLink trunk;
    trunk.pair = NodePair(NodeId(*a), NodeId(*b));
    if (!seen.insert(trunk.pair).second) r.fail(where, "duplicate trunk " + trunk.pair.str());

    const auto kind = r.text(t, "kind", where, false).value_or("physical");
    if (kind == "logical") {
      trunk.kind = TrunkKind::logical;
    } else if (kind != "physical") {
      r.fail(where, "kind must be 'physical' or 'logical'");
    }
    const auto link = std::find_if(s.graph_spec.links.begin(), s.graph_spec.links.end(), [&](const LinkSpec& l) {
      return NodePair(NodeId(l.a), NodeId(l.b)) == trunk.pair;
    });
    const auto rate = r.rational(t, "rate", where, trunk.kind == TrunkKind::logical);
    if (trunk.kind == TrunkKind::physical) {
      if (link == s.graph_spec.links.end()) {
        r.fail(where, "physical trunk " + trunk.pair.str() + " has no graph link");
        continue;
      }
      trunk.rate = link->rate;
      if (rate && *rate != link->rate) {
        r.fail(where, "trunk rate " + rate->to_string() + " differs from link rate " + link->rate.to_string());
      }
    } else if (rate) {
      if (*rate < Rational(0)) r.fail(where, "NegativeRate " + rate->to_string());
      trunk.rate = *rate;
    }

    const json* qs = r.field(t, "quotas", where);
    if (qs == nullptr) continue;
    if (!qs->is_object() || qs->empty()) {
      r.fail(where, "EmptySubconnSet: quotas must be a nonempty object");
      continue;
    }
    for (const auto& [label, value] : qs->items()) {
      const auto f = r.rational(value, where + ".quotas." + label);
      if (!f) continue;
      if (label.empty()) {
        r.fail(where, "empty sub-connection id");
        continue;
      }
      if (*f < Rational(0) || *f > Rational(1)) r.fail(where, "InvalidQuota " + label + " = " + f->to_string());
      trunk.quotas[SubConnectionId(label)] = *f;
    }
    s.trunks.push_back(std::move(trunk));
  }
  std::sort(s.trunks.begin(), s.trunks.end(), [](const TrunkLink& x, const TrunkLink& y) { return x.pair < y.pair; });
}

std::optional<std::pair<NodeId, NodeId>> node_pair(Reader& r, const json& v, const std::string& where,
                                                   const std::set<std::string>& nodes) {
  auto list = r.names(v, where);
  if (!list) return std::nullopt;
  if (list->size() != 2) {
    r.fail(where, "expected exactly two node names");
    return std::nullopt;
  }
  for (const auto& n : *list) {
    if (!nodes.contains(n)) {
      r.fail(where, "UnknownNode '" + n + "'");
      return std::nullopt;
    }
  }
  if ((*list)[0] == (*list)[1]) {
    r.fail(where, "pair endpoints must differ");
    return std::nullopt;
  }
  return std::pair{NodeId((*list)[0]), NodeId((*list)[1])};
}

void read_qvnets(Reader& r, const json& doc, Scenario& s, const std::set<std::string>& nodes) {
  const json* qs = r.field(doc, "qvnets", "scenario");
  if (qs == nullptr) return;
  if (!qs->is_array()) {
    r.fail("qvnets", "expected an array");
    return;
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < qs->size(); ++i) {
    const json& q = (*qs)[i];
    std::string where = at("qvnets", i);
    auto id = r.text(q, "id", where);
    if (!id) continue;
    where = "qvnet '" + *id + "'";
    if (!ids.insert(*id).second) r.fail(where, "duplicate qvnet id");

    QVNet net = assemble_qvnet(s.trunks, SubConnectionId(*id));
    if (net.empty) r.fail(where, "no trunk carries this sub-connection");

    if (const json* b = r.field(q, "behavior", where, false)) {
      if (auto kind = r.text(*b, "kind", where + ".behavior")) {
        try {
          net.behavior.kind = parse_behavior_kind(*kind);
        } catch (const Error& e) {
          r.fail(where, e.what());
        }
      }
      if (auto hub = r.text(*b, "hub", where + ".behavior", false)) {
        if (nodes.contains(*hub)) net.behavior.hub = NodeId(*hub);
        else r.fail(where, "UnknownNode hub '" + *hub + "'");
      }
      if (const json* p = r.field(*b, "pair", where + ".behavior", false)) {
        net.behavior.pair = node_pair(r, *p, where + ".behavior.pair", nodes);
      }
    }

    if (const json* rt = r.field(q, "routing", where, false)) {
      const auto kind = r.text(*rt, "kind", where + ".routing", false).value_or("shortest_path");
      if (kind == "static_map") {
        net.routing.kind = RoutingKind::static_map;
      } else if (kind != "shortest_path") {
        r.fail(where, "routing kind must be 'shortest_path' or 'static_map'");
      }
      if (const json* routes = r.field(*rt, "routes", where + ".routing", false)) {
        if (!routes->is_array()) {
          r.fail(where, "routing.routes must be an array of node lists");
        } else {
          for (const auto& route : *routes) {
            auto list = r.names(route, where + ".routing.routes");
            if (!list || list->size() < 2) {
              r.fail(where, "static route needs at least two nodes");
              continue;
            }
            Path p;
            for (const auto& n : *list) p.nodes.emplace_back(n);
            net.routing.static_routes[{p.nodes.front(), p.nodes.back()}] = p;
          }
        }
      }
    }

    if (const json* acc = r.field(q, "access", where)) {
      if (!acc->is_array()) {
        r.fail(where, "access must be an array");
      } else {
        for (std::size_t k = 0; k < acc->size(); ++k) {
          const json& a = (*acc)[k];
          const std::string aw = where + "." + at("access", k);
          AccessRule rule;
          rule.principal = r.text(a, "principal", aw).value_or("");
          rule.max_blocks_per_tick = r.integer(a, "max_blocks_per_tick", aw).value_or(0);
          if (rule.max_blocks_per_tick < 0) r.fail(aw, "max_blocks_per_tick must be >= 0");
          if (const json* pairs = r.field(a, "pairs", aw, false)) {
            if (pairs->is_string() && pairs->get<std::string>() == "*") {
              rule.allowed_pairs.reset();
            } else if (pairs->is_array()) {
              rule.allowed_pairs.emplace();
              for (const auto& p : *pairs) {
                if (auto np = node_pair(r, p, aw + ".pairs", nodes)) rule.allowed_pairs->emplace(np->first, np->second);
              }
            } else {
              r.fail(aw, "pairs must be \"*\" or an array of node pairs");
            }
          }
          net.access.push_back(std::move(rule));
        }
      }
    }

    if (const json* sched = r.field(q, "schedule", where, false)) {
      if (!sched->is_array()) {
        r.fail(where, "schedule must be an array of {from, to}");
      } else {
        for (const auto& w : *sched) {
          const auto from = r.integer(w, "from", where + ".schedule");
          const auto to = r.integer(w, "to", where + ".schedule");
          if (from && to) net.schedule.push_back({*from, *to});
        }
      }
    }

    if (!net.empty) {
      for (auto& problem : check_policy(net)) r.problems.push_back(std::move(problem));
    }
    s.qvnets.push_back(std::move(net));
  }

  for (const auto& t : s.trunks) {
    for (const auto& [c, _] : t.quotas) {
      if (!ids.contains(c.str())) r.fail("trunk " + t.pair.str(), "sub-connection '" + c.str() + "' has no qvnet entry");
    }
  }
  std::sort(s.qvnets.begin(), s.qvnets.end(), [](const QVNet& x, const QVNet& y) { return x.id < y.id; });
}

void read_workload(Reader& r, const json& doc, Scenario& s, const std::set<std::string>& nodes) {
  const json* ws = r.field(doc, "workload", "scenario", false);
  if (ws == nullptr) return;
  if (!ws->is_array()) {
    r.fail("workload", "expected an array");
    return;
  }
  struct Item {
    KeyRequest req;
    std::size_t seq;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < ws->size(); ++i) {
    const json& w = (*ws)[i];
    const std::string where = at("workload", i);
    auto tick = r.integer(w, "tick", where);
    auto qv = r.text(w, "qvnet", where);
    auto principal = r.text(w, "principal", where);
    auto src = r.text(w, "src", where);
    auto dst = r.text(w, "dst", where);
    auto count = r.integer(w, "count", where);
    auto every = r.integer(w, "repeat_every", where, false);
    auto until = r.integer(w, "repeat_until", where, false);
    if (!tick || !qv || !principal || !src || !dst || !count) continue;

    bool ok = true;
    if (*count < 1) r.fail(where, "count must be >= 1"), ok = false;
    if (*tick < 0 || *tick >= s.duration) r.fail(where, "tick " + std::to_string(*tick) + " outside duration"), ok = false;
    for (const auto* n : {&*src, &*dst}) {
      if (!nodes.contains(*n)) r.fail(where, "UnknownNode '" + *n + "'"), ok = false;
    }
    if (*src == *dst) r.fail(where, "src equals dst"), ok = false;
    const auto net = std::find_if(s.qvnets.begin(), s.qvnets.end(), [&](const QVNet& q) { return q.id.str() == *qv; });
    if (net == s.qvnets.end()) {
      r.fail(where, "QVNetNotFound '" + *qv + "'");
      ok = false;
    } else {
      const bool known = std::any_of(net->access.begin(), net->access.end(), [&](const AccessRule& a) {
        return a.principal == *principal || a.principal == kWildcardPrincipal;
      });
      if (!known) r.fail(where, "principal '" + *principal + "' has no access rule in qvnet '" + *qv + "'"), ok = false;
    }
    if (every && *every < 1) r.fail(where, "repeat_every must be >= 1"), ok = false;
    if (until && !every) r.fail(where, "repeat_until requires repeat_every"), ok = false;
    if (until && *until > s.duration) r.fail(where, "repeat_until beyond duration"), ok = false;
    if (!ok) continue;

    const std::int64_t last = every ? until.value_or(s.duration) : *tick + 1;
    const std::int64_t step = every.value_or(1);
    for (std::int64_t t = *tick; t < last; t += step) {
      items.push_back({KeyRequest{SubConnectionId(*qv), *principal, NodeId(*src), NodeId(*dst), *count, t}, i});
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
    return x.req.tick != y.req.tick ? x.req.tick < y.req.tick : x.seq < y.seq;
  });
  for (auto& it : items) s.workload.push_back(std::move(it.req));
}

void read_updater(Reader& r, const json& doc, Scenario& s) {
  const json* u = r.field(doc, "updater", "scenario", false);
  if (u == nullptr || u->is_null()) return;
  UpdateRule rule;
  rule.period = r.integer(*u, "period", "updater").value_or(1);
  rule.ewma_alpha = r.rational(*u, "ewma_alpha", "updater", false).value_or(Rational(1));
  if (const json* bs = r.field(*u, "bounds", "updater", false)) {
    if (!bs->is_object()) {
      r.fail("updater", "bounds must be an object keyed by sub-connection");
    } else {
      for (const auto& [label, b] : bs->items()) {
        QuotaBounds qb;
        qb.floor = r.rational(b, "floor", "updater.bounds." + label, false).value_or(Rational(0));
        qb.ceiling = r.rational(b, "ceiling", "updater.bounds." + label, false).value_or(Rational(1));
        if (!label.empty()) rule.bounds[SubConnectionId(label)] = qb;
      }
    }
  }
  for (auto& p : check_rule(rule)) r.fail("updater", p);
  s.updater = rule;
}

}  // namespace

Scenario load_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(ErrorCode::parse_error, {e.what()});
  }
  Reader r;
  Scenario s;
  if (!doc.is_object()) throw ScenarioError(ErrorCode::validation_error, {"scenario: document must be an object"});

  s.name = r.text(doc, "name", "scenario", false).value_or("");
  if (const json* seed = r.field(doc, "seed", "scenario", false)) {
    if (seed->is_number_unsigned()) s.seed = seed->get<std::uint64_t>();
    else r.fail("scenario", "seed must be a nonnegative integer");
  }
  s.duration = r.integer(doc, "duration", "scenario").value_or(0);
  if (s.duration < 0) r.fail("scenario", "duration must be >= 0");
  s.window = r.integer(doc, "window", "scenario", false).value_or(100);
  if (s.window < 1) r.fail("scenario", "window must be >= 1");
  s.carry_ticks = r.integer(doc, "carry_ticks", "scenario", false).value_or(4);
  if (s.carry_ticks < 1) r.fail("scenario", "carry_ticks must be >= 1");
  const auto hops = r.integer(doc, "max_hops", "scenario", false).value_or(static_cast<std::int64_t>(kDefaultMaxHops));
  if (hops < 1) r.fail("scenario", "max_hops must be >= 1");
  s.max_hops = static_cast<std::size_t>(std::max<std::int64_t>(hops, 1));
  if (const json* ts = r.field(doc, "tick_seconds", "scenario", false)) {
    if (ts->is_number() && ts->get<double>() > 0) s.tick_seconds = ts->get<double>();
    else r.fail("scenario", "tick_seconds must be a positive number");
  }
  const auto mode = r.text(doc, "relay_mode", "scenario", false).value_or("hop_by_hop");
  if (mode == "centralized") s.relay_mode = RelayMode::centralized;
  else if (mode != "hop_by_hop") r.fail("scenario", "relay_mode must be 'hop_by_hop' or 'centralized'");

  std::set<std::string> nodes;
  read_graph(r, doc, s, nodes);
  read_trunks(r, doc, s, nodes);
  read_qvnets(r, doc, s, nodes);
  read_workload(r, doc, s, nodes);
  read_updater(r, doc, s);

  if (!r.problems.empty()) throw ScenarioError(ErrorCode::validation_error, std::move(r.problems));
  try {
    s.graph = build_graph(s.graph_spec);
  } catch (const Error& e) {
    throw ScenarioError(ErrorCode::validation_error, {e.what()});
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ErrorCode::parse_error, {"cannot open '" + path + "'"});
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

}  // namespace qvnet

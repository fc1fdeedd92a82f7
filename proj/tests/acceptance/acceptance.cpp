// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "../support/support.hpp"
#include "pnet/pnet.hpp"

using namespace pnet;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      note = what;
    }
  }
};

Message to(const std::string& addr) { return {MultipletAddress::parse(addr), {}, kDefaultTtl}; }

bool has_action(const DeliveryTrace& t, const std::string& agent, Action a) {
  for (const auto& e : t.events)
    if (e.agent == agent && e.action == a) return true;
  return false;
}

Outcome fig1_golden() {
  Outcome o;
  auto g = support::load_model_file("fig1_switch.pnet");
  auto t = inject(g, "AA", to("mac:00:00:11:11:11:BB"));
  std::vector<std::pair<std::string, Action>> expected{
      {"AA", Action::imposed}, {"SW", Action::accepted_any}, {"SW", Action::forwarded}, {"BB", Action::accepted}};
  o.require(t.events.size() == expected.size(), "trace length " + std::to_string(t.events.size()));
  for (std::size_t i = 0; o.pass && i < expected.size(); ++i)
    o.require(t.events[i].agent == expected[i].first && t.events[i].action == expected[i].second,
              "event " + std::to_string(i) + " differs");
  const auto& ps = g.promises();
  bool deleted = false;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].promiser != "BB" || ps[i].body.kind != "deliver" || ps[i].body.polarity != Polarity::use) continue;
    deleted = true;
    auto cut = inject(g.without_promise(i), "AA", to("mac:00:00:11:11:11:BB"));
    o.require(cut.terminal().action == Action::dropped_no_promise, "deleting BB accept did not drop");
  }
  o.require(deleted, "BB has no accept promise");
  return o;
}

Outcome router_clauses() {
  Outcome o;
  auto g = support::load_model_file("router.pnet");
  o.require(has_action(inject(g, "alice", to("ip:10.1.2.20/24")), "R1", Action::forwarded_clause_1), "clause 1");
  o.require(has_action(inject(g, "alice", to("ip:10.2.0.9/16")), "R1", Action::forwarded_clause_2), "clause 2");
  o.require(has_action(inject(g, "alice", to("ip:10.7.7.7/24")), "R1", Action::forwarded_clause_3), "clause 3");
  auto bs = find_bindings(g);
  for (const auto& iface : {"eth0", "eth1", "eth2"}) {
    bool bound = false;
    for (const auto& b : bs)
      if (b.giver_agent == "R1" && b.user_agent == iface && g.promises()[b.giver.index].body.kind == "forward")
        bound = true;
    o.require(bound, std::string("no forward binding to ") + iface);
  }
  return o;
}

Outcome scaling() {
  Outcome o;
  for (unsigned n = 0; n <= 30; ++n)
    for (unsigned p = 0; p <= n; ++p) {
      auto s = scaling_split({n, p});
      o.require(s.containers == (1LL << p) && s.per_container == (1LL << (n - p)) &&
                    s.containers * s.per_container == (1LL << n),
                std::to_string(n) + "/" + std::to_string(p));
    }
  auto s = scaling_split({32, 24});
  o.require(s.containers == 16777216 && s.per_container == 256, "32/24 spot value");
  return o;
}

Outcome vlan_containment() {
  Outcome o;
  auto g = support::load_model_file("vlan.pnet");
  o.require(!reachable(g, "a1", "b1") && !reachable(g, "b1", "a1"), "cross-tag delivery");
  o.require(reachable(g, "a1", "a2"), "same-tag delivery");
  std::set<std::string> vlan10;
  for (const auto& [id, a] : g.agents())
    if (const auto* v = a.attr("vlan"); v && *v == "10") vlan10.insert(id);
  o.require(flood_set(g, "a1") == vlan10, "flood from a1 is not the vlan 10 membership");
  auto no_crossing = [&](const PromiseGraph& m, const std::string& src, const std::string& prefix) {
    for (const auto& id : flood_set(m, src)) {
      const auto* p = m.agent(id).attr("prefix");
      if (m.agent(id).kind == AgentKind::forwarder || (p && *p != prefix)) return false;
    }
    return true;
  };
  o.require(no_crossing(g, "a1", "10.10.0"), "vlan flood crossed the router");
  auto r = support::load_model_file("router.pnet");
  o.require(no_crossing(r, "alice", "10.1.1"), "flood crossed the router");
  return o;
}

Outcome proxy_fragility() {
  Outcome o;
  PromiseGraph base;
  for (auto id : {"C", "P", "S"}) base.add_agent({id, AgentKind::service_host, {}});
  auto g = expand_proxy(base, "C", "P", "S", Body::parse("+web"));
  o.require(g.promises().size() == base.promises().size() + 4, "expand_proxy did not add 4 promises");
  o.require(check_cooperation(g, "S", "C", "web").verdict, "expanded graph is not cooperative");
  int flipped = 0;
  for (std::size_t i = base.promises().size(); i < g.promises().size(); ++i)
    if (!check_cooperation(g.without_promise(i), "S", "C", "web").verdict) ++flipped;
  o.require(flipped == 4, std::to_string(flipped) + "/4 deletions flipped the verdict");
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(7001);
  int graphs = 0, pairs = 0;
  for (; graphs < 250 && o.pass; ++graphs) {
    auto raw = support::random_raw_graph(rng);
    auto g = support::to_promise_graph(raw);
    support::PathOracle oracle(raw);
    for (int s = 0; s < raw.n; ++s)
      for (int d = 0; d < raw.n; ++d) {
        auto src = support::agent_name(s), dst = support::agent_name(d);
        bool expected = oracle.reachable(s, d);
        ++pairs;
        o.require(reachable(g, src, dst) == expected, "reachable disagrees on graph " + std::to_string(graphs));
        if (!expected) continue;
        std::set<std::string> spof;
        for (int a : oracle.spof(s, d)) spof.insert(support::agent_name(a));
        o.require(single_points_of_failure(g, src, dst) == spof, "spof disagrees on graph " + std::to_string(graphs));
      }
  }
  if (o.pass) o.note = std::to_string(graphs) + " graphs, " + std::to_string(pairs) + " pairs";
  return o;
}

Outcome compiler_closure() {
  Outcome o;
  std::mt19937_64 rng(7002);
  std::size_t mutants = 0, killed = 0;
  for (int round = 0; round < 120; ++round) {
    auto spec = support::random_policy(rng);
    auto g = compile_policy(spec);
    o.require(verify_compiled(spec, g).verdict, "spec " + std::to_string(round) + " does not verify");
    for (std::size_t i = 0; i < g.promises().size(); ++i) {
      ++mutants;
      if (!verify_compiled(spec, g.without_promise(i)).verdict) ++killed;
    }
  }
  o.require(killed == mutants, std::to_string(killed) + "/" + std::to_string(mutants) + " mutants killed");
  if (o.pass) o.note = "120 specs, " + std::to_string(mutants) + " mutants killed";
  return o;
}

Outcome alignment_algebra() {
  Outcome o;
  std::mt19937_64 rng(7003);
  std::vector<Body> pool;
  for (auto s : {"+http", "+db", "-db", "+app{port=80}", "+app{port=81}", "-deliver{mac=*}", "+x{a=1|2}", "+x{a=2|1}"})
    pool.push_back(Body::parse(s));
  for (int round = 0; round < 1200; ++round) {
    std::vector<Body> d, b;
    for (const auto& p : pool) {
      auto roll = rng() % 4;
      if (roll & 1) d.push_back(p);
      if (roll & 2) b.push_back(p);
    }
    std::set<std::string> ds, bs;
    for (const auto& x : d) ds.insert(x.canonical());
    for (const auto& x : b) bs.insert(x.canonical());
    PromiseGraph g;
    g.add_agent({"m", AgentKind::service_host, {}});
    g.add_agent({"out", AgentKind::service_host, {}});
    g.add_container("M", {"m"});
    for (const auto& x : b) g.add_promise("m", Target::agent("out"), x);
    auto r = check_alignment(BodySet(d.begin(), d.end()), g, "M");
    o.require(r.verdict == (ds == bs), "verdict differs from set equality");

    auto d2 = d;
    std::shuffle(d2.begin(), d2.end(), rng);
    if (!d.empty()) d2.push_back(d[rng() % d.size()]);
    PromiseGraph g2 = g;
    if (!b.empty()) g2.add_promise("m", Target::agent("out"), b[rng() % b.size()]);
    auto r2 = check_alignment(BodySet(d2.begin(), d2.end()), g2, "M");
    o.require(r2.verdict == r.verdict && r2.witnesses == r.witnesses, "not invariant under duplication/reordering");
  }
  return o;
}

Outcome parser_robustness() {
  Outcome o;
  std::mt19937_64 rng(7004);
  for (int round = 0; round < 100000; ++round) {
    std::string s(rng() % 160, '\0');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    try {
      auto e = dsl::load_model(s);
      if (e.graph) (void)export_dot(*e.graph);
    } catch (const std::exception& ex) {
      o.require(false, std::string("fuzz input threw: ") + ex.what());
      break;
    }
  }
  for (const auto& name : support::model_files()) {
    auto text = support::read_file(support::models_dir() + "/" + name);
    auto [doc, diags] = dsl::parse_model(text, name);
    auto [again, diags2] = dsl::parse_model(dsl::render(doc), name);
    o.require(!dsl::has_errors(diags) && diags2.empty() && again == doc, "round-trip failed for " + name);
    auto err = support::dot_error(export_dot(support::load_model_file(name)));
    o.require(err.empty(), "DOT check failed for " + name + ": " + err);
  }
  o.require(support::dot_error(export_dot(PromiseGraph{})).empty(), "empty graph DOT");
  return o;
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"switch golden trace and autonomy", fig1_golden},
      {"router forward clauses and binding", router_clauses},
      {"scaling identity", scaling},
      {"vlan containment", vlan_containment},
      {"proxy fragility", proxy_fragility},
      {"reachability and spof oracles", oracle_equivalence},
      {"policy compiler closure", compiler_closure},
      {"alignment algebra", alignment_algebra},
      {"parser robustness", parser_robustness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %zu %s (%lld ms)%s%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                static_cast<long long>(ms), o.note.empty() ? "" : ": ", o.note.c_str());
  }
  return failures == 0 ? 0 : 1;
}

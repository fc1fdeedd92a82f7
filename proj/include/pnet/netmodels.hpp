#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "addressing.hpp"
#include "graph.hpp"

namespace pnet {

/// Standard bodies shared by the builders and the simulator.
namespace bodies {

inline Body accept_any_l2() { return Body(Polarity::use, "deliver", {{"mac", Pattern::wildcard()}}); }
inline Body accept_self_l2() {
  return Body(Polarity::use, "deliver", {{"mac", Pattern::wildcard(Guard::destination_equals_self)}});
}
inline Body monitor_l2() { return Body(Polarity::use, "monitor", {{"mac", Pattern::wildcard()}}); }
inline Body mac_identity(const std::string& mac) {
  return Body(Polarity::give, "mac-identity", {{"mac", Pattern::literal(mac, Guard::distinct_from_all_peers)}});
}
inline Body forward_l2(const std::string& mac) {
  return Body(Polarity::give, "forward", {{"mac", Pattern::literal(mac)}});
}
inline Body accept_any_l3() {
  return Body(Polarity::use, "deliver", {{"prefix", Pattern::wildcard()}, {"local", Pattern::wildcard()}});
}
inline Body accept_self_l3() {
  return Body(Polarity::use, "deliver",
              {{"prefix", Pattern::wildcard(Guard::destination_equals_self)},
               {"local", Pattern::wildcard(Guard::destination_equals_self)}});
}
inline Body present(const std::string& prefix) {
  return Body(Polarity::give, "present", {{"prefix", Pattern::literal(prefix)}});
}
inline Body forward_clauses(Polarity pol, std::set<std::string> clauses) {
  return Body(pol, "forward", {{"clause", Pattern::any_of(std::move(clauses))}});
}

} // namespace bodies

struct IpDoublet {
  std::string prefix;
  std::string local;
};

struct InterfaceSpec {
  std::string id;
  std::optional<std::string> mac;
  std::optional<IpDoublet> ip;
  std::optional<int> vlan;
  bool promiscuous = false;

  Agent to_agent() const {
    Agent a{id, AgentKind::interface, {}};
    if (mac) a.attributes["mac"] = AddressComponent("mac", *mac).value;
    if (ip) {
      a.attributes["prefix"] = AddressComponent("prefix", ip->prefix).value;
      a.attributes["local"] = AddressComponent("local", ip->local).value;
    }
    if (vlan) {
      validate_vlan(*vlan);
      a.attributes["vlan"] = std::to_string(*vlan);
    }
    if (promiscuous) a.attributes["promiscuous"] = "true";
    return a;
  }
};

namespace detail {

inline void require_distinct_macs(const std::vector<InterfaceSpec>& ifs) {
  std::set<std::string> seen;
  for (const auto& i : ifs) {
    if (!i.mac) throw ModelError("interface '" + i.id + "' needs a mac");
    if (!seen.insert(*i.mac).second) throw ModelError("duplicate mac " + *i.mac + " on '" + i.id + "'");
  }
}

} // namespace detail

/// Shared-medium segment: every interface is in scope of every other.
inline PromiseGraph build_ethernet_segment(const std::vector<InterfaceSpec>& interfaces,
                                           const std::string& name = "segment") {
  detail::require_distinct_macs(interfaces);
  PromiseGraph g;
  std::set<std::string> members;
  for (const auto& i : interfaces) {
    g.add_agent(i.to_agent());
    members.insert(i.id);
  }
  g.add_container(name, members);
  auto scope = Target::container(name);
  for (const auto& i : interfaces) {
    g.add_promise(i.id, scope, bodies::mac_identity(*i.mac));
    g.add_promise(i.id, scope, bodies::accept_any_l2());
    g.add_promise(i.id, scope, bodies::accept_self_l2());
    if (i.promiscuous) g.add_promise(i.id, scope, bodies::monitor_l2());
  }
  return g;
}

/// Switch with static forward promises toward the port owning each MAC.
inline PromiseGraph build_switch(const std::vector<InterfaceSpec>& ports, const std::string& id) {
  if (ports.size() < 2) throw ModelError("switch '" + id + "' needs at least two ports");
  detail::require_distinct_macs(ports);
  PromiseGraph g;
  g.add_agent(Agent{id, AgentKind::forwarder, {}});
  for (const auto& p : ports) g.add_agent(p.to_agent());
  for (const auto& p : ports) {
    auto port = Target::agent(p.id);
    g.add_promise(id, port, bodies::accept_any_l2());
    g.add_promise(id, port, bodies::forward_l2(*p.mac));
    g.add_promise(p.id, Target::agent(id), bodies::mac_identity(*p.mac));
    g.add_promise(p.id, Target::agent(id), bodies::accept_self_l2());
    if (p.promiscuous) g.add_promise(p.id, Target::agent(id), bodies::monitor_l2());
  }
  return g;
}

struct RouterSpec {
  std::string id;
  std::vector<InterfaceSpec> interfaces;
  /// prefix -> `symbolic:<interface id>`
  TransducerTable rib;
  std::string default_interface;
  /// Hosts attached to each interface's segment.
  std::map<std::string, std::vector<InterfaceSpec>> segments;
};

inline std::string rib_table_name(const std::string& router) { return router + ".rib"; }

inline PromiseGraph build_router(const RouterSpec& spec) {
  std::set<std::string> ifaces;
  std::set<std::string> prefixes;
  for (const auto& i : spec.interfaces) {
    if (!i.ip) throw ModelError("router interface '" + i.id + "' needs an ip");
    if (!prefixes.insert(i.ip->prefix).second)
      throw ModelError("router '" + spec.id + "' has two interfaces on prefix " + i.ip->prefix);
    ifaces.insert(i.id);
  }
  if (spec.default_interface.empty()) throw ModelError("router '" + spec.id + "' has no default interface");
  if (!ifaces.count(spec.default_interface))
    throw ModelError("default interface '" + spec.default_interface + "' is not on router '" + spec.id + "'");
  for (const auto& e : spec.rib.entries) {
    if (e.rewrite.size() != 1 || e.rewrite[0].label != "symbolic" || !ifaces.count(e.rewrite[0].value))
      throw ModelError("rib entry of router '" + spec.id + "' does not name a member interface");
  }
  for (const auto& [iface, _] : spec.segments)
    if (!ifaces.count(iface)) throw ModelError("segment attached to unknown interface '" + iface + "'");

  PromiseGraph g;
  Agent core{spec.id, AgentKind::forwarder, {{"default", spec.default_interface}}};
  std::set<std::string> clauses{"1", "3"};
  if (!spec.rib.entries.empty()) {
    core.attributes["rib"] = rib_table_name(spec.id);
    clauses.insert("2");
    TransducerTable t = spec.rib;
    t.name = rib_table_name(spec.id);
    t.fallback.reset();
    g.add_table(std::move(t));
  }
  g.add_agent(core);
  for (const auto& i : spec.interfaces) g.add_agent(i.to_agent());
  for (const auto& i : spec.interfaces) {
    g.add_promise(i.id, Target::agent(spec.id), bodies::present(i.ip->prefix));
    g.add_promise(spec.id, Target::agent(i.id), bodies::forward_clauses(Polarity::give, clauses));
    g.add_promise(i.id, Target::agent(spec.id), bodies::forward_clauses(Polarity::use, clauses));
  }
  for (const auto& [iface_id, hosts] : spec.segments) {
    const auto& iface = *std::find_if(spec.interfaces.begin(), spec.interfaces.end(),
                                      [&](const InterfaceSpec& s) { return s.id == iface_id; });
    for (const auto& h : hosts) {
      if (!h.ip || h.ip->prefix != iface.ip->prefix)
        throw ModelError("host '" + h.id + "' is not on the prefix of interface '" + iface_id + "'");
      Agent a = h.to_agent();
      a.attributes["gateway"] = iface_id;
      g.ensure_agent(a);
    }
    for (const auto& h : hosts) {
      g.add_promise(iface_id, Target::agent(h.id), bodies::accept_any_l3());
      g.add_promise(h.id, Target::agent(iface_id), bodies::accept_self_l3());
      for (const auto& peer : hosts)
        if (peer.id != h.id) g.add_promise(h.id, Target::agent(peer.id), bodies::accept_self_l3());
    }
  }
  return g;
}

/// Transit link between two router interfaces on the same prefix.
inline PromiseGraph link_interfaces(const PromiseGraph& graph, const std::string& a, const std::string& b) {
  const auto& ia = graph.agent(a);
  const auto& ib = graph.agent(b);
  if (!ia.attr("prefix") || !ib.attr("prefix") || *ia.attr("prefix") != *ib.attr("prefix"))
    throw ModelError("link: '" + a + "' and '" + b + "' are not on one prefix");
  PromiseGraph g = graph;
  g.add_promise(a, Target::agent(b), bodies::accept_any_l3());
  g.add_promise(b, Target::agent(a), bodies::accept_any_l3());
  return g;
}

/// Tags interfaces and confines their L2 promises to same-tag scope.
inline PromiseGraph build_vlan_overlay(const PromiseGraph& graph, const std::map<std::string, int>& assignments) {
  for (const auto& [iface, tag] : assignments) {
    graph.agent(iface);
    validate_vlan(tag);
  }
  auto tag_of = [&](const std::string& id) -> std::optional<int> {
    auto it = assignments.find(id);
    if (it == assignments.end()) return std::nullopt;
    return it->second;
  };

  PromiseGraph g;
  for (const auto& [id, a] : graph.agents()) {
    Agent copy = a;
    if (auto t = tag_of(id)) copy.attributes["vlan"] = std::to_string(*t);
    g.add_agent(std::move(copy));
  }
  for (const auto& [name, members] : graph.containers()) g.add_container(name, members);
  for (const auto& [_, t] : graph.tables()) g.add_table(t);

  std::map<std::string, std::set<std::string>> fresh;
  auto scoped_container = [&](const Target& t, int tag) {
    std::string name = (t.kind == Target::Kind::all ? std::string() : t.name + ".") + "vlan" + std::to_string(tag);
    if (!fresh.count(name) && !g.containers().count(name)) {
      std::set<std::string> members;
      for (const auto& [id, _] : graph.agents()) {
        bool in_scope = t.kind == Target::Kind::all || graph.container(t.name).count(id);
        if (in_scope && tag_of(id) == tag) members.insert(id);
      }
      g.add_container(name, members);
      fresh.emplace(name, std::move(members));
    }
    return Target::container(name);
  };
  std::set<std::string> scoped_members;
  for (const auto& p : graph.promises()) {
    Target target = p.promisee;
    Body body = p.body;
    if (body.params.count("mac")) {
      if (auto t = tag_of(p.promiser)) {
        body.params["vlan"] = Pattern::literal(std::to_string(*t));
        if (target.is_scope()) {
          target = scoped_container(target, *t);
          scoped_members.insert(p.promiser);
        }
      } else if (target.kind == Target::Kind::agent) {
        if (auto tt = tag_of(target.name)) body.params["vlan"] = Pattern::literal(std::to_string(*tt));
      }
    }
    g.add_promise(p.promiser, target, body);
  }
  std::map<int, std::set<std::string>> loose;
  for (const auto& [iface, tag] : assignments)
    if (!scoped_members.count(iface)) loose[tag].insert(iface);
  for (const auto& [tag, members] : loose) {
    std::string name = "vlan" + std::to_string(tag);
    if (!g.containers().count(name)) g.add_container(name, members);
  }
  for (const auto& i : graph.impositions()) g.add_imposition(i.imposer, i.imposee, i.body);
  return g;
}

/// L2-over-L3 tunnel: encapsulate at `ingress`, decapsulate at `egress`.
inline PromiseGraph build_tunnel(const PromiseGraph& graph, const std::string& ingress, const std::string& egress,
                                 const AddressComponent& tni) {
  if (tni.label != "tni") throw ModelError("tunnel identifier must be a tni component");
  const auto& in = graph.agent(ingress);
  graph.agent(egress);
  if (ingress == egress) throw ModelError("tunnel endpoints must differ");
  Params enc{{"tni", Pattern::literal(tni.value)}};
  if (const auto* v = in.attr("vlan")) enc["vlan"] = Pattern::literal(*v);
  Params dec{{"tni", Pattern::literal(tni.value)}};
  PromiseGraph g = graph;
  g.add_promise(ingress, Target::agent(egress), Body(Polarity::give, "encapsulate", enc));
  g.add_promise(egress, Target::agent(ingress), Body(Polarity::use, "encapsulate", enc));
  g.add_promise(egress, Target::agent(ingress), Body(Polarity::give, "decapsulate", dec));
  g.add_promise(ingress, Target::agent(egress), Body(Polarity::use, "decapsulate", dec));
  return g;
}

} // namespace pnet

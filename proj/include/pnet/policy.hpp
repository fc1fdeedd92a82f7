#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "graph.hpp"
#include "promise_core.hpp"
#include "simulator.hpp"
#include "verifier.hpp"

namespace pnet {

inline constexpr const char* kUsersAgent = "users";
inline constexpr const char* kExternalProvider = "external";

inline const std::set<std::string>& requirement_tags() {
  static const std::set<std::string> tags{"firewall-open", "capacity", "secure-channel"};
  return tags;
}

struct Consume {
  std::string provider;
  Body service;
  std::optional<unsigned> alternatives;  // nullopt: all provider hosts
  friend bool operator==(const Consume&, const Consume&) = default;
};

struct Cell {
  std::string name;
  unsigned hosts = 1;
  std::vector<Body> provides;
  std::vector<Consume> consumes;
  std::set<std::string> requirements;
  std::optional<std::string> capacity;

  bool requires_tag(const std::string& t) const { return requirements.count(t) != 0; }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct PolicySpec {
  std::vector<Cell> cells;
  std::vector<Body> desired;  // empty: everything the cells provide

  const Cell* cell(const std::string& name) const {
    for (const auto& c : cells)
      if (c.name == name) return &c;
    return nullptr;
  }
  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

inline std::string host_name(const std::string& cell, unsigned index) {
  return cell + "-" + std::to_string(index);
}

inline std::vector<std::string> host_names(const Cell& c) {
  std::vector<std::string> out;
  for (unsigned i = 1; i <= c.hosts; ++i) out.push_back(host_name(c.name, i));
  return out;
}

namespace detail {

inline bool provides_body(const Cell& c, const Body& b) {
  return std::any_of(c.provides.begin(), c.provides.end(),
                     [&](const Body& p) { return p.canonical() == b.canonical(); });
}

inline unsigned effective_alternatives(const PolicySpec& spec, const Consume& k) {
  const Cell* p = spec.cell(k.provider);
  if (!p) return 0;
  return k.alternatives.value_or(p->hosts);
}

} // namespace detail

inline void validate_policy(const PolicySpec& spec) {
  std::set<std::string> names;
  for (const auto& c : spec.cells) {
    if (!is_valid_name(c.name)) throw ModelError("invalid cell name '" + c.name + "'");
    if (c.name == kUsersAgent || c.name == kExternalProvider)
      throw ModelError("cell name '" + c.name + "' is reserved");
    if (!names.insert(c.name).second) throw ModelError("duplicate cell '" + c.name + "'");
    if (c.hosts == 0) throw ModelError("cell '" + c.name + "' has zero hosts");
    for (const auto& b : c.provides)
      if (b.polarity != Polarity::give) throw ModelError("cell '" + c.name + "' provides a use body " + b.canonical());
    for (const auto& t : c.requirements)
      if (!requirement_tags().count(t)) throw ModelError("cell '" + c.name + "' has unknown requirement '" + t + "'");
    if (c.requires_tag("capacity") && !c.capacity)
      throw ModelError("cell '" + c.name + "' requires capacity without a value");
  }
  for (const auto& c : spec.cells) {
    for (const auto& k : c.consumes) {
      if (k.service.polarity != Polarity::give)
        throw ModelError("cell '" + c.name + "' consumes a use body " + k.service.canonical());
      if (k.service.params.count("provider"))
        throw ModelError("consumed service " + k.service.canonical() + " uses the reserved key 'provider'");
      if (k.alternatives && *k.alternatives == 0)
        throw ModelError("cell '" + c.name + "' consumes with zero alternatives");
      if (k.provider == kExternalProvider) continue;
      const Cell* p = spec.cell(k.provider);
      if (!p) throw ModelError("cell '" + c.name + "' consumes from unknown cell '" + k.provider + "'");
      if (p->name == c.name) throw ModelError("cell '" + c.name + "' consumes from itself");
      if (!detail::provides_body(*p, k.service))
        throw ModelError("cell '" + k.provider + "' does not provide " + k.service.canonical());
      if (k.alternatives && *k.alternatives > p->hosts)
        throw ModelError("cell '" + c.name + "' lists more alternatives than '" + k.provider + "' has hosts");
    }
  }
}

/// The desired set, defaulting to the union of provided bodies.
inline std::vector<Body> effective_desired(const PolicySpec& spec) {
  if (!spec.desired.empty()) return spec.desired;
  std::vector<Body> out;
  for (const auto& c : spec.cells) out.insert(out.end(), c.provides.begin(), c.provides.end());
  return out;
}

inline Body receptor_body(const Cell& provider, const Body& service) {
  Params ps{{"symbolic", Pattern::wildcard(Guard::destination_equals_self)},
            {"service", Pattern::literal(service.kind)}};
  if (provider.requires_tag("capacity")) ps["capacity"] = Pattern::literal(*provider.capacity);
  if (provider.requires_tag("secure-channel")) ps["channel"] = Pattern::literal("secure");
  return Body(Polarity::use, "deliver", std::move(ps));
}

inline Body consumer_use_body(const PolicySpec& spec, const Consume& k) {
  Body b = k.service.flipped();
  if (k.provider == kExternalProvider) return b;
  std::set<std::string> alts;
  for (unsigned i = 1; i <= detail::effective_alternatives(spec, k); ++i) alts.insert(host_name(k.provider, i));
  return b.with_param("provider", Pattern::any_of(std::move(alts)));
}

/// Consumer cells of `service` provided by `provider`, in spec order.
inline std::vector<const Cell*> consumers_of(const PolicySpec& spec, const std::string& provider, const Body& service) {
  std::vector<const Cell*> out;
  for (const auto& c : spec.cells)
    for (const auto& k : c.consumes)
      if (k.provider == provider && k.service.canonical() == service.canonical()) {
        out.push_back(&c);
        break;
      }
  return out;
}

inline PromiseGraph compile_policy(const PolicySpec& spec) {
  validate_policy(spec);
  PromiseGraph g;
  g.add_agent({kUsersAgent, AgentKind::controller, {}});
  for (const auto& c : spec.cells) {
    for (const auto& h : host_names(c))
      g.add_agent({h, AgentKind::service_host, {{"symbolic", h}, {"cell", c.name}}});
    auto hs = host_names(c);
    g.add_container(c.name, {hs.begin(), hs.end()});
  }
  for (const auto& c : spec.cells) {
    auto hosts = host_names(c);
    std::set<std::string> done;
    auto promise_once = [&](const std::string& from, const Target& to, const Body& b) {
      if (done.insert(from + " " + to.to_string() + " " + b.canonical()).second) g.add_promise(from, to, b);
    };
    for (const auto& h : hosts) {
      for (const auto& s : c.provides) {
        auto consumers = consumers_of(spec, c.name, s);
        if (consumers.empty()) promise_once(h, Target::agent(kUsersAgent), s);
        for (const auto* y : consumers) promise_once(h, Target::container(y->name), s);
      }
      if (c.requires_tag("firewall-open"))
        for (const auto& s : c.provides)
          for (const auto* y : consumers_of(spec, c.name, s))
            promise_once(h, Target::container(y->name), receptor_body(c, s));
      for (const auto& peer : hosts)
        if (peer != h) promise_once(h, Target::agent(peer), Body(Polarity::give, "coordinate", {{"group", Pattern::literal(c.name)}}));
      for (const auto& k : c.consumes) {
        Target to = k.provider == kExternalProvider ? Target::agent(kUsersAgent) : Target::container(k.provider);
        promise_once(h, to, consumer_use_body(spec, k));
      }
    }
    // Client API calls: end users impose on every host whose service nobody inside consumes.
    for (const auto& s : c.provides)
      if (consumers_of(spec, c.name, s).empty())
        for (const auto& h : hosts) g.add_imposition(kUsersAgent, h, s.flipped());
  }
  return g;
}

/// The part of the desired set a cell's membrane should show, plus the
/// receptor and use bodies its declared consumes and requirements imply.
inline BodySet desired_slice(const PolicySpec& spec, const Cell& c) {
  BodySet out;
  BodySet desired;
  for (const auto& d : effective_desired(spec)) desired.insert(d);
  for (const auto& s : c.provides) {
    if (desired.contains(s)) out.insert(s);
    if (c.requires_tag("firewall-open") && !consumers_of(spec, c.name, s).empty()) out.insert(receptor_body(c, s));
  }
  for (const auto& k : c.consumes) out.insert(consumer_use_body(spec, k));
  return out;
}

inline AnalysisReport verify_compiled(const PolicySpec& spec, const PromiseGraph& g) {
  for (const auto& c : spec.cells)
    if (!g.containers().count(c.name)) throw ModelError("graph has no container for cell '" + c.name + "'");
  AnalysisReport r;
  auto absorb = [&](const AnalysisReport& sub, const std::string& prefix) {
    for (const auto& w : sub.witnesses) r.fail({w.category, prefix + w.subject, w.detail});
    for (const auto& n : sub.narrative) r.narrative.push_back(n);
  };

  for (const auto& d : effective_desired(spec))
    if (std::none_of(spec.cells.begin(), spec.cells.end(), [&](const Cell& c) { return detail::provides_body(c, d); }))
      r.fail({"missing", d.canonical(), "desired but no cell provides it"});

  for (const auto& c : spec.cells) {
    absorb(check_alignment(desired_slice(spec, c), g, c.name), c.name + ": ");
    if (c.hosts < 2) continue;
    std::set<std::string> clients;
    for (const auto& y : spec.cells)
      for (const auto& k : y.consumes)
        if (k.provider == c.name && detail::effective_alternatives(spec, k) >= 2)
          for (const auto& h : host_names(y)) clients.insert(h);
    bool complete = true;
    for (const auto& h : clients)
      if (!g.has_agent(h)) {
        complete = false;
        r.fail({"missing-agent", h, "consumer host is absent"});
      }
    if (complete) absorb(redundancy_check(g, c.name, clients), c.name + ": ");
  }

  auto bindings = find_bindings(g);
  for (const auto& y : spec.cells) {
    for (const auto& k : y.consumes) {
      if (k.provider == kExternalProvider) continue;
      const Cell& p = *spec.cell(k.provider);
      unsigned n = detail::effective_alternatives(spec, k);
      for (const auto& client : host_names(y)) {
        for (unsigned i = 1; i <= n; ++i) {
          auto server = host_name(p.name, i);
          bool bound = std::any_of(bindings.begin(), bindings.end(), [&](const Binding& b) {
            return !b.is_exchange() && b.giver_agent == server && b.user_agent == client &&
                   g.promises()[b.giver.index].body.kind == k.service.kind;
          });
          if (!bound)
            r.fail({"binding", client + "->" + server, "no " + k.service.canonical() + " contract from " + server});
          if (p.requires_tag("firewall-open") && g.has_agent(client) && g.has_agent(server) &&
              !reachable(g, client, server))
            r.fail({"firewall", client + "->" + server, server + " does not accept signalling from " + client});
        }
      }
    }
  }
  return r;
}

} // namespace pnet

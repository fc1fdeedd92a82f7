#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "graph.hpp"

namespace pnet {

/// A matched (+, -) pair: contract (promise/promise) or exchange (imposition/promise).
struct Binding {
  EdgeRef giver;
  EdgeRef user;
  std::string giver_agent;
  std::string user_agent;
  Params matched;

  bool is_exchange() const { return giver.kind == EdgeKind::imposition || user.kind == EdgeKind::imposition; }
  friend bool operator==(const Binding&, const Binding&) = default;
};

/// Resolves the guards a match recorded. Returns the narrowed params, or
/// nothing when a guard fails.
inline std::optional<Params> resolve_guards(const PromiseGraph& g, const MatchResult& m, const std::string& give_owner,
                                            const std::string& use_owner) {
  Params out = m.params;
  for (const auto& pg : m.guards) {
    const Agent& owner = g.agent(pg.side == MatchSide::give ? give_owner : use_owner);
    Pattern& p = out[pg.key];
    switch (pg.guard) {
    case Guard::destination_equals_self: {
      const auto* self = owner.attr(pg.key);
      if (!self || !p.admits(*self)) return std::nullopt;
      p = Pattern::literal(*self);
      break;
    }
    case Guard::distinct_from_all_peers: {
      const std::string* v = owner.attr(pg.key);
      std::string lit;
      if (p.is_literal()) {
        lit = *p.alternatives.begin();
        v = &lit;
      }
      if (!v) return std::nullopt;
      for (const auto& [id, a] : g.agents())
        if (id != owner.id)
          if (const auto* other = a.attr(pg.key); other && *other == *v) return std::nullopt;
      break;
    }
    case Guard::none: break;
    }
  }
  return out;
}

inline std::vector<Binding> find_bindings(const PromiseGraph& g) {
  std::vector<Binding> out;
  const auto& ps = g.promises();
  const auto& is = g.impositions();
  auto try_bind = [&](const Body& plus, const Body& minus, EdgeRef giver, EdgeRef user, const std::string& ga,
                      const std::string& ua) {
    auto m = match_bodies(plus, minus);
    if (!m) return;
    auto resolved = resolve_guards(g, *m, ga, ua);
    if (!resolved) return;
    out.push_back({giver, user, ga, ua, std::move(*resolved)});
  };
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].body.polarity != Polarity::give) continue;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (ps[j].body.polarity != Polarity::use) continue;
      if (!g.covers(ps[i], ps[j].promiser) || !g.covers(ps[j], ps[i].promiser)) continue;
      try_bind(ps[i].body, ps[j].body, {EdgeKind::promise, i}, {EdgeKind::promise, j}, ps[i].promiser,
               ps[j].promiser);
    }
  }
  for (std::size_t k = 0; k < is.size(); ++k) {
    const auto& imp = is[k];
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (ps[j].promiser != imp.imposee || !g.covers(ps[j], imp.imposer)) continue;
      if (imp.body.polarity == Polarity::give && ps[j].body.polarity == Polarity::use)
        try_bind(imp.body, ps[j].body, {EdgeKind::imposition, k}, {EdgeKind::promise, j}, imp.imposer,
                 imp.imposee);
      else if (imp.body.polarity == Polarity::use && ps[j].body.polarity == Polarity::give)
        try_bind(ps[j].body, imp.body, {EdgeKind::promise, j}, {EdgeKind::imposition, k}, imp.imposee,
                 imp.imposer);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Binding& a, const Binding& b) {
    return std::tie(a.giver_agent, a.user_agent, a.giver, a.user) <
           std::tie(b.giver_agent, b.user_agent, b.giver, b.user);
  });
  return out;
}

/// Impositions no use-promise at the imposee accepts; an autonomous imposee drops them.
inline std::vector<std::size_t> unmatched_impositions(const PromiseGraph& g) {
  std::set<std::size_t> matched;
  for (const auto& b : find_bindings(g)) {
    if (b.giver.kind == EdgeKind::imposition) matched.insert(b.giver.index);
    if (b.user.kind == EdgeKind::imposition) matched.insert(b.user.index);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.impositions().size(); ++i)
    if (!matched.count(i)) out.push_back(i);
  return out;
}

/// Promises whose distinct-from-all-peers literal is also claimed by another agent.
inline std::vector<std::size_t> uniqueness_violations(const PromiseGraph& g) {
  std::vector<std::size_t> out;
  const auto& ps = g.promises();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (const auto& [key, pat] : ps[i].body.params) {
      if (pat.guard != Guard::distinct_from_all_peers || !pat.is_literal()) continue;
      const auto& v = *pat.alternatives.begin();
      bool clash = false;
      for (std::size_t j = 0; j < ps.size() && !clash; ++j) {
        if (ps[j].promiser == ps[i].promiser || ps[j].body.kind != ps[i].body.kind) continue;
        auto it = ps[j].body.params.find(key);
        clash = it != ps[j].body.params.end() && it->second.admits(v) && !it->second.is_wildcard();
      }
      for (const auto& [id, a] : g.agents())
        if (id != ps[i].promiser && a.attr(key) && *a.attr(key) == v) clash = true;
      if (clash) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

struct Role {
  std::string name;
  std::set<std::string> members;
  std::vector<std::string> signature;
  friend bool operator==(const Role&, const Role&) = default;
};

/// Sorted canonical bodies of the promises an agent makes, promisees erased.
inline std::vector<std::string> outward_signature(const PromiseGraph& g, const std::string& agent) {
  std::vector<std::string> sig;
  for (const auto& p : g.promises())
    if (p.promiser == agent) sig.push_back(p.body.canonical());
  std::sort(sig.begin(), sig.end());
  return sig;
}

inline std::string role_name(const std::vector<std::string>& signature) {
  std::string joined;
  for (const auto& s : signature) {
    joined += s;
    joined += '\n';
  }
  std::ostringstream os;
  os << "role-" << std::hex << fnv1a(joined);
  return os.str();
}

inline std::vector<Role> infer_roles(const PromiseGraph& g) {
  std::map<std::vector<std::string>, std::set<std::string>> groups;
  for (const auto& [id, _] : g.agents()) groups[outward_signature(g, id)].insert(id);
  std::vector<Role> out;
  for (auto& [sig, members] : groups) out.push_back({role_name(sig), std::move(members), sig});
  std::sort(out.begin(), out.end(), [](const Role& a, const Role& b) {
    return std::tie(a.name, a.members) < std::tie(b.name, b.members);
  });
  return out;
}

/// Bodies of promises crossing the container boundary outward, one per external target.
inline std::vector<Body> container_membrane(const PromiseGraph& g, const std::string& name) {
  const auto& members = g.container(name);
  std::vector<Body> out;
  for (const auto& p : g.promises()) {
    if (!members.count(p.promiser)) continue;
    for (const auto& t : g.expand(p.promisee, p.promiser))
      if (!members.count(t)) out.push_back(p.body);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Replaces the container's members by one container-boundary agent named
/// after the container; the result keeps a singleton container of that name.
inline PromiseGraph collapse_container(const PromiseGraph& g, const std::string& name) {
  const auto members = g.container(name);
  if (g.has_agent(name) && !members.count(name))
    throw ModelError("collapse_container: agent '" + name + "' already exists");
  auto rename = [&](const std::string& id) { return members.count(id) ? name : id; };

  PromiseGraph out;
  for (const auto& [id, a] : g.agents())
    if (!members.count(id)) out.add_agent(a);
  Agent boundary{name, AgentKind::container_boundary, {}};
  out.add_agent(boundary);

  std::vector<std::pair<std::string, std::set<std::string>>> kept;
  for (const auto& [cname, cm] : g.containers()) {
    if (cname == name) continue;
    bool inside = std::includes(members.begin(), members.end(), cm.begin(), cm.end()) && !cm.empty();
    if (inside) continue;
    std::set<std::string> renamed;
    for (const auto& m : cm) renamed.insert(rename(m));
    kept.emplace_back(cname, std::move(renamed));
  }
  // Outer containers first so the forest check sees supersets before subsets.
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
  out.add_container(name, {name});
  for (auto& [cname, cm] : kept) out.add_container(cname, std::move(cm));
  for (const auto& [_, t] : g.tables()) out.add_table(t);

  auto internal_scope = [&](const Target& t) {
    if (t.kind != Target::Kind::container || t.name == name) return false;
    const auto& cm = g.container(t.name);
    return !cm.empty() && std::includes(members.begin(), members.end(), cm.begin(), cm.end());
  };
  for (const auto& p : g.promises()) {
    bool from_inside = members.count(p.promiser) != 0;
    Target t = p.promisee;
    if (t.kind == Target::Kind::agent) {
      if (from_inside && members.count(t.name)) continue;
      t.name = rename(t.name);
    } else if (from_inside && (internal_scope(t) || (t.kind == Target::Kind::container && t.name == name))) {
      continue;
    } else if (internal_scope(t)) {
      t = Target::agent(name);
    }
    out.add_promise(rename(p.promiser), t, p.body);
  }
  for (const auto& i : g.impositions()) {
    if (members.count(i.imposer) && members.count(i.imposee)) continue;
    out.add_imposition(rename(i.imposer), rename(i.imposee), i.body);
  }
  return out;
}

} // namespace pnet

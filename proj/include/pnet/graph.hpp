#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "addressing.hpp"
#include "body.hpp"

namespace pnet {

enum class AgentKind { interface, forwarder, service_host, proxy, controller, container_boundary };

inline std::string_view kind_name(AgentKind k) {
  switch (k) {
  case AgentKind::interface: return "interface";
  case AgentKind::forwarder: return "forwarder";
  case AgentKind::service_host: return "service-host";
  case AgentKind::proxy: return "proxy";
  case AgentKind::controller: return "controller";
  case AgentKind::container_boundary: return "container-boundary";
  }
  return "interface";
}

inline AgentKind parse_kind(std::string_view s) {
  for (auto k : {AgentKind::interface, AgentKind::forwarder, AgentKind::service_host, AgentKind::proxy,
                 AgentKind::controller, AgentKind::container_boundary})
    if (kind_name(k) == s) return k;
  throw ModelError("unknown agent kind '" + std::string(s) + "'");
}

inline bool is_valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_name_char);
}

struct Agent {
  std::string id;
  AgentKind kind = AgentKind::interface;
  std::map<std::string, std::string> attributes;

  const std::string* attr(const std::string& key) const {
    auto it = attributes.find(key);
    return it == attributes.end() ? nullptr : &it->second;
  }

  friend bool operator==(const Agent&, const Agent&) = default;
};

/// The agent's own multiplet address, assembled from its address attributes.
inline std::optional<MultipletAddress> address_of(const Agent& a) {
  std::vector<AddressComponent> cs;
  for (auto label : kAddressLabels) {
    if (label == "tni") continue;
    if (const auto* v = a.attr(std::string(label))) cs.emplace_back(std::string(label), *v);
  }
  if (cs.empty()) return std::nullopt;
  return MultipletAddress(std::move(cs));
}

/// Promisee selector: one agent, the whole graph (`*`), or a container (`@name`).
struct Target {
  enum class Kind { agent, all, container };
  Kind kind = Kind::agent;
  std::string name;

  static Target agent(std::string id) { return {Kind::agent, std::move(id)}; }
  static Target all() { return {Kind::all, {}}; }
  static Target container(std::string n) { return {Kind::container, std::move(n)}; }

  bool is_scope() const { return kind != Kind::agent; }

  std::string to_string() const {
    switch (kind) {
    case Kind::all: return "*";
    case Kind::container: return "@" + name;
    case Kind::agent: break;
    }
    return name;
  }

  friend bool operator==(const Target&, const Target&) = default;
  friend auto operator<=>(const Target&, const Target&) = default;
};

struct Promise {
  std::string promiser;
  Target promisee;
  Body body;
  friend bool operator==(const Promise&, const Promise&) = default;
};

struct Imposition {
  std::string imposer;
  std::string imposee;
  Body body;
  friend bool operator==(const Imposition&, const Imposition&) = default;
};

enum class EdgeKind { promise, imposition };

struct EdgeRef {
  EdgeKind kind = EdgeKind::promise;
  std::size_t index = 0;
  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
  friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

/// Agents, promise and imposition edges, containers and transducer tables.
class PromiseGraph {
public:
  void add_agent(Agent a) {
    if (!is_valid_name(a.id)) throw ModelError("invalid agent id '" + a.id + "'");
    if (agents_.count(a.id)) throw ModelError("duplicate agent id '" + a.id + "'");
    for (const auto& [k, v] : a.attributes)
      if (k.empty() || v.empty()) throw ModelError("agent '" + a.id + "' has an empty attribute");
    agents_.emplace(a.id, std::move(a));
  }

  /// Adds `a` or checks that an identical agent is already present.
  void ensure_agent(const Agent& a) {
    auto it = agents_.find(a.id);
    if (it == agents_.end()) return add_agent(a);
    if (it->second.kind != a.kind) throw ModelError("agent '" + a.id + "' redeclared with a different kind");
    for (const auto& [k, v] : a.attributes) {
      auto [pos, fresh] = it->second.attributes.emplace(k, v);
      if (!fresh && pos->second != v)
        throw ModelError("agent '" + a.id + "' redeclared with conflicting attribute '" + k + "'");
    }
  }

  std::size_t add_promise(std::string promiser, Target promisee, Body body) {
    require_agent(promiser);
    body.validate();
    switch (promisee.kind) {
    case Target::Kind::agent:
      require_agent(promisee.name);
      if (promisee.name == promiser) throw ModelError("promise from '" + promiser + "' to itself");
      break;
    case Target::Kind::container:
      if (!containers_.count(promisee.name)) throw ModelError("unknown container '" + promisee.name + "'");
      break;
    case Target::Kind::all: break;
    }
    if (auto it = body.params.find("by"); it != body.params.end())
      if (!(it->second.is_literal() && *it->second.alternatives.begin() == promiser))
        throw ModelError("agent '" + promiser + "' cannot promise the behaviour of another agent");
    promises_.push_back({std::move(promiser), std::move(promisee), std::move(body)});
    return promises_.size() - 1;
  }

  std::size_t add_imposition(std::string imposer, std::string imposee, Body body) {
    require_agent(imposer);
    require_agent(imposee);
    body.validate();
    if (imposer == imposee) throw ModelError("imposition from '" + imposer + "' onto itself");
    impositions_.push_back({std::move(imposer), std::move(imposee), std::move(body)});
    return impositions_.size() - 1;
  }

  void add_container(const std::string& name, std::set<std::string> members) {
    if (!is_valid_name(name)) throw ModelError("invalid container name '" + name + "'");
    if (containers_.count(name)) throw ModelError("duplicate container '" + name + "'");
    for (const auto& m : members) require_agent(m);
    for (const auto& [other, om] : containers_) {
      bool inter = std::any_of(members.begin(), members.end(), [&](const auto& m) { return om.count(m) != 0; });
      if (!inter) continue;
      bool sub = std::includes(om.begin(), om.end(), members.begin(), members.end());
      bool sup = std::includes(members.begin(), members.end(), om.begin(), om.end());
      if (!sub && !sup)
        throw ModelError("container '" + name + "' overlaps '" + other + "' without nesting");
    }
    containers_.emplace(name, std::move(members));
  }

  void add_table(TransducerTable t) {
    if (!is_valid_name(t.name)) throw ModelError("invalid table name '" + t.name + "'");
    if (tables_.count(t.name)) throw ModelError("duplicate table '" + t.name + "'");
    tables_.emplace(t.name, std::move(t));
  }

  void set_attribute(const std::string& agent, const std::string& key, const std::string& value) {
    require_agent(agent);
    agents_.at(agent).attributes[key] = value;
  }

  const std::map<std::string, Agent>& agents() const { return agents_; }
  const std::vector<Promise>& promises() const { return promises_; }
  const std::vector<Imposition>& impositions() const { return impositions_; }
  const std::map<std::string, std::set<std::string>>& containers() const { return containers_; }
  const std::map<std::string, TransducerTable>& tables() const { return tables_; }

  bool has_agent(const std::string& id) const { return agents_.count(id) != 0; }
  const Agent& agent(const std::string& id) const {
    auto it = agents_.find(id);
    if (it == agents_.end()) throw ModelError("unknown agent '" + id + "'");
    return it->second;
  }
  const std::set<std::string>& container(const std::string& name) const {
    auto it = containers_.find(name);
    if (it == containers_.end()) throw ModelError("unknown container '" + name + "'");
    return it->second;
  }
  const TransducerTable* table(const std::string& name) const {
    auto it = tables_.find(name);
    return it == tables_.end() ? nullptr : &it->second;
  }

  /// Agents a promise from `promiser` addresses, in id order, never the promiser.
  std::vector<std::string> expand(const Target& t, const std::string& promiser) const {
    std::vector<std::string> out;
    switch (t.kind) {
    case Target::Kind::agent:
      out.push_back(t.name);
      break;
    case Target::Kind::all:
      for (const auto& [id, _] : agents_)
        if (id != promiser) out.push_back(id);
      break;
    case Target::Kind::container:
      for (const auto& id : container(t.name))
        if (id != promiser) out.push_back(id);
      break;
    }
    return out;
  }

  bool covers(const Promise& p, const std::string& agent) const {
    if (agent == p.promiser) return false;
    switch (p.promisee.kind) {
    case Target::Kind::agent: return p.promisee.name == agent;
    case Target::Kind::all: return agents_.count(agent) != 0;
    case Target::Kind::container: return container(p.promisee.name).count(agent) != 0;
    }
    return false;
  }

  // Copies with one element removed; used by failure analyses and mutation tests.

  PromiseGraph without_promise(std::size_t index) const {
    PromiseGraph g = *this;
    g.promises_.erase(g.promises_.begin() + static_cast<std::ptrdiff_t>(index));
    return g;
  }

  PromiseGraph without_imposition(std::size_t index) const {
    PromiseGraph g = *this;
    g.impositions_.erase(g.impositions_.begin() + static_cast<std::ptrdiff_t>(index));
    return g;
  }

  /// Removes the agent with all incident edges and container memberships.
  PromiseGraph without_agent(const std::string& id) const {
    require_agent(id);
    PromiseGraph g;
    g.tables_ = tables_;
    for (const auto& [aid, a] : agents_)
      if (aid != id) g.agents_.emplace(aid, a);
    for (const auto& [name, members] : containers_) {
      auto m = members;
      m.erase(id);
      g.containers_.emplace(name, std::move(m));
    }
    for (const auto& p : promises_)
      if (p.promiser != id && !(p.promisee.kind == Target::Kind::agent && p.promisee.name == id))
        g.promises_.push_back(p);
    for (const auto& i : impositions_)
      if (i.imposer != id && i.imposee != id) g.impositions_.push_back(i);
    return g;
  }

  /// Adds everything from `other`; shared agents must agree.
  void merge(const PromiseGraph& other) {
    for (const auto& [_, a] : other.agents_) ensure_agent(a);
    for (const auto& [name, members] : other.containers_) {
      auto it = containers_.find(name);
      if (it == containers_.end()) {
        add_container(name, members);
      } else if (it->second != members) {
        throw ModelError("container '" + name + "' merged with different members");
      }
    }
    for (const auto& [name, t] : other.tables_) {
      auto it = tables_.find(name);
      if (it == tables_.end()) add_table(t);
      else if (!(it->second == t)) throw ModelError("table '" + name + "' merged with different entries");
    }
    for (const auto& p : other.promises_) add_promise(p.promiser, p.promisee, p.body);
    for (const auto& i : other.impositions_) add_imposition(i.imposer, i.imposee, i.body);
  }

  Promise& mutable_promise(std::size_t i) { return promises_.at(i); }

  friend bool operator==(const PromiseGraph& a, const PromiseGraph& b) {
    return a.agents_ == b.agents_ && a.promises_ == b.promises_ && a.impositions_ == b.impositions_ &&
           a.containers_ == b.containers_ && a.tables_ == b.tables_;
  }

private:
  void require_agent(const std::string& id) const {
    if (!agents_.count(id)) throw ModelError("unknown agent '" + id + "'");
  }

  std::map<std::string, Agent> agents_;
  std::vector<Promise> promises_;
  std::vector<Imposition> impositions_;
  std::map<std::string, std::set<std::string>> containers_;
  std::map<std::string, TransducerTable> tables_;
};

} // namespace pnet

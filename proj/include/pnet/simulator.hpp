#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "addressing.hpp"
#include "graph.hpp"
#include "promise_core.hpp"

namespace pnet {

inline constexpr unsigned kDefaultTtl = 32;

struct Message {
  MultipletAddress address;
  std::string payload;
  unsigned ttl = kDefaultTtl;
};

enum class Action {
  imposed,
  accepted,
  accepted_any,
  forwarded,
  forwarded_clause_1,
  forwarded_clause_2,
  forwarded_clause_3,
  transduced,
  encapsulated,
  decapsulated,
  flooded,
  dropped_no_promise,
  dropped_ttl,
};

inline std::string_view action_name(Action a) {
  switch (a) {
  case Action::imposed: return "imposed";
  case Action::accepted: return "accepted";
  case Action::accepted_any: return "accepted-any";
  case Action::forwarded: return "forwarded";
  case Action::forwarded_clause_1: return "forwarded-clause-1";
  case Action::forwarded_clause_2: return "forwarded-clause-2";
  case Action::forwarded_clause_3: return "forwarded-clause-3";
  case Action::transduced: return "transduced";
  case Action::encapsulated: return "encapsulated";
  case Action::decapsulated: return "decapsulated";
  case Action::flooded: return "flooded";
  case Action::dropped_no_promise: return "dropped-no-promise";
  case Action::dropped_ttl: return "dropped-ttl";
  }
  return "?";
}

inline bool is_terminal(Action a) {
  return a == Action::accepted || a == Action::dropped_no_promise || a == Action::dropped_ttl;
}

struct TraceEvent {
  std::size_t hop = 0;
  std::string agent;
  Action action = Action::imposed;
  MultipletAddress address;
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct DeliveryTrace {
  std::vector<TraceEvent> events;
  /// Agents on the delivery path, source first; empty unless accepted.
  std::vector<std::string> path;
  std::string payload;

  bool accepted() const { return !events.empty() && events.back().action == Action::accepted; }
  const TraceEvent& terminal() const { return events.back(); }
  bool accepted_at(const std::string& agent) const { return accepted() && events.back().agent == agent; }

  /// `hop<TAB>agent<TAB>action<TAB>address` lines.
  std::string to_text() const {
    std::string s;
    for (const auto& e : events) {
      s += std::to_string(e.hop);
      s += '\t';
      s += e.agent;
      s += '\t';
      s += action_name(e.action);
      s += '\t';
      s += e.address.to_string();
      s += '\n';
    }
    return s;
  }

  friend bool operator==(const DeliveryTrace&, const DeliveryTrace&) = default;
};

namespace detail {

inline Body message_body(const MultipletAddress& addr) {
  Params ps;
  for (const auto& c : visible_components(addr)) ps[c.label] = Pattern::literal(c.value);
  return Body(Polarity::give, "deliver", std::move(ps));
}

/// Every shared key intersects.
inline bool params_compatible(const Params& a, const Params& b) {
  for (const auto& [k, p] : a) {
    auto it = b.find(k);
    if (it != b.end() && !p.intersect(it->second)) return false;
  }
  return true;
}

enum class Acceptance { none, any, self };

class Engine {
public:
  Engine(const PromiseGraph& g, bool decapsulate = true) : g_(g), decapsulate_(decapsulate) {}

  /// Agents sharing any edge with `id`, in id order.
  std::vector<std::string> scope(const std::string& id) const {
    std::set<std::string> out;
    for (const auto& p : g_.promises()) {
      if (p.promiser == id)
        for (const auto& t : g_.expand(p.promisee, id)) out.insert(t);
      else if (g_.covers(p, id))
        out.insert(p.promiser);
    }
    for (const auto& i : g_.impositions()) {
      if (i.imposer == id) out.insert(i.imposee);
      if (i.imposee == id) out.insert(i.imposer);
    }
    out.erase(id);
    return {out.begin(), out.end()};
  }

  Acceptance acceptance(const std::string& receiver, const std::string& sender, const Body& msg) const {
    const Agent& r = g_.agent(receiver);
    Acceptance best = Acceptance::none;
    for (const auto& p : g_.promises()) {
      if (p.promiser != receiver || p.body.kind != "deliver" || p.body.polarity != Polarity::use) continue;
      if (!g_.covers(p, sender)) continue;
      auto m = match_bodies(msg, p.body);
      if (!m) continue;
      bool self_guard = false, ok = true;
      for (const auto& pg : m->guards) {
        if (pg.guard != Guard::destination_equals_self || pg.side != MatchSide::use) continue;
        self_guard = true;
        auto it = msg.params.find(pg.key);
        const auto* own = r.attr(pg.key);
        if (it == msg.params.end() || !own || !it->second.admits(*own)) ok = false;
      }
      if (!ok) continue;
      if (self_guard) return Acceptance::self;
      best = Acceptance::any;
    }
    return best;
  }

  bool has_promise(const std::string& agent, std::string_view kind, Polarity pol) const {
    for (const auto& p : g_.promises())
      if (p.promiser == agent && p.body.kind == kind && p.body.polarity == pol) return true;
    return false;
  }

  std::vector<std::size_t> l2_forwards(const std::string& agent) const {
    std::vector<std::size_t> out;
    const auto& ps = g_.promises();
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (ps[i].promiser == agent && ps[i].body.kind == "forward" && ps[i].body.polarity == Polarity::give &&
          !ps[i].body.params.count("clause"))
        out.push_back(i);
    return out;
  }

  /// A promise from `a` to `b` of `kind` bound by a matching use-promise from `b` back to `a`.
  bool contract(const std::string& a, const std::string& b, std::string_view kind, const Params* msg = nullptr) const {
    for (const auto& p : g_.promises()) {
      if (p.promiser != a || p.body.kind != kind || p.body.polarity != Polarity::give || !g_.covers(p, b)) continue;
      if (msg && !params_compatible(p.body.params, *msg)) continue;
      for (const auto& u : g_.promises())
        if (u.promiser == b && u.body.kind == kind && u.body.polarity == Polarity::use && g_.covers(u, a) &&
            match_bodies(p.body, u.body))
          return true;
    }
    return false;
  }

  bool active(const std::string& agent) const {
    const Agent& a = g_.agent(agent);
    return a.attr("table") || has_promise(agent, "forward", Polarity::give) ||
           has_promise(agent, "encapsulate", Polarity::give) || has_promise(agent, "present", Polarity::give);
  }

  std::optional<std::string> tunnel_tni(const MultipletAddress& addr) const {
    for (const auto& c : visible_components(addr))
      if (c.label == "tni") return c.value;
    return std::nullopt;
  }

  DeliveryTrace run(const std::string& source, const Message& msg) {
    g_.agent(source);
    trace_ = {};
    trace_.payload = msg.payload;
    nodes_.clear();
    queue_.clear();
    processed_.clear();
    saw_ttl_ = false;

    record(source, Action::imposed, msg.address);
    auto self = address_of(g_.agent(source));
    if (self && *self == msg.address) {
      record(source, Action::accepted, msg.address);
      trace_.path = {source};
      return trace_;
    }
    std::size_t root = node(source, npos);
    processed_.insert({source, msg.address});
    emit(source, msg.address, msg.ttl, source_targets(source, msg.address), root);

    while (!queue_.empty()) {
      Delivery d = std::move(queue_.front());
      queue_.pop_front();
      if (receive(d)) return trace_;
    }
    if (trace_.events.empty() || !is_terminal(trace_.events.back().action)) {
      const auto& last = trace_.events.back();
      record(last.agent, saw_ttl_ ? Action::dropped_ttl : Action::dropped_no_promise, last.address);
    }
    return trace_;
  }

private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct Delivery {
    std::string from;
    std::string to;
    MultipletAddress address;
    unsigned ttl;
    bool targeted;
    std::size_t parent;
  };

  struct Node {
    std::string agent;
    std::size_t parent;
  };

  std::size_t node(const std::string& agent, std::size_t parent) {
    nodes_.push_back({agent, parent});
    return nodes_.size() - 1;
  }

  void record(const std::string& agent, Action a, const MultipletAddress& addr) {
    trace_.events.push_back({trace_.events.size(), agent, a, addr});
  }

  std::vector<std::string> source_targets(const std::string& src, const MultipletAddress& addr) const {
    auto targets = scope(src);
    const Agent& a = g_.agent(src);
    const auto* gw = a.attr("gateway");
    const auto* own = a.attr("prefix");
    if (!gw || !own) return targets;
    std::optional<std::string> dst_prefix;
    for (const auto& c : visible_components(addr))
      if (c.label == "prefix") dst_prefix = c.value;
    if (!dst_prefix) return targets;
    if (*dst_prefix != *own) {
      if (!g_.has_agent(*gw)) return {};
      return {*gw};
    }
    std::erase(targets, *gw);
    return targets;
  }

  void emit(const std::string& from, const MultipletAddress& addr, unsigned ttl, const std::vector<std::string>& targets,
            std::size_t parent, bool targeted = false) {
    if (targets.empty()) return;
    if (ttl == 0) {
      record(from, Action::dropped_ttl, addr);
      saw_ttl_ = true;
      return;
    }
    bool single = targeted || targets.size() == 1;
    for (const auto& t : targets) queue_.push_back({from, t, addr, ttl - 1, single, parent});
  }

  void finish_path(std::size_t n) {
    std::vector<std::string> rev;
    for (; n != npos; n = nodes_[n].parent) rev.push_back(nodes_[n].agent);
    trace_.path.assign(rev.rbegin(), rev.rend());
  }

  bool receive(const Delivery& d) {
    Body msg = message_body(d.address);
    Acceptance acc = acceptance(d.to, d.from, msg);
    std::size_t here = node(d.to, d.parent);

    if (decapsulate_ && acc != Acceptance::none) {
      if (auto tni = tunnel_tni(d.address)) {
        if (decapsulates(d.to, *tni)) {
          auto inner = strip_tunnel(d.address);
          if (!inner) return false;
          record(d.to, Action::decapsulated, *inner);
          if (!processed_.insert({d.to, *inner}).second) return false;
          emit(d.to, *inner, d.ttl, scope(d.to), here);
          return false;
        }
      }
    }
    switch (acc) {
    case Acceptance::self:
      record(d.to, Action::accepted, d.address);
      finish_path(here);
      return true;
    case Acceptance::none:
      if (d.targeted) record(d.to, Action::dropped_no_promise, d.address);
      return false;
    case Acceptance::any: break;
    }
    if (!active(d.to)) return false;
    if (!processed_.insert({d.to, d.address}).second) return false;
    record(d.to, Action::accepted_any, d.address);
    process(d.to, d.address, d.ttl, here);
    return false;
  }

  bool decapsulates(const std::string& agent, const std::string& tni) const {
    for (const auto& p : g_.promises())
      if (p.promiser == agent && p.body.kind == "decapsulate" && p.body.polarity == Polarity::give) {
        auto it = p.body.params.find("tni");
        if (it == p.body.params.end() || it->second.admits(tni)) return true;
      }
    return false;
  }

  static std::optional<MultipletAddress> strip_tunnel(const MultipletAddress& addr) {
    std::vector<AddressComponent> inner;
    bool past = false;
    for (const auto& c : addr.components()) {
      if (past) inner.push_back(c);
      if (c.label == "tni") past = true;
    }
    if (inner.empty()) return std::nullopt;
    return MultipletAddress(std::move(inner));
  }

  void process(const std::string& agent, MultipletAddress addr, unsigned ttl, std::size_t here) {
    const Agent& a = g_.agent(agent);
    if (const auto* tname = a.attr("table")) {
      if (const auto* table = g_.table(*tname)) {
        auto r = transduce(*table, addr);
        if (!r.no_match()) {
          addr = r.address;
          record(agent, Action::transduced, addr);
        }
      }
    }
    Body msg = message_body(addr);

    // Static L2 forward promises.
    auto fwds = l2_forwards(agent);
    std::set<std::string> next;
    for (auto i : fwds) {
      const auto& p = g_.promises()[i];
      if (params_compatible(p.body.params, msg.params))
        for (const auto& t : g_.expand(p.promisee, agent)) next.insert(t);
    }
    if (!next.empty()) {
      record(agent, Action::forwarded, addr);
      emit(agent, addr, ttl, {next.begin(), next.end()}, here, true);
      return;
    }

    // Tunnel ingress.
    if (!tunnel_tni(addr)) {
      for (const auto& p : g_.promises()) {
        if (p.promiser != agent || p.body.kind != "encapsulate" || p.body.polarity != Polarity::give) continue;
        if (p.promisee.kind != Target::Kind::agent || !params_compatible(p.body.params, msg.params)) continue;
        const std::string& egress = p.promisee.name;
        if (!contract(agent, egress, "encapsulate")) continue;
        auto tni = p.body.params.at("tni");
        if (!tni.is_literal()) continue;
        auto outer = tunnel_address(addr, *tni.alternatives.begin(), g_.agent(egress));
        if (!outer) {
          record(agent, Action::dropped_no_promise, addr);
          return;
        }
        record(agent, Action::encapsulated, *outer);
        if (!processed_.insert({agent, *outer}).second) return;
        emit(agent, *outer, ttl, source_targets(agent, *outer), here);
        return;
      }
    }

    // Presentation to a router core.
    for (const auto& p : g_.promises()) {
      if (p.promiser != agent || p.body.kind != "present" || p.body.polarity != Polarity::give) continue;
      if (p.promisee.kind != Target::Kind::agent) continue;
      route(p.promisee.name, agent, addr, ttl, here);
      return;
    }

    if (!fwds.empty()) {
      record(agent, Action::flooded, addr);
      emit(agent, addr, ttl, scope(agent), here);
    }
  }

  static std::optional<MultipletAddress> tunnel_address(const MultipletAddress& inner, const std::string& tni,
                                                        const Agent& egress) {
    try {
      auto out = encapsulate(inner, AddressComponent("tni", tni));
      if (const auto* l = egress.attr("local")) out = encapsulate(out, AddressComponent("local", *l));
      if (const auto* p = egress.attr("prefix")) out = encapsulate(out, AddressComponent("prefix", *p));
      return out;
    } catch (const ModelError&) {
      return std::nullopt;
    }
  }

  std::set<std::string> clauses_of(const std::string& router, const std::string& iface) const {
    for (const auto& p : g_.promises())
      if (p.promiser == router && p.body.kind == "forward" && p.body.polarity == Polarity::give &&
          g_.covers(p, iface))
        if (auto it = p.body.params.find("clause"); it != p.body.params.end()) return it->second.alternatives;
    return {};
  }

  std::vector<std::string> router_interfaces(const std::string& router) const {
    std::set<std::string> out;
    for (const auto& p : g_.promises())
      if (p.body.kind == "present" && p.body.polarity == Polarity::give && p.promisee.kind == Target::Kind::agent &&
          p.promisee.name == router)
        out.insert(p.promiser);
    return {out.begin(), out.end()};
  }

  /// Forwarding clauses, strictly 1 -> 2 -> 3, first match wins.
  void route(const std::string& router, const std::string& ingress, const MultipletAddress& addr, unsigned ttl,
             std::size_t here) {
    if (!g_.has_agent(router)) return;
    if (!contract(router, ingress, "forward")) {
      record(router, Action::dropped_no_promise, addr);
      return;
    }
    auto clauses = clauses_of(router, ingress);
    std::optional<std::string> dst_prefix;
    for (const auto& c : visible_components(addr))
      if (c.label == "prefix") dst_prefix = c.value;
    if (!dst_prefix) return;

    std::optional<std::string> egress;
    Action via = Action::forwarded_clause_1;
    if (clauses.count("1")) {
      for (const auto& i : router_interfaces(router)) {
        const auto* p = g_.agent(i).attr("prefix");
        if (p && *p == *dst_prefix) {
          if (i == ingress) return;
          egress = i;
          break;
        }
      }
    }
    const Agent& core = g_.agent(router);
    if (!egress && clauses.count("2")) {
      if (const auto* rib = core.attr("rib"))
        if (const auto* table = g_.table(*rib))
          if (auto idx = lookup(*table, addr)) {
            egress = table->entries[*idx].rewrite.at(0).value;
            via = Action::forwarded_clause_2;
          }
    }
    if (!egress && clauses.count("3")) {
      if (const auto* def = core.attr("default")) {
        egress = *def;
        via = Action::forwarded_clause_3;
      }
    }
    if (!egress) {
      record(router, Action::dropped_no_promise, addr);
      return;
    }
    record(router, via, addr);
    std::size_t at_router = node(router, here);
    if (!g_.has_agent(*egress) || !contract(router, *egress, "forward")) {
      record(g_.has_agent(*egress) ? *egress : router, Action::dropped_no_promise, addr);
      return;
    }
    std::size_t at_egress = node(*egress, at_router);
    if (!processed_.insert({*egress, addr}).second) return;
    auto targets = scope(*egress);
    std::erase(targets, router);
    emit(*egress, addr, ttl, targets, at_egress);
  }

  const PromiseGraph& g_;
  bool decapsulate_;
  DeliveryTrace trace_;
  std::vector<Node> nodes_;
  std::deque<Delivery> queue_;
  std::set<std::pair<std::string, MultipletAddress>> processed_;
  bool saw_ttl_ = false;
};

} // namespace detail

/// Injects a message at `source` and traces it through kept promises only.
inline DeliveryTrace inject(const PromiseGraph& g, const std::string& source, const Message& msg) {
  detail::Engine engine(g);
  return engine.run(source, msg);
}

inline MultipletAddress require_address(const PromiseGraph& g, const std::string& agent) {
  auto addr = address_of(g.agent(agent));
  if (!addr) throw ModelError("agent '" + agent + "' has no address");
  return *addr;
}

inline bool reachable(const PromiseGraph& g, const std::string& src, const std::string& dst) {
  g.agent(src);
  auto addr = require_address(g, dst);
  if (src == dst) return true;
  return inject(g, src, Message{addr, {}, kDefaultTtl}).accepted_at(dst);
}

/// Agents a broadcast from `src` reaches within its container scope, `src` included.
inline std::set<std::string> flood_set(const PromiseGraph& g, const std::string& src) {
  const Agent& origin = g.agent(src);
  Params scope_labels;
  for (const char* label : {"vlan", "prefix"})
    if (const auto* v = origin.attr(label)) scope_labels[label] = Pattern::literal(*v);

  detail::Engine engine(g);
  auto receives = [&](const std::string& receiver, const std::string& sender) {
    const Agent& r = g.agent(receiver);
    for (const auto& p : g.promises()) {
      if (p.promiser != receiver || p.body.polarity != Polarity::use) continue;
      if (p.body.kind != "deliver" && p.body.kind != "monitor") continue;
      if (!g.covers(p, sender)) continue;
      bool ok = true;
      for (const auto& [label, want] : scope_labels) {
        auto it = p.body.params.find(label);
        if (it == p.body.params.end() || !it->second.intersect(want)) {
          ok = false;
          break;
        }
        if (it->second.guard == Guard::destination_equals_self) {
          const auto* own = r.attr(label);
          if (!own || !want.admits(*own)) ok = false;
        }
      }
      if (ok) return true;
    }
    return false;
  };

  std::set<std::string> reached{src};
  std::deque<std::string> frontier{src};
  while (!frontier.empty()) {
    std::string at = frontier.front();
    frontier.pop_front();
    bool origin_or_switch = at == src || !engine.l2_forwards(at).empty();
    if (origin_or_switch) {
      for (const auto& peer : engine.scope(at))
        if (!reached.count(peer) && receives(peer, at)) {
          reached.insert(peer);
          frontier.push_back(peer);
        }
    }
    // Broadcasts cross a tunnel when the underlay carries unicast to the egress.
    for (const auto& p : g.promises()) {
      if (p.promiser != at || p.body.kind != "encapsulate" || p.body.polarity != Polarity::give) continue;
      if (p.promisee.kind != Target::Kind::agent || !detail::params_compatible(p.body.params, scope_labels)) continue;
      const auto& egress = p.promisee.name;
      if (reached.count(egress) || !engine.contract(at, egress, "encapsulate")) continue;
      const Agent& e = g.agent(egress);
      bool carried = true;
      if (e.attr("prefix") && e.attr("local")) {
        const auto& tni = *p.body.params.at("tni").alternatives.begin();
        MultipletAddress underlay({AddressComponent("prefix", *e.attr("prefix")),
                                   AddressComponent("local", *e.attr("local")), AddressComponent("tni", tni)});
        detail::Engine plain(g, false);
        carried = plain.run(at, Message{underlay, {}, kDefaultTtl}).accepted_at(egress);
      }
      if (!carried) continue;
      reached.insert(egress);
      for (const auto& peer : engine.scope(egress))
        if (!reached.count(peer) && receives(peer, egress)) {
          reached.insert(peer);
          frontier.push_back(peer);
        }
    }
  }
  return reached;
}

} // namespace pnet

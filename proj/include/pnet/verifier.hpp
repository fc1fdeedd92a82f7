#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "promise_core.hpp"
#include "simulator.hpp"

namespace pnet {

/// Canonical body set: duplicates collapse, polarity is kept.
class BodySet {
public:
  BodySet() = default;
  BodySet(std::initializer_list<Body> bs) {
    for (const auto& b : bs) insert(b);
  }
  template <class It>
  BodySet(It first, It last) {
    for (; first != last; ++first) insert(*first);
  }

  void insert(const Body& b) { bodies_.emplace(b.canonical(), b); }
  bool contains(const Body& b) const { return bodies_.count(b.canonical()) != 0; }
  std::size_t size() const { return bodies_.size(); }
  bool empty() const { return bodies_.empty(); }

  std::vector<Body> values() const {
    std::vector<Body> out;
    for (const auto& [_, b] : bodies_) out.push_back(b);
    return out;
  }

  friend bool operator==(const BodySet& a, const BodySet& b) {
    if (a.size() != b.size()) return false;
    return std::equal(a.bodies_.begin(), a.bodies_.end(), b.bodies_.begin(),
                      [](const auto& x, const auto& y) { return x.first == y.first; });
  }

private:
  std::map<std::string, Body> bodies_;
};

struct Witness {
  std::string category;
  std::string subject;
  std::string detail;
  friend bool operator==(const Witness&, const Witness&) = default;
};

struct AnalysisReport {
  bool verdict = true;
  std::vector<Witness> witnesses;
  std::vector<std::string> narrative;

  void fail(Witness w) {
    verdict = false;
    witnesses.push_back(std::move(w));
  }

  std::vector<std::string> subjects(const std::string& category) const {
    std::vector<std::string> out;
    for (const auto& w : witnesses)
      if (w.category == category) out.push_back(w.subject);
    return out;
  }

  std::string to_text() const {
    std::string s = verdict ? "verdict: true\n" : "verdict: false\n";
    for (const auto& w : witnesses) s += "witness: " + w.category + " " + w.subject + " -- " + w.detail + "\n";
    for (const auto& n : narrative) s += "  " + n + "\n";
    return s;
  }
};

// --- cooperation -----------------------------------------------------------

namespace detail {

inline AnalysisReport signalling_cooperation(const PromiseGraph& g, const std::string& src, const std::string& dst) {
  AnalysisReport r;
  auto addr = require_address(g, dst);
  if (src == dst) {
    r.narrative.push_back(src + " is its own destination");
    return r;
  }
  auto trace = inject(g, src, Message{addr, {}, kDefaultTtl});
  for (const auto& e : trace.events)
    r.narrative.push_back(e.agent + " " + std::string(action_name(e.action)) + " " + e.address.to_string());
  if (trace.accepted_at(dst)) return r;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];
    if (e.action == Action::dropped_no_promise && e.agent == src)
      r.fail({"missing-promise", dst, "no promise relation carries " + e.address.to_string() + " from " + src});
    else if (e.action == Action::dropped_no_promise)
      r.fail({"missing-promise", e.agent, "no -deliver at " + e.agent + " accepts " + e.address.to_string()});
    else if (e.action == Action::dropped_ttl)
      r.fail({"ttl", e.agent, "hop budget exhausted at " + e.agent});
  }
  if (r.verdict) r.fail({"missing-promise", dst, "no promise chain delivers to " + dst});
  return r;
}

inline bool bound(const PromiseGraph& g, const Promise& give, const Promise& use) {
  if (give.body.kind != use.body.kind || give.body.polarity != Polarity::give || use.body.polarity != Polarity::use)
    return false;
  if (!g.covers(give, use.promiser) || !g.covers(use, give.promiser)) return false;
  auto m = match_bodies(give.body, use.body);
  return m && resolve_guards(g, *m, give.promiser, use.promiser);
}

inline AnalysisReport content_cooperation(const PromiseGraph& g, const std::string& src, const std::string& dst,
                                          const std::string& kind) {
  g.agent(src);
  g.agent(dst);
  AnalysisReport r;
  std::map<std::string, std::string> parent{{src, src}};
  std::deque<std::string> frontier{src};
  const auto& ps = g.promises();
  while (!frontier.empty()) {
    auto at = frontier.front();
    frontier.pop_front();
    for (const auto& give : ps) {
      if (give.promiser != at || give.body.kind != kind || give.body.polarity != Polarity::give) continue;
      for (const auto& use : ps) {
        if (parent.count(use.promiser) || !bound(g, give, use)) continue;
        parent[use.promiser] = at;
        frontier.push_back(use.promiser);
      }
    }
  }
  if (parent.count(dst)) {
    std::vector<std::string> chain;
    for (std::string a = dst; a != src; a = parent[a]) chain.push_back(a);
    chain.push_back(src);
    std::string line;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) line += (line.empty() ? "" : " -> ") + *it;
    r.narrative.push_back("+" + kind + " chain: " + line);
    return r;
  }
  // Half-contracts touching the reached region name the missing promise.
  for (const auto& p : ps) {
    if (p.body.kind != kind) continue;
    for (const auto& peer : g.expand(p.promisee, p.promiser)) {
      bool touches = parent.count(p.promiser) || parent.count(peer);
      if (!touches) continue;
      bool has_partner = std::any_of(ps.begin(), ps.end(), [&](const Promise& q) {
        if (q.promiser != peer) return false;
        return p.body.polarity == Polarity::give ? bound(g, p, q) : bound(g, q, p);
      });
      if (has_partner) continue;
      char missing = p.body.polarity == Polarity::give ? '-' : '+';
      r.fail({"missing-promise", peer,
              std::string(1, missing) + kind + " at " + peer + " toward " + p.promiser + " is missing"});
    }
  }
  if (r.verdict) r.fail({"missing-promise", dst, "no +" + kind + " chain reaches " + dst});
  return r;
}

} // namespace detail

/// Without `service`, checks signalling delivery src -> dst (the verdict equals
/// reachable()). With a service kind, checks for a chain of +kind/-kind
/// contract bindings carrying that service from src to dst.
inline AnalysisReport check_cooperation(const PromiseGraph& g, const std::string& src, const std::string& dst,
                                        const std::optional<std::string>& service = std::nullopt) {
  if (service) return detail::content_cooperation(g, src, dst, *service);
  return detail::signalling_cooperation(g, src, dst);
}

// --- alignment -------------------------------------------------------------

inline AnalysisReport align_body_sets(const BodySet& desired, const BodySet& actual) {
  AnalysisReport r;
  for (const auto& d : desired.values())
    if (!actual.contains(d)) r.fail({"missing", d.canonical(), "desired but not promised"});
  for (const auto& b : actual.values())
    if (!desired.contains(b)) r.fail({"surplus", b.canonical(), "promised but not desired"});
  return r;
}

/// Fitness for purpose: desired bodies equal the container's membrane as sets.
inline AnalysisReport check_alignment(const BodySet& desired, const PromiseGraph& g, const std::string& container) {
  auto membrane = container_membrane(g, container);
  auto r = align_body_sets(desired, BodySet(membrane.begin(), membrane.end()));
  r.narrative.push_back("container " + container + ": " + std::to_string(membrane.size()) +
                        " membrane promises");
  return r;
}

// --- proxy -----------------------------------------------------------------

inline PromiseGraph expand_proxy(const PromiseGraph& g, const std::string& client, const std::string& proxy,
                                 const std::string& service, const Body& body) {
  if (client == proxy || proxy == service || client == service)
    throw ModelError("expand_proxy needs three distinct agents");
  if (body.polarity != Polarity::give) throw ModelError("expand_proxy needs a give body");
  PromiseGraph out = g;
  out.add_promise(service, Target::agent(proxy), body);
  out.add_promise(proxy, Target::agent(service), body.flipped());
  out.add_promise(proxy, Target::agent(client), body);
  out.add_promise(client, Target::agent(proxy), body.flipped());
  return out;
}

// --- failure analysis ------------------------------------------------------

/// Agents (other than the endpoints) whose removal breaks delivery.
inline std::set<std::string> single_points_of_failure(const PromiseGraph& g, const std::string& src,
                                                      const std::string& dst) {
  auto addr = require_address(g, dst);
  if (src == dst) return {};
  auto trace = inject(g, src, Message{addr, {}, kDefaultTtl});
  if (!trace.accepted_at(dst))
    throw ModelError("single_points_of_failure: " + dst + " is not reachable from " + src);
  std::set<std::string> out;
  for (const auto& [a, _] : g.agents()) {
    if (a == src || a == dst) continue;
    if (!reachable(g.without_agent(a), src, dst)) out.insert(a);
  }
  return out;
}

/// Promise edges whose individual removal breaks delivery.
inline std::vector<std::size_t> single_edge_failures(const PromiseGraph& g, const std::string& src,
                                                     const std::string& dst) {
  if (!reachable(g, src, dst))
    throw ModelError("single_edge_failures: " + dst + " is not reachable from " + src);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.promises().size(); ++i)
    if (!reachable(g.without_promise(i), src, dst)) out.push_back(i);
  return out;
}

inline bool coordinates_with(const PromiseGraph& g, const std::string& a, const std::string& b) {
  return std::any_of(g.promises().begin(), g.promises().end(), [&](const Promise& p) {
    return p.promiser == a && p.body.kind == "coordinate" && p.body.polarity == Polarity::give && g.covers(p, b);
  });
}

/// Redundancy group: one role, pairwise coordination, client-side failover.
inline AnalysisReport redundancy_check(const PromiseGraph& g, const std::string& group,
                                       const std::set<std::string>& clients) {
  const auto& members = g.container(group);
  AnalysisReport r;
  if (!members.empty()) {
    auto reference = outward_signature(g, *members.begin());
    for (const auto& m : members)
      if (outward_signature(g, m) != reference)
        r.fail({"role", m, m + " does not make the same promises as " + *members.begin()});
  }
  for (const auto& a : members)
    for (const auto& b : members)
      if (a != b && !coordinates_with(g, a, b))
        r.fail({"coordination", a + "->" + b, a + " makes no coordinate promise to " + b});
  for (const auto& c : clients) {
    g.agent(c);
    bool failover = std::any_of(g.promises().begin(), g.promises().end(), [&](const Promise& p) {
      if (p.promiser != c || p.body.polarity != Polarity::use) return false;
      for (const auto& [_, pat] : p.body.params) {
        auto n = std::count_if(pat.alternatives.begin(), pat.alternatives.end(),
                               [&](const std::string& v) { return members.count(v) != 0; });
        if (n >= 2) return true;
      }
      return false;
    });
    if (!failover) r.fail({"failover", c, c + " does not list two or more members of " + group + " as alternatives"});
  }
  r.narrative.push_back("group " + group + ": " + std::to_string(members.size()) + " members, " +
                        std::to_string(clients.size()) + " clients");
  return r;
}

struct ControlMetric {
  std::size_t imposition_count = 0;
  std::size_t policy_promise_count = 0;
  friend bool operator==(const ControlMetric&, const ControlMetric&) = default;
};

/// Live impositions the controller emits versus cached policy promises agents
/// adopted from it (contract bindings where the controller gives).
inline ControlMetric control_model_metric(const PromiseGraph& g, const std::string& controller) {
  g.agent(controller);
  ControlMetric m;
  for (const auto& i : g.impositions())
    if (i.imposer == controller) ++m.imposition_count;
  for (const auto& b : find_bindings(g))
    if (!b.is_exchange() && b.giver_agent == controller) ++m.policy_promise_count;
  return m;
}

} // namespace pnet

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace pnet::dsl {

struct Elaboration {
  std::optional<PromiseGraph> graph;
  std::vector<Diagnostic> diagnostics;
  std::optional<PolicySpec> policy;
};

/// Builds the promise graph: agents and builders first, then cells,
/// containers and tables, then edges, links, vlan tags and tunnels.
inline Elaboration elaborate(const ModelDocument& doc) {
  using namespace lower;
  Elaboration out;
  auto error = [&](Span s, std::string msg, std::string hint = {}) {
    out.diagnostics.push_back({Diagnostic::Severity::error, s, std::move(msg), std::move(hint)});
  };
  std::vector<std::pair<const Declaration*, Lowered>> decls;
  for (const auto& d : doc.declarations) {
    try {
      decls.emplace_back(&d, lower::declaration(d));
    } catch (const SyntaxError& e) {
      error(e.span, e.message, e.hint);
    }
  }
  PromiseGraph g;
  auto guarded = [&](Span s, auto&& f) {
    try {
      f();
    } catch (const ModelError& e) {
      error(s, e.what());
    }
  };
  auto need_agent = [&](const Word& w) {
    if (g.has_agent(w.text)) return true;
    error(w.span, "unknown agent '" + w.text + "'", "declare it with 'agent " + w.text + "'");
    return false;
  };

  // Agents and builders.
  for (const auto& [d, l] : decls) {
    Span s = d->keyword.span;
    if (auto* a = std::get_if<AgentDecl>(&l)) guarded(s, [&] { g.add_agent(a->agent); });
    if (auto* e = std::get_if<SegmentDecl>(&l))
      guarded(s, [&] { g.merge(build_ethernet_segment(e->interfaces, e->name)); });
    if (auto* w = std::get_if<SwitchDecl>(&l)) guarded(s, [&] { g.merge(build_switch(w->ports, w->name)); });
    if (auto* r = std::get_if<RouterDecl>(&l)) guarded(s, [&] { g.merge(build_router(r->spec)); });
  }

  // Policy cells compile as one spec.
  PolicySpec spec;
  Span policy_span;
  bool has_policy = false;
  for (const auto& [d, l] : decls) {
    if (auto* c = std::get_if<CellDecl>(&l)) {
      if (!has_policy) policy_span = d->keyword.span;
      has_policy = true;
      spec.cells.push_back(c->cell);
    }
    if (auto* ds = std::get_if<DesiredDecl>(&l)) {
      has_policy = true;
      spec.desired.insert(spec.desired.end(), ds->bodies.begin(), ds->bodies.end());
    }
  }
  if (has_policy) {
    guarded(policy_span, [&] {
      g.merge(compile_policy(spec));
      out.policy = spec;
    });
  }

  for (const auto& [d, l] : decls) {
    if (auto* c = std::get_if<ContainerDecl>(&l)) {
      bool ok = true;
      std::set<std::string> members;
      for (const auto& m : c->members) {
        ok = need_agent(m) && ok;
        members.insert(m.text);
      }
      if (ok) guarded(c->name.span, [&] { g.add_container(c->name.text, members); });
    }
    if (auto* t = std::get_if<TableDecl>(&l)) guarded(d->head[0].span, [&] { g.add_table(t->table); });
  }
  for (const auto& [id, a] : g.agents())
    if (const auto* t = a.attr("table"); t && !g.table(*t)) {
      Span s;
      for (const auto& [d, l] : decls)
        if (auto* ad = std::get_if<AgentDecl>(&l); ad && ad->agent.id == id) s = d->keyword.span;
      error(s, "agent '" + id + "' names unknown table '" + *t + "'");
    }
  for (const auto& [d, l] : decls) {
    auto* t = std::get_if<TableDecl>(&l);
    if (!t) continue;
    bool used = std::any_of(g.agents().begin(), g.agents().end(), [&](const auto& kv) {
      const auto* a = kv.second.attr("table");
      return a && *a == t->table.name;
    });
    if (!used)
      out.diagnostics.push_back({Diagnostic::Severity::warning, d->head[0].span,
                                 "table '" + t->table.name + "' is not used by any agent",
                                 "add table=" + t->table.name + " to a forwarder"});
  }

  std::map<std::string, int> tags;
  std::vector<const TunnelDecl*> tunnels;
  for (const auto& [d, l] : decls) {
    if (auto* e = std::get_if<EdgeDecl>(&l)) {
      bool ok = need_agent(e->from);
      if (e->target.kind == Target::Kind::agent) {
        ok = need_agent(e->target_word) && ok;
      } else if (e->target.kind == Target::Kind::container && !g.containers().count(e->target.name)) {
        error(e->target_word.span, "unknown container '" + e->target.name + "'");
        ok = false;
      }
      if (!ok) continue;
      guarded(d->keyword.span, [&] {
        if (e->imposition) g.add_imposition(e->from.text, e->target.name, e->body);
        else g.add_promise(e->from.text, e->target, e->body);
      });
    }
    if (auto* k = std::get_if<LinkDecl>(&l)) {
      if (need_agent(k->a) & need_agent(k->b)) guarded(d->keyword.span, [&] { g = link_interfaces(g, k->a.text, k->b.text); });
    }
    if (auto* v = std::get_if<VlanDecl>(&l)) {
      for (const auto& [w, tag] : v->tags) {
        if (!need_agent(w)) continue;
        if (auto [it, fresh] = tags.emplace(w.text, tag); !fresh && it->second != tag)
          error(w.span, "interface '" + w.text + "' tagged twice");
      }
    }
    if (auto* t = std::get_if<TunnelDecl>(&l)) tunnels.push_back(t);
  }
  if (!tags.empty()) {
    Span s;
    for (const auto& [d, l] : decls)
      if (std::holds_alternative<VlanDecl>(l)) s = d->keyword.span;
    guarded(s, [&] { g = build_vlan_overlay(g, tags); });
  }
  for (const auto* t : tunnels) {
    if (need_agent(t->ingress) & need_agent(t->egress))
      guarded(t->ingress.span, [&] { g = build_tunnel(g, t->ingress.text, t->egress.text, t->tni); });
  }

  std::stable_sort(out.diagnostics.begin(), out.diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::pair(a.span.line, a.span.col) < std::pair(b.span.line, b.span.col);
  });
  if (!has_errors(out.diagnostics)) out.graph = std::move(g);
  return out;
}

/// Parse and elaborate in one step; diagnostics from both stages.
inline Elaboration load_model(std::string_view text, std::string source_name = "model") {
  auto [doc, diags] = parse_model(text, std::move(source_name));
  if (has_errors(diags)) return {std::nullopt, std::move(diags), std::nullopt};
  auto e = elaborate(doc);
  e.diagnostics.insert(e.diagnostics.begin(), diags.begin(), diags.end());
  return e;
}

inline std::string address_text(const std::vector<AddressComponent>& cs) {
  std::string s;
  for (const auto& c : cs) s += (s.empty() ? "" : ",") + c.to_string();
  return s;
}

/// Model text for a graph using only agent, container, table and edge
/// declarations; elaborating it yields an equal graph.
inline std::string render_graph(const PromiseGraph& g) {
  std::string s;
  for (const auto& [id, a] : g.agents()) {
    s += "agent " + id + " kind=" + std::string(kind_name(a.kind));
    for (const auto& [k, v] : a.attributes) s += " " + k + "=" + v;
    s += "\n";
  }
  for (const auto& [name, t] : g.tables()) {
    s += "table " + name + " {\n";
    for (const auto& e : t.entries) s += "  " + address_text(e.match) + " -> " + address_text(e.rewrite) + "\n";
    if (t.fallback) s += "  default -> " + address_text(*t.fallback) + "\n";
    s += "}\n";
  }
  for (const auto& [name, members] : g.containers()) {
    s += "container " + name + " {";
    for (const auto& m : members) s += " " + m;
    s += " }\n";
  }
  for (const auto& p : g.promises())
    s += "promise " + p.promiser + " -> " + p.promisee.to_string() + " body=" + p.body.canonical() + "\n";
  for (const auto& i : g.impositions())
    s += "imposition " + i.imposer + " -> " + i.imposee + " body=" + i.body.canonical() + "\n";
  return s;
}

} // namespace pnet::dsl

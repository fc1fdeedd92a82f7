#pragma once

#include <set>
#include <string>

#include "graph.hpp"

namespace pnet {

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline const char* dot_shape(AgentKind k) {
  switch (k) {
  case AgentKind::interface: return "ellipse";
  case AgentKind::forwarder: return "box";
  case AgentKind::service_host: return "component";
  case AgentKind::proxy: return "hexagon";
  case AgentKind::controller: return "doubleoctagon";
  case AgentKind::container_boundary: return "box3d";
  }
  return "ellipse";
}

} // namespace detail

/// Graphviz digraph. + promises are solid, - promises dashed, impositions
/// end in a box arrowhead; scope promises point at a cluster's anchor node.
inline std::string export_dot(const PromiseGraph& g) {
  using detail::dot_quote;
  std::string s = "digraph promises {\n  node [fontname=\"Helvetica\"];\n";
  for (const auto& [name, members] : g.containers()) {
    s += "  subgraph " + dot_quote("cluster_" + name) + " {\n    label=" + dot_quote(name) + ";\n";
    for (const auto& m : members) s += "    " + dot_quote(m) + ";\n";
    s += "  }\n";
  }
  for (const auto& [id, a] : g.agents())
    s += "  " + dot_quote(id) + " [shape=" + detail::dot_shape(a.kind) + "];\n";
  bool any_all = false;
  std::set<std::string> scope_nodes;
  for (const auto& p : g.promises()) {
    if (p.promisee.kind == Target::Kind::all) any_all = true;
    if (p.promisee.kind == Target::Kind::container) scope_nodes.insert(p.promisee.name);
  }
  for (const auto& c : scope_nodes) s += "  " + dot_quote("@" + c) + " [shape=plaintext];\n";
  if (any_all) s += "  " + dot_quote("*") + " [shape=plaintext];\n";
  for (const auto& p : g.promises()) {
    s += "  " + dot_quote(p.promiser) + " -> " + dot_quote(p.promisee.to_string()) + " [label=" +
         dot_quote(p.body.canonical()) + ", style=" + (p.body.polarity == Polarity::give ? "solid" : "dashed") +
         "];\n";
  }
  for (const auto& i : g.impositions())
    s += "  " + dot_quote(i.imposer) + " -> " + dot_quote(i.imposee) + " [label=" + dot_quote(i.body.canonical()) +
         ", style=" + (i.body.polarity == Polarity::give ? "solid" : "dashed") + ", arrowhead=box, color=red];\n";
  return s + "}\n";
}

} // namespace pnet

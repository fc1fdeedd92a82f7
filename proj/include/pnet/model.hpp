#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dsl.hpp"
#include "graph.hpp"
#include "netmodels.hpp"
#include "policy.hpp"

namespace pnet::dsl {

struct SyntaxError {
  Span span;
  std::string message;
  std::string hint;
};

namespace lower {

struct AgentDecl {
  Agent agent;
};
struct EdgeDecl {
  bool imposition = false;
  Word from;
  Word target_word;
  Target target;
  Body body;
};
struct ContainerDecl {
  Word name;
  std::vector<Word> members;
};
struct TableDecl {
  TransducerTable table;
};
struct SegmentDecl {
  std::string name;
  std::vector<InterfaceSpec> interfaces;
};
struct SwitchDecl {
  std::string name;
  std::vector<InterfaceSpec> ports;
};
struct RouterDecl {
  RouterSpec spec;
};
struct LinkDecl {
  Word a, b;
};
struct VlanDecl {
  std::vector<std::pair<Word, int>> tags;
};
struct TunnelDecl {
  Word ingress, egress;
  AddressComponent tni;
};
struct CellDecl {
  Cell cell;
};
struct DesiredDecl {
  std::vector<Body> bodies;
};

using Lowered = std::variant<AgentDecl, EdgeDecl, ContainerDecl, TableDecl, SegmentDecl, SwitchDecl, RouterDecl,
                             LinkDecl, VlanDecl, TunnelDecl, CellDecl, DesiredDecl>;

/// Runs `f`, turning a ModelError into a SyntaxError at `w`.
template <class F>
auto at(const Word& w, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ModelError& e) {
    throw SyntaxError{w.span, e.what(), {}};
  }
}

inline void expect_name(const Word& w, const std::string& what) {
  if (!is_valid_name(w.text))
    throw SyntaxError{w.span, "invalid " + what + " '" + w.text + "'", "names use letters, digits, '_', '-' and '.'"};
}

inline std::pair<std::string, std::string> key_value(const Word& w) {
  auto eq = w.text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == w.text.size())
    throw SyntaxError{w.span, "expected key=value, found '" + w.text + "'", {}};
  std::string k = w.text.substr(0, eq), v = w.text.substr(eq + 1);
  for (char c : k)
    if (!is_name_char(c)) throw SyntaxError{w.span, "bad character in key '" + k + "'", {}};
  for (char c : v)
    if (!is_value_char(c)) throw SyntaxError{w.span, "bad character in value '" + v + "'", {}};
  return {k, v};
}

inline long number(const Word& w, const std::string& text, long lo, long hi) {
  long v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v < lo || v > hi)
    throw SyntaxError{w.span,
                      "expected a number in " + std::to_string(lo) + ".." + std::to_string(hi) + ", found '" + text + "'",
                      {}};
  return v;
}

inline Body body(const Word& w, const std::string& text) {
  return at(w, [&] { return Body::parse(text); });
}

inline void arity(const Declaration& d, const std::vector<Word>& ws, std::size_t lo, std::size_t hi,
                  const std::string& shape) {
  if (ws.size() < lo || ws.size() > hi)
    throw SyntaxError{ws.empty() ? d.keyword.span : ws.front().span, "malformed '" + d.keyword.text + "'",
                      "expected: " + shape};
}

/// `ID [mac=M] [ip=A/len] [vlan=N] [promiscuous]`, starting at ws[from].
inline InterfaceSpec interface(const std::vector<Word>& ws, std::size_t from) {
  InterfaceSpec s;
  expect_name(ws[from], "interface id");
  s.id = ws[from].text;
  for (std::size_t i = from + 1; i < ws.size(); ++i) {
    const Word& w = ws[i];
    if (w.text == "promiscuous") {
      s.promiscuous = true;
      continue;
    }
    auto [k, v] = key_value(w);
    if (k == "mac") {
      at(w, [&] { return AddressComponent("mac", v); });
      s.mac = v;
    } else if (k == "ip") {
      auto [p, l] = at(w, [&] { return split_ip(v); });
      s.ip = IpDoublet{p.value, l.value};
    } else if (k == "vlan") {
      s.vlan = static_cast<int>(number(w, v, 1, 4094));
    } else {
      throw SyntaxError{w.span, "unknown interface setting '" + k + "'", "use mac=, ip=, vlan= or promiscuous"};
    }
  }
  return s;
}

inline AgentDecl agent(const Declaration& d) {
  arity(d, d.head, 1, 64, "agent NAME [kind=KIND] [key=value]...");
  expect_name(d.head[0], "agent name");
  Agent a{d.head[0].text, AgentKind::interface, {}};
  for (std::size_t i = 1; i < d.head.size(); ++i) {
    const Word& w = d.head[i];
    auto [k, v] = key_value(w);
    if (k == "kind") {
      a.kind = at(w, [&] { return parse_kind(v); });
    } else if (k == "ip") {
      auto [p, l] = at(w, [&] { return split_ip(v); });
      a.attributes["prefix"] = p.value;
      a.attributes["local"] = l.value;
    } else {
      if (is_address_label(k)) at(w, [&] { return AddressComponent(k, v); });
      if (!a.attributes.emplace(k, v).second) throw SyntaxError{w.span, "duplicate attribute '" + k + "'", {}};
    }
  }
  return {std::move(a)};
}

inline EdgeDecl edge(const Declaration& d) {
  bool imp = d.keyword.text == "imposition";
  arity(d, d.head, 4, 4, d.keyword.text + " NAME -> TARGET body=BODY");
  EdgeDecl e;
  e.imposition = imp;
  e.from = d.head[0];
  expect_name(e.from, "agent name");
  if (d.head[1].text != "->") throw SyntaxError{d.head[1].span, "expected '->'", {}};
  e.target_word = d.head[2];
  const std::string& t = e.target_word.text;
  if (t == "*") {
    e.target = Target::all();
  } else if (t.size() > 1 && t[0] == '@') {
    e.target = Target::container(t.substr(1));
    if (!is_valid_name(t.substr(1))) throw SyntaxError{e.target_word.span, "invalid container name", {}};
  } else {
    expect_name(e.target_word, "target");
    e.target = Target::agent(t);
  }
  if (imp && e.target.is_scope())
    throw SyntaxError{e.target_word.span, "an imposition targets one agent", "name the imposee"};
  const Word& bw = d.head[3];
  if (bw.text.rfind("body=", 0) != 0) throw SyntaxError{bw.span, "expected body=BODY", "e.g. body=-deliver{mac=*}"};
  e.body = body(bw, bw.text.substr(5));
  return e;
}

inline ContainerDecl container(const Declaration& d) {
  arity(d, d.head, 1, 1, "container NAME { MEMBER... }");
  expect_name(d.head[0], "container name");
  ContainerDecl c{d.head[0], {}};
  for (const auto& st : *d.block)
    for (const auto& w : st) {
      expect_name(w, "member name");
      c.members.push_back(w);
    }
  return c;
}

inline std::vector<AddressComponent> components(const Word& w) {
  return at(w, [&] { return MultipletAddress::parse(w.text).components(); });
}

inline TableDecl table(const Declaration& d) {
  arity(d, d.head, 1, 1, "table NAME { MATCH -> REWRITE ... }");
  expect_name(d.head[0], "table name");
  TransducerTable t{d.head[0].text, {}, std::nullopt};
  for (const auto& st : *d.block) {
    if (st.size() != 3 || st[1].text != "->")
      throw SyntaxError{st.front().span, "malformed table entry", "expected: MATCH -> REWRITE or default -> REWRITE"};
    auto rewrite = components(st[2]);
    if (st[0].text == "default") {
      if (t.fallback) throw SyntaxError{st[0].span, "duplicate default entry", {}};
      t.fallback = rewrite;
    } else {
      t.entries.push_back({components(st[0]), rewrite});
    }
  }
  return {std::move(t)};
}

inline SegmentDecl segment(const Declaration& d) {
  arity(d, d.head, 1, 1, "ethernet NAME { interface ID mac=M ... }");
  expect_name(d.head[0], "segment name");
  SegmentDecl s{d.head[0].text, {}};
  for (const auto& st : *d.block) {
    if (st[0].text != "interface" || st.size() < 2)
      throw SyntaxError{st[0].span, "expected 'interface ID ...'", {}};
    s.interfaces.push_back(interface(st, 1));
  }
  return s;
}

inline SwitchDecl switch_block(const Declaration& d) {
  arity(d, d.head, 1, 1, "switch NAME { port ID mac=M ... }");
  expect_name(d.head[0], "switch name");
  SwitchDecl s{d.head[0].text, {}};
  for (const auto& st : *d.block) {
    if (st[0].text != "port" || st.size() < 2) throw SyntaxError{st[0].span, "expected 'port ID mac=M'", {}};
    s.ports.push_back(interface(st, 1));
  }
  return s;
}

inline RouterDecl router(const Declaration& d) {
  arity(d, d.head, 1, 1, "router NAME { interface ..; host ..; rib ..; default .. }");
  expect_name(d.head[0], "router name");
  RouterSpec r;
  r.id = d.head[0].text;
  r.rib.name = rib_table_name(r.id);
  for (const auto& st : *d.block) {
    const auto& k = st[0].text;
    if (k == "interface" && st.size() >= 2) {
      r.interfaces.push_back(interface(st, 1));
    } else if (k == "host" && st.size() >= 3) {
      expect_name(st[1], "interface id");
      r.segments[st[1].text].push_back(interface(st, 2));
    } else if (k == "rib" && st.size() == 4 && st[2].text == "->") {
      auto match = components(st[1]);
      expect_name(st[3], "interface id");
      r.rib.entries.push_back({match, {AddressComponent("symbolic", st[3].text)}});
    } else if (k == "default" && st.size() == 2) {
      expect_name(st[1], "interface id");
      r.default_interface = st[1].text;
    } else {
      throw SyntaxError{st[0].span, "malformed router statement",
                        "expected interface ID ip=A/len, host IFACE ID ip=A/len, rib PREFIX -> IFACE or default IFACE"};
    }
  }
  return {std::move(r)};
}

inline VlanDecl vlan(const Declaration& d) {
  arity(d, d.head, 0, 0, "vlan { INTERFACE TAG ... }");
  VlanDecl v;
  for (const auto& st : *d.block) {
    if (st.size() != 2) throw SyntaxError{st[0].span, "expected 'INTERFACE TAG'", {}};
    expect_name(st[0], "interface id");
    v.tags.emplace_back(st[0], static_cast<int>(number(st[1], st[1].text, 1, 4094)));
  }
  return v;
}

inline TunnelDecl tunnel(const Declaration& d) {
  arity(d, d.head, 4, 4, "tunnel INGRESS -> EGRESS tni=N");
  expect_name(d.head[0], "ingress");
  if (d.head[1].text != "->") throw SyntaxError{d.head[1].span, "expected '->'", {}};
  expect_name(d.head[2], "egress");
  auto [k, v] = key_value(d.head[3]);
  if (k != "tni") throw SyntaxError{d.head[3].span, "expected tni=N", {}};
  auto tni = at(d.head[3], [&] { return AddressComponent("tni", v); });
  return {d.head[0], d.head[2], tni};
}

inline CellDecl cell(const Declaration& d) {
  arity(d, d.head, 1, 1, "cell NAME { hosts N provides +b.. consumes CELL:+b [alt=all|K] requires TAG.. [capacity=V] }");
  expect_name(d.head[0], "cell name");
  Cell c;
  c.name = d.head[0].text;
  std::vector<Word> ws;
  for (const auto& st : *d.block) ws.insert(ws.end(), st.begin(), st.end());
  static const std::set<std::string> names{"hosts", "provides", "consumes", "requires"};
  auto is_clause = [](const Word& w) { return names.count(w.text) || w.text.rfind("capacity=", 0) == 0; };
  bool saw_hosts = false;
  std::size_t i = 0;
  while (i < ws.size()) {
    const Word& kw = ws[i++];
    if (!is_clause(kw))
      throw SyntaxError{kw.span, "unknown cell clause '" + kw.text + "'",
                        "use hosts, provides, consumes, requires or capacity=V"};
    auto operand = [&]() -> const Word& {
      if (i >= ws.size() || is_clause(ws[i]))
        throw SyntaxError{kw.span, "'" + kw.text + "' needs an operand", {}};
      return ws[i++];
    };
    if (kw.text == "hosts") {
      const Word& n = operand();
      c.hosts = static_cast<unsigned>(number(n, n.text, 1, 4096));
      saw_hosts = true;
    } else if (kw.text.rfind("capacity=", 0) == 0) {
      auto [k, v] = key_value(kw);
      c.capacity = v;
    } else if (kw.text == "provides") {
      do {
        const Word& b = operand();
        c.provides.push_back(body(b, b.text));
      } while (i < ws.size() && !is_clause(ws[i]));
    } else if (kw.text == "requires") {
      do {
        const Word& t = operand();
        if (!requirement_tags().count(t.text))
          throw SyntaxError{t.span, "unknown requirement '" + t.text + "'",
                            "use firewall-open, capacity or secure-channel"};
        c.requirements.insert(t.text);
      } while (i < ws.size() && !is_clause(ws[i]));
    } else {
      do {
        const Word& item = operand();
        auto colon = item.text.find(':');
        if (colon == std::string::npos || colon == 0)
          throw SyntaxError{item.span, "expected CELL:BODY, found '" + item.text + "'", {}};
        Consume k{item.text.substr(0, colon), body(item, item.text.substr(colon + 1)), std::nullopt};
        if (!is_valid_name(k.provider)) throw SyntaxError{item.span, "invalid provider name", {}};
        if (i < ws.size() && ws[i].text.rfind("alt=", 0) == 0) {
          const Word& a = ws[i++];
          auto v = a.text.substr(4);
          if (v != "all") k.alternatives = static_cast<unsigned>(number(a, v, 1, 4096));
        }
        c.consumes.push_back(std::move(k));
      } while (i < ws.size() && !is_clause(ws[i]));
    }
  }
  if (!saw_hosts) throw SyntaxError{d.head[0].span, "cell '" + c.name + "' needs 'hosts N'", {}};
  return {std::move(c)};
}

inline DesiredDecl desired(const Declaration& d) {
  arity(d, d.head, 0, 0, "desired { BODY... }");
  DesiredDecl out;
  for (const auto& st : *d.block)
    for (const auto& w : st) out.bodies.push_back(body(w, w.text));
  return out;
}

inline Lowered declaration(const Declaration& d) {
  const auto& k = d.keyword.text;
  if (k == "agent") return agent(d);
  if (k == "promise" || k == "imposition") return edge(d);
  if (k == "container") return container(d);
  if (k == "table") return table(d);
  if (k == "ethernet") return segment(d);
  if (k == "switch") return switch_block(d);
  if (k == "router") return router(d);
  if (k == "vlan") return vlan(d);
  if (k == "tunnel") return tunnel(d);
  if (k == "cell") return cell(d);
  if (k == "desired") return desired(d);
  arity(d, d.head, 2, 2, "link A B");
  expect_name(d.head[0], "interface id");
  expect_name(d.head[1], "interface id");
  return LinkDecl{d.head[0], d.head[1]};
}

} // namespace lower

/// Parses model text. Declarations that fail their shape check are dropped
/// from the document and reported.
inline std::pair<ModelDocument, std::vector<Diagnostic>> parse_model(std::string_view text,
                                                                      std::string source_name = "model") {
  ModelDocument raw;
  auto diags = parse_structure(text, raw);
  ModelDocument doc;
  doc.source_name = std::move(source_name);
  for (auto& d : raw.declarations) {
    try {
      lower::declaration(d);
      doc.declarations.push_back(std::move(d));
    } catch (const SyntaxError& e) {
      diags.push_back({Diagnostic::Severity::error, e.span, e.message, e.hint});
    }
  }
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::pair(a.span.line, a.span.col) < std::pair(b.span.line, b.span.col);
  });
  return {std::move(doc), std::move(diags)};
}

} // namespace pnet::dsl

#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pnet/pnet.hpp"

namespace support {

inline std::string models_dir() { return PNET_MODELS_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline pnet::PromiseGraph load_model_file(const std::string& name) {
  auto e = pnet::dsl::load_model(read_file(models_dir() + "/" + name), name);
  if (!e.graph) {
    std::string msg;
    for (const auto& d : e.diagnostics) msg += d.to_text(name) + "\n";
    throw std::runtime_error(msg);
  }
  return *e.graph;
}

inline std::vector<std::string> model_files() {
  return {"fig1_switch.pnet", "ethernet_segment.pnet", "router.pnet", "vlan.pnet",
          "tunnel.pnet",      "three_tier.pnet",       "proxy.pnet",  "resolver.pnet"};
}

// --- random L2 graphs and an exhaustive path oracle -------------------------

struct RawEdge {
  enum Kind { accept_any, accept_self, forward } kind;
  int from;
  int to;      // -1: every other agent
  int fwd_mac; // forward only: index of the agent whose mac is forwarded
};

struct RawGraph {
  int n = 0;
  std::vector<RawEdge> edges;
};

inline std::string agent_name(int i) { return "a" + std::to_string(i); }
inline std::string mac_of(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "02:00:00:00:00:%02x", i);
  return buf;
}

inline RawGraph random_raw_graph(std::mt19937_64& rng) {
  RawGraph g;
  g.n = std::uniform_int_distribution<int>(2, 8)(rng);
  int m = std::uniform_int_distribution<int>(0, 24)(rng);
  std::uniform_int_distribution<int> agent(0, g.n - 1), kind(0, 9), coin(0, 5);
  for (int e = 0; e < m; ++e) {
    int from = agent(rng), to = agent(rng);
    int k = kind(rng);
    RawEdge r{k < 3 ? RawEdge::accept_any : k < 6 ? RawEdge::accept_self : RawEdge::forward, from, to, agent(rng)};
    if (r.kind != RawEdge::forward && coin(rng) == 0) r.to = -1;
    if (r.to == from) continue;
    g.edges.push_back(r);
  }
  return g;
}

inline pnet::PromiseGraph to_promise_graph(const RawGraph& r) {
  using namespace pnet;
  PromiseGraph g;
  for (int i = 0; i < r.n; ++i) g.add_agent({agent_name(i), AgentKind::interface, {{"mac", mac_of(i)}}});
  for (const auto& e : r.edges) {
    Target t = e.to < 0 ? Target::all() : Target::agent(agent_name(e.to));
    switch (e.kind) {
    case RawEdge::accept_any: g.add_promise(agent_name(e.from), t, bodies::accept_any_l2()); break;
    case RawEdge::accept_self: g.add_promise(agent_name(e.from), t, Body::parse("-deliver{mac=*?destination-equals-self}")); break;
    case RawEdge::forward:
      g.add_promise(agent_name(e.from), t, Body::parse("+forward{mac=" + mac_of(e.fwd_mac) + "}"));
      break;
    }
  }
  return g;
}

/// Exhaustive search over simple relay paths; the destination may also relay
/// earlier on the path it finally accepts from. The source emits to every related
/// agent; an intermediate that accepts anything and forwards something sends
/// along matching forward promises, or to every related agent when none match.
class PathOracle {
public:
  explicit PathOracle(RawGraph g, std::set<int> removed = {}) : g_(std::move(g)), removed_(std::move(removed)) {}

  bool reachable(int src, int dst) {
    if (src == dst) return true;
    std::vector<bool> on(static_cast<std::size_t>(g_.n), false);
    on[static_cast<std::size_t>(src)] = true;
    return dfs(src, src, dst, on);
  }

  std::set<int> spof(int src, int dst) {
    std::set<int> out;
    for (int a = 0; a < g_.n; ++a) {
      if (a == src || a == dst) continue;
      auto rm = removed_;
      rm.insert(a);
      if (!PathOracle(g_, rm).reachable(src, dst)) out.insert(a);
    }
    return out;
  }

private:
  bool alive(int a) const { return !removed_.count(a); }

  bool edge_alive(const RawEdge& e) const { return alive(e.from) && (e.to < 0 || alive(e.to)); }

  bool covers(const RawEdge& e, int who) const { return who != e.from && (e.to < 0 || e.to == who); }

  std::vector<int> related(int u) const {
    std::set<int> out;
    for (const auto& e : g_.edges) {
      if (!edge_alive(e)) continue;
      if (e.from == u) {
        for (int v = 0; v < g_.n; ++v)
          if (alive(v) && covers(e, v)) out.insert(v);
      } else if (covers(e, u)) {
        out.insert(e.from);
      }
    }
    out.erase(u);
    return {out.begin(), out.end()};
  }

  bool forwards(int u) const {
    for (const auto& e : g_.edges)
      if (edge_alive(e) && e.from == u && e.kind == RawEdge::forward) return true;
    return false;
  }

  bool accepts(int v, int from, RawEdge::Kind k) const {
    for (const auto& e : g_.edges)
      if (edge_alive(e) && e.from == v && e.kind == k && covers(e, from)) return true;
    return false;
  }

  std::vector<int> next_hops(int u, int src, int dst) const {
    if (u == src) return related(u);
    std::set<int> hits;
    for (const auto& e : g_.edges)
      if (edge_alive(e) && e.from == u && e.kind == RawEdge::forward && e.fwd_mac == dst) hits.insert(e.to);
    if (!hits.empty()) return {hits.begin(), hits.end()};
    return related(u);
  }

  bool dfs(int u, int src, int dst, std::vector<bool>& on) {
    for (int v : next_hops(u, src, dst)) {
      if (v == dst && accepts(v, u, RawEdge::accept_self)) return true;
      if (on[static_cast<std::size_t>(v)]) continue;
      if (!accepts(v, u, RawEdge::accept_any) || !forwards(v)) continue;
      on[static_cast<std::size_t>(v)] = true;
      if (dfs(v, src, dst, on)) return true;
      on[static_cast<std::size_t>(v)] = false;
    }
    return false;
  }

  RawGraph g_;
  std::set<int> removed_;
};

// --- random policy specs ---------------------------------------------------

inline pnet::PolicySpec random_policy(std::mt19937_64& rng) {
  using namespace pnet;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  PolicySpec spec;
  int cells = pick(1, 5);
  for (int c = 0; c < cells; ++c) {
    Cell cell;
    cell.name = "T" + std::to_string(c);
    cell.hosts = static_cast<unsigned>(pick(1, 4));
    int provides = pick(1, 2);
    for (int s = 0; s < provides; ++s) {
      Body b(Polarity::give, "svc" + std::to_string(c) + "x" + std::to_string(s));
      if (pick(0, 3) == 0) b = b.with_param("port", Pattern::literal(std::to_string(8000 + s)));
      cell.provides.push_back(b);
    }
    for (int p = 0; p < c; ++p) {
      if (pick(0, 2) != 0) continue;
      const Cell& prov = spec.cells[static_cast<std::size_t>(p)];
      const Body& s = prov.provides[static_cast<std::size_t>(pick(0, static_cast<int>(prov.provides.size()) - 1))];
      std::optional<unsigned> alt;
      if (pick(0, 2) == 0) alt = static_cast<unsigned>(pick(1, static_cast<int>(prov.hosts)));
      cell.consumes.push_back({prov.name, s, alt});
    }
    if (pick(0, 4) == 0) cell.consumes.push_back({kExternalProvider, Body(Polarity::give, "ext-feed"), std::nullopt});
    if (pick(0, 3) != 0) cell.requirements.insert("firewall-open");
    if (pick(0, 3) == 0) {
      cell.requirements.insert("capacity");
      cell.capacity = std::to_string(pick(1, 9) * 100);
    }
    if (pick(0, 3) == 0) cell.requirements.insert("secure-channel");
    spec.cells.push_back(std::move(cell));
  }
  if (pick(0, 1) == 0)
    for (const auto& c : spec.cells)
      for (const auto& b : c.provides) spec.desired.push_back(b);
  return spec;
}

// --- DOT grammar check -----------------------------------------------------

/// Recursive-descent check of the Graphviz DOT language (graph, node, edge,
/// attribute and subgraph statements). Returns an error message or "".
class DotChecker {
public:
  explicit DotChecker(std::string text) : s_(std::move(text)) {}

  std::string check() {
    try {
      next();
      if (is_kw("strict")) next();
      if (!is_kw("graph") && !is_kw("digraph")) fail("expected graph or digraph");
      directed_ = is_kw("digraph");
      next();
      if (tok_ == Tok::id) next();
      expect("{");
      stmt_list();
      expect("}");
      if (tok_ != Tok::end) fail("text after closing brace");
    } catch (const std::string& e) {
      return e;
    }
    return "";
  }

private:
  enum class Tok { id, punct, end };

  void fail(const std::string& why) { throw why + " at offset " + std::to_string(pos_) + " near '" + text_ + "'"; }

  bool is_kw(const char* k) const {
    if (tok_ != Tok::id || quoted_) return false;
    std::string lower;
    for (char c : text_) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower == k;
  }
  bool is(const char* p) const { return tok_ == Tok::punct && text_ == p; }
  void expect(const char* p) {
    if (!is(p)) fail(std::string("expected '") + p + "'");
    next();
  }

  void next() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_.compare(pos_, 2, "//") == 0) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    quoted_ = false;
    if (pos_ >= s_.size()) {
      tok_ = Tok::end;
      text_.clear();
      return;
    }
    char c = s_[pos_];
    if (c == '"') {
      std::string v;
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        v += s_[pos_++];
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      tok_ = Tok::id;
      text_ = v;
      quoted_ = true;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      tok_ = Tok::id;
      text_ = s_.substr(b, pos_ - b);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
        (c == '-' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      std::size_t b = pos_++;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      tok_ = Tok::id;
      text_ = s_.substr(b, pos_ - b);
      return;
    }
    if (s_.compare(pos_, 2, "->") == 0 || s_.compare(pos_, 2, "--") == 0) {
      tok_ = Tok::punct;
      text_ = s_.substr(pos_, 2);
      pos_ += 2;
      return;
    }
    if (std::string("{}[];,=:").find(c) != std::string::npos) {
      tok_ = Tok::punct;
      text_ = std::string(1, c);
      ++pos_;
      return;
    }
    fail("unexpected character");
  }

  void stmt_list() {
    while (!is("}") && tok_ != Tok::end) {
      stmt();
      if (is(";")) next();
    }
  }

  void attr_list() {
    while (is("[")) {
      next();
      while (!is("]")) {
        if (tok_ != Tok::id) fail("expected attribute name");
        next();
        expect("=");
        if (tok_ != Tok::id) fail("expected attribute value");
        next();
        if (is(";") || is(",")) next();
      }
      next();
    }
  }

  void subgraph() {
    if (is_kw("subgraph")) {
      next();
      if (tok_ == Tok::id) next();
    }
    expect("{");
    stmt_list();
    expect("}");
  }

  void node_id() {
    if (tok_ != Tok::id) fail("expected node id");
    next();
    if (is(":")) {
      next();
      if (tok_ != Tok::id) fail("expected port");
      next();
    }
  }

  void stmt() {
    if (is_kw("graph") || is_kw("node") || is_kw("edge")) {
      next();
      attr_list();
      return;
    }
    if (is_kw("subgraph") || is("{")) {
      subgraph();
    } else {
      node_id();
      if (is("=")) {
        next();
        if (tok_ != Tok::id) fail("expected value");
        next();
        return;
      }
    }
    while (is("->") || is("--")) {
      if ((text_ == "->") != directed_) fail("edge operator does not match graph type");
      next();
      if (is_kw("subgraph") || is("{")) subgraph();
      else node_id();
    }
    attr_list();
  }

  std::string s_;
  std::size_t pos_ = 0;
  Tok tok_ = Tok::end;
  std::string text_;
  bool quoted_ = false;
  bool directed_ = true;
};

inline std::string dot_error(const std::string& text) { return DotChecker(text).check(); }

} // namespace support

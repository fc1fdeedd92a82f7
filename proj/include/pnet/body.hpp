#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pnet {

/// Thrown for contract violations on model construction and analysis inputs.
class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Polarity { give, use };

inline char sign_of(Polarity p) { return p == Polarity::give ? '+' : '-'; }

/// Graph predicates a param pattern may carry.
enum class Guard { none, distinct_from_all_peers, destination_equals_self };

inline std::string_view guard_name(Guard g) {
  switch (g) {
  case Guard::distinct_from_all_peers: return "distinct-from-all-peers";
  case Guard::destination_equals_self: return "destination-equals-self";
  case Guard::none: break;
  }
  return "";
}

inline Guard parse_guard(std::string_view s) {
  if (s == "distinct-from-all-peers") return Guard::distinct_from_all_peers;
  if (s == "destination-equals-self") return Guard::destination_equals_self;
  throw ModelError("unknown guard '" + std::string(s) + "'");
}

/// A param pattern: a finite disjunction of literals (empty set is the
/// wildcard) optionally qualified by a guard.
struct Pattern {
  std::set<std::string> alternatives;
  Guard guard = Guard::none;

  static Pattern wildcard(Guard g = Guard::none) { return Pattern{{}, g}; }
  static Pattern literal(std::string v, Guard g = Guard::none) {
    return Pattern{{std::move(v)}, g};
  }
  static Pattern any_of(std::set<std::string> vs) { return Pattern{std::move(vs), Guard::none}; }

  bool is_wildcard() const { return alternatives.empty(); }
  bool is_literal() const { return alternatives.size() == 1; }
  bool admits(const std::string& v) const {
    return is_wildcard() || alternatives.count(v) != 0;
  }

  /// Literal-set intersection; the guard is not part of the result.
  std::optional<Pattern> intersect(const Pattern& other) const {
    if (is_wildcard()) return Pattern{other.alternatives, Guard::none};
    if (other.is_wildcard()) return Pattern{alternatives, Guard::none};
    Pattern out;
    std::set_intersection(alternatives.begin(), alternatives.end(),
                          other.alternatives.begin(), other.alternatives.end(),
                          std::inserter(out.alternatives, out.alternatives.end()));
    if (out.alternatives.empty()) return std::nullopt;
    return out;
  }

  std::string canonical() const {
    std::string s;
    if (is_wildcard()) {
      s = "*";
    } else {
      bool first = true;
      for (const auto& a : alternatives) {
        if (!first) s += '|';
        s += a;
        first = false;
      }
    }
    if (guard != Guard::none) {
      s += '?';
      s += guard_name(guard);
    }
    return s;
  }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend auto operator<=>(const Pattern&, const Pattern&) = default;
};

inline bool is_value_char(char c) {
  return c > ' ' && c != ',' && c != '{' && c != '}' && c != '|' && c != '?' &&
         c != '=' && c != '#' && static_cast<unsigned char>(c) < 0x7f;
}

inline bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '-' || c == '.';
}

inline Pattern parse_pattern(std::string_view text) {
  Pattern p;
  auto q = text.find('?');
  std::string_view alts = text.substr(0, q);
  if (q != std::string_view::npos) p.guard = parse_guard(text.substr(q + 1));
  if (alts.empty()) throw ModelError("empty pattern");
  if (alts == "*") return p;
  std::size_t start = 0;
  while (true) {
    auto bar = alts.find('|', start);
    std::string_view lit = alts.substr(start, bar == std::string_view::npos ? alts.npos : bar - start);
    if (lit.empty() || lit == "*")
      throw ModelError("bad literal in pattern '" + std::string(text) + "'");
    for (char c : lit)
      if (!is_value_char(c)) throw ModelError("bad character in pattern '" + std::string(text) + "'");
    p.alternatives.emplace(lit);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return p;
}

using Params = std::map<std::string, Pattern>;

/// A signed promise body: polarity, kind tag and param patterns.
struct Body {
  Polarity polarity = Polarity::give;
  std::string kind;
  Params params;

  Body() = default;
  Body(Polarity pol, std::string k, Params ps = {})
      : polarity(pol), kind(std::move(k)), params(std::move(ps)) {
    validate();
  }

  void validate() const {
    if (kind.empty()) throw ModelError("body kind must be nonempty");
    for (char c : kind)
      if (!is_name_char(c)) throw ModelError("bad character in body kind '" + kind + "'");
    for (const auto& [k, _] : params) {
      if (k.empty()) throw ModelError("param key must be nonempty");
      for (char c : k)
        if (!is_name_char(c)) throw ModelError("bad character in param key '" + k + "'");
    }
  }

  /// Sorted keys, sorted disjunctions: the equality used for multisets.
  std::string canonical() const {
    std::string s(1, sign_of(polarity));
    s += kind;
    if (!params.empty()) {
      s += '{';
      bool first = true;
      for (const auto& [k, p] : params) {
        if (!first) s += ',';
        s += k;
        s += '=';
        s += p.canonical();
        first = false;
      }
      s += '}';
    }
    return s;
  }

  Body with_param(const std::string& key, Pattern p) const {
    Body b = *this;
    b.params[key] = std::move(p);
    return b;
  }

  Body flipped() const {
    Body b = *this;
    b.polarity = polarity == Polarity::give ? Polarity::use : Polarity::give;
    return b;
  }

  /// Parses the canonical text form, e.g. `+deliver{mac=*?destination-equals-self,vlan=10}`.
  static Body parse(std::string_view text) {
    if (text.size() < 2 || (text[0] != '+' && text[0] != '-'))
      throw ModelError("body must start with '+' or '-': '" + std::string(text) + "'");
    Body b;
    b.polarity = text[0] == '+' ? Polarity::give : Polarity::use;
    auto brace = text.find('{');
    b.kind = std::string(text.substr(1, brace == text.npos ? text.npos : brace - 1));
    if (brace != text.npos) {
      if (text.back() != '}') throw ModelError("unterminated body params: '" + std::string(text) + "'");
      std::string_view inner = text.substr(brace + 1, text.size() - brace - 2);
      std::size_t start = 0;
      while (start < inner.size()) {
        auto comma = inner.find(',', start);
        std::string_view item = inner.substr(start, comma == inner.npos ? inner.npos : comma - start);
        auto eq = item.find('=');
        if (eq == item.npos) throw ModelError("param without '=': '" + std::string(item) + "'");
        std::string key(item.substr(0, eq));
        if (b.params.count(key)) throw ModelError("duplicate param key '" + key + "'");
        b.params.emplace(key, parse_pattern(item.substr(eq + 1)));
        if (comma == inner.npos) break;
        start = comma + 1;
        if (start == inner.size()) throw ModelError("trailing ',' in body params");
      }
    }
    b.validate();
    return b;
  }

  friend bool operator==(const Body& a, const Body& b) { return a.canonical() == b.canonical(); }
  friend bool operator<(const Body& a, const Body& b) { return a.canonical() < b.canonical(); }
};

enum class MatchSide { give, use };

struct PendingGuard {
  std::string key;
  Guard guard;
  MatchSide side;
  friend bool operator==(const PendingGuard&, const PendingGuard&) = default;
};

struct MatchResult {
  Params params;
  std::vector<PendingGuard> guards;
};

/// A +forward hands the message on, so it also serves a -deliver.
inline bool kinds_match(const std::string& give, const std::string& use) {
  return give == use || (give == "forward" && use == "deliver");
}

/// Matches a give body against a use body. Shared keys must intersect;
/// keys present on one side only pass through unconstrained. Guards are
/// recorded for the caller to resolve against a graph.
inline std::optional<MatchResult> match_bodies(const Body& plus, const Body& minus) {
  if (plus.polarity != Polarity::give || minus.polarity != Polarity::use)
    throw ModelError("match_bodies expects (+, -) bodies");
  if (!kinds_match(plus.kind, minus.kind)) return std::nullopt;
  MatchResult r;
  auto note = [&](const std::string& key, const Pattern& p, MatchSide side) {
    if (p.guard != Guard::none) r.guards.push_back({key, p.guard, side});
  };
  for (const auto& [key, pp] : plus.params) {
    note(key, pp, MatchSide::give);
    auto it = minus.params.find(key);
    if (it == minus.params.end()) {
      r.params[key] = Pattern{pp.alternatives, Guard::none};
      continue;
    }
    auto both = pp.intersect(it->second);
    if (!both) return std::nullopt;
    r.params[key] = *both;
  }
  for (const auto& [key, mp] : minus.params) {
    note(key, mp, MatchSide::use);
    if (!plus.params.count(key)) r.params[key] = Pattern{mp.alternatives, Guard::none};
  }
  return r;
}

/// FNV-1a, used for canonical role names.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace pnet

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "body.hpp"

namespace pnet {

inline constexpr std::size_t kMaxAddressComponents = 8;
inline constexpr std::string_view kAddressLabels[] = {"tni", "vlan", "prefix", "local", "mac", "symbolic"};

inline bool is_address_label(std::string_view l) {
  return std::find(std::begin(kAddressLabels), std::end(kAddressLabels), l) != std::end(kAddressLabels);
}

namespace detail {

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline bool is_dotted(std::string_view s) {
  if (s.empty() || s.front() == '.' || s.back() == '.') return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '.') {
      if (s[i + 1] == '.') return false;
    } else if (s[i] < '0' || s[i] > '9') {
      return false;
    }
  }
  return true;
}

inline bool is_hex(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

inline bool is_mac(std::string_view s) {
  if (s.size() != 17) return false;
  for (std::size_t i = 0; i < 17; ++i) {
    if (i % 3 == 2) {
      if (s[i] != ':') return false;
    } else if (!is_hex(s[i])) {
      return false;
    }
  }
  return true;
}

inline std::size_t dotted_segments(std::string_view s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '.')) + 1;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == s.npos ? s.npos : pos - start));
    if (pos == s.npos) break;
    start = pos + 1;
  }
  return out;
}

} // namespace detail

inline void validate_vlan(long tag) {
  if (tag < 1 || tag > 4094) throw ModelError("vlan tag " + std::to_string(tag) + " outside 1-4094");
}

struct AddressComponent {
  std::string label;
  std::string value;

  AddressComponent() = default;
  AddressComponent(std::string l, std::string v) : label(std::move(l)), value(std::move(v)) { validate(); }

  void validate() const {
    if (!is_address_label(label)) throw ModelError("unknown address label '" + label + "'");
    if (value.empty()) throw ModelError("empty value for address label '" + label + "'");
    if (label == "mac" && !detail::is_mac(value))
      throw ModelError("mac must be 6 colon-separated hex octets: '" + value + "'");
    if ((label == "prefix" || label == "local") && !detail::is_dotted(value))
      throw ModelError(label + " must be dotted decimal or an integer: '" + value + "'");
    if (label == "vlan") {
      if (!detail::all_digits(value) || value.size() > 4) throw ModelError("vlan must be an integer: '" + value + "'");
      validate_vlan(std::stol(value));
    }
    if (label == "tni" && (!detail::all_digits(value) || value.size() > 8 || std::stol(value) > 0xFFFFFF))
      throw ModelError("tni must be a 24-bit integer: '" + value + "'");
    if (label == "symbolic")
      for (char c : value)
        if (!is_name_char(c)) throw ModelError("bad character in symbolic address '" + value + "'");
  }

  std::string to_string() const { return label + ":" + value; }

  friend bool operator==(const AddressComponent&, const AddressComponent&) = default;
  friend auto operator<=>(const AddressComponent&, const AddressComponent&) = default;
};

/// Splits `a.b.c.d/len` into (prefix, local) on an octet boundary.
inline std::pair<AddressComponent, AddressComponent> split_ip(std::string_view text) {
  auto slash = text.find('/');
  if (slash == text.npos) throw ModelError("ip literal needs a /len mask: '" + std::string(text) + "'");
  auto octets = detail::split(text.substr(0, slash), '.');
  auto len_text = text.substr(slash + 1);
  if (octets.size() != 4 || !detail::all_digits(len_text) || len_text.size() > 2)
    throw ModelError("malformed ip literal '" + std::string(text) + "'");
  for (const auto& o : octets)
    if (!detail::all_digits(o) || o.size() > 3 || std::stoi(o) > 255)
      throw ModelError("malformed ip literal '" + std::string(text) + "'");
  int len = std::stoi(std::string(len_text));
  if (len % 8 != 0 || len < 8 || len > 24)
    throw ModelError("ip mask must be /8, /16 or /24: '" + std::string(text) + "'");
  std::size_t cut = static_cast<std::size_t>(len / 8);
  std::string prefix, local;
  for (std::size_t i = 0; i < 4; ++i) {
    std::string& dst = i < cut ? prefix : local;
    if (!dst.empty()) dst += '.';
    dst += octets[i];
  }
  return {AddressComponent("prefix", prefix), AddressComponent("local", local)};
}

/// Parses one literal (`mac:..`, `ip:a.b.c.d/24`, `vlan:10`, `tni:5000`,
/// `prefix:..`, `local:..`, `symbolic:..`) into one or two components.
inline std::vector<AddressComponent> parse_address_literal(std::string_view text) {
  auto colon = text.find(':');
  if (colon == text.npos) throw ModelError("address literal needs 'label:value': '" + std::string(text) + "'");
  std::string label(text.substr(0, colon));
  std::string_view value = text.substr(colon + 1);
  if (label == "ip") {
    auto [p, l] = split_ip(value);
    return {p, l};
  }
  return {AddressComponent(label, std::string(value))};
}

/// Ordered address components, outermost first.
class MultipletAddress {
public:
  MultipletAddress() = default;
  explicit MultipletAddress(std::vector<AddressComponent> components) : components_(std::move(components)) {
    validate();
  }

  /// Comma-separated literals, e.g. `vlan:10,mac:00:00:11:11:11:BB`.
  static MultipletAddress parse(std::string_view text) {
    std::vector<AddressComponent> cs;
    for (const auto& lit : detail::split(text, ','))
      for (auto& c : parse_address_literal(lit)) cs.push_back(std::move(c));
    return MultipletAddress(std::move(cs));
  }

  const std::vector<AddressComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  const AddressComponent& outermost() const { return components_.front(); }

  const AddressComponent* find(std::string_view label) const {
    for (const auto& c : components_)
      if (c.label == label) return &c;
    return nullptr;
  }
  bool has(std::string_view label) const { return find(label) != nullptr; }

  std::string to_string() const {
    std::string s;
    for (const auto& c : components_) {
      if (!s.empty()) s += ',';
      s += c.to_string();
    }
    return s;
  }

  friend bool operator==(const MultipletAddress&, const MultipletAddress&) = default;
  friend auto operator<=>(const MultipletAddress&, const MultipletAddress&) = default;

private:
  void validate() const {
    if (components_.empty()) throw ModelError("address needs at least one component");
    if (components_.size() > kMaxAddressComponents)
      throw ModelError("address exceeds " + std::to_string(kMaxAddressComponents) + " components");
    for (std::size_t i = 0; i < components_.size(); ++i) {
      components_[i].validate();
      for (std::size_t j = 0; j < i; ++j)
        if (components_[i].label == components_[j].label)
          throw ModelError("duplicate address label '" + components_[i].label + "'");
    }
  }

  std::vector<AddressComponent> components_;
};

// --- scaling ---------------------------------------------------------------

using BigCount = boost::multiprecision::cpp_int;

struct ScalingParams {
  unsigned bits = 0;
  unsigned prefix_bits = 0;
};

struct ScalingSplit {
  BigCount containers;
  BigCount per_container;
};

/// Splits 2^n addresses into 2^p containers of 2^(n-p) addresses each.
inline ScalingSplit scaling_split(ScalingParams params) {
  if (params.bits > 128) throw ModelError("address bits must be at most 128");
  if (params.prefix_bits > params.bits) throw ModelError("prefix length exceeds address length");
  BigCount one = 1;
  return {one << params.prefix_bits, one << (params.bits - params.prefix_bits)};
}

// --- scope -----------------------------------------------------------------

inline bool same_scope(const MultipletAddress& a, const MultipletAddress& b, std::string_view label) {
  const auto* ca = a.find(label);
  const auto* cb = b.find(label);
  if (!ca || !cb) throw ModelError("same_scope: label '" + std::string(label) + "' missing from an address");
  return ca->value == cb->value;
}

// --- transducers -----------------------------------------------------------

struct TransducerEntry {
  std::vector<AddressComponent> match;
  std::vector<AddressComponent> rewrite;
};

/// Logical rewriting table (ARP, DNS, NAT, RIB, tenant registry).
struct TransducerTable {
  std::string name;
  std::vector<TransducerEntry> entries;
  std::optional<std::vector<AddressComponent>> fallback;

  friend bool operator==(const TransducerTable& a, const TransducerTable& b) {
    auto same = [](const std::vector<AddressComponent>& x, const std::vector<AddressComponent>& y) { return x == y; };
    if (a.name != b.name || a.entries.size() != b.entries.size() || a.fallback != b.fallback) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i)
      if (!same(a.entries[i].match, b.entries[i].match) || !same(a.entries[i].rewrite, b.entries[i].rewrite))
        return false;
    return true;
  }
};

namespace detail {

/// A prefix pattern covers any dotted extension of itself; other labels match exactly.
inline bool component_covers(const AddressComponent& pattern, const AddressComponent& actual) {
  if (pattern.label != actual.label) return false;
  if (pattern.value == actual.value) return true;
  return pattern.label == "prefix" && actual.value.size() > pattern.value.size() &&
         actual.value.compare(0, pattern.value.size(), pattern.value) == 0 &&
         actual.value[pattern.value.size()] == '.';
}

inline std::size_t specificity(const TransducerEntry& e) {
  std::size_t s = 0;
  for (const auto& c : e.match) s += (c.label == "prefix" || c.label == "local") ? dotted_segments(c.value) : 1;
  return s;
}

} // namespace detail

/// Index of the entry that applies to `addr`: longest match first, then insertion order.
inline std::optional<std::size_t> lookup(const TransducerTable& table, const MultipletAddress& addr) {
  std::optional<std::size_t> best;
  std::size_t best_spec = 0;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    bool all = !e.match.empty() && std::all_of(e.match.begin(), e.match.end(), [&](const AddressComponent& m) {
      const auto* c = addr.find(m.label);
      return c && detail::component_covers(m, *c);
    });
    if (!all) continue;
    auto s = detail::specificity(e);
    if (!best || s > best_spec) {
      best = i;
      best_spec = s;
    }
  }
  return best;
}

struct TransduceResult {
  MultipletAddress address;
  bool matched = false;
  bool defaulted = false;
  bool no_match() const { return !matched && !defaulted; }
};

inline TransduceResult transduce(const TransducerTable& table, const MultipletAddress& addr) {
  if (auto idx = lookup(table, addr)) {
    const auto& e = table.entries[*idx];
    std::vector<AddressComponent> out;
    bool inserted = false;
    auto rewritten = [&](const std::string& label) {
      return std::any_of(e.rewrite.begin(), e.rewrite.end(), [&](const auto& r) { return r.label == label; });
    };
    for (const auto& c : addr.components()) {
      bool consumed = std::any_of(e.match.begin(), e.match.end(), [&](const auto& m) { return m.label == c.label; });
      if (consumed) {
        if (!inserted) {
          out.insert(out.end(), e.rewrite.begin(), e.rewrite.end());
          inserted = true;
        }
        continue;
      }
      if (!rewritten(c.label)) out.push_back(c);
    }
    return {MultipletAddress(std::move(out)), true, false};
  }
  if (table.fallback) return {MultipletAddress(*table.fallback), false, true};
  return {addr, false, false};
}

// --- tunnels ---------------------------------------------------------------

inline MultipletAddress encapsulate(const MultipletAddress& addr, const AddressComponent& outer) {
  if (addr.has(outer.label)) throw ModelError("encapsulate: label '" + outer.label + "' already present");
  std::vector<AddressComponent> cs;
  cs.reserve(addr.size() + 1);
  cs.push_back(outer);
  cs.insert(cs.end(), addr.components().begin(), addr.components().end());
  return MultipletAddress(std::move(cs));
}

inline std::pair<AddressComponent, MultipletAddress> decapsulate(const MultipletAddress& addr) {
  if (addr.size() < 2) throw ModelError("decapsulate: single-component address has nothing to strip");
  std::vector<AddressComponent> inner(addr.components().begin() + 1, addr.components().end());
  return {addr.outermost(), MultipletAddress(std::move(inner))};
}

/// Components a forwarder may interpret: everything up to and including
/// the outermost tni. Whatever follows is passenger data.
inline std::vector<AddressComponent> visible_components(const MultipletAddress& addr) {
  std::vector<AddressComponent> out;
  for (const auto& c : addr.components()) {
    out.push_back(c);
    if (c.label == "tni") break;
  }
  return out;
}

} // namespace pnet

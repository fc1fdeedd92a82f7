#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pnet::dsl {

struct Span {
  std::size_t line = 1;
  std::size_t col = 1;
};

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  Span span;
  std::string message;
  std::string hint;

  std::string to_text(const std::string& source = "model") const {
    std::string s = source + ":" + std::to_string(span.line) + ":" + std::to_string(span.col) + ": " +
                    (severity == Severity::error ? "error: " : "warning: ") + message;
    if (!hint.empty()) s += " (hint: " + hint + ")";
    return s;
  }
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::error; });
}

/// A whitespace-free token. Equality ignores the span.
struct Word {
  std::string text;
  Span span;
  friend bool operator==(const Word& a, const Word& b) { return a.text == b.text; }
};

using Statement = std::vector<Word>;

struct Declaration {
  Word keyword;
  std::vector<Word> head;
  std::optional<std::vector<Statement>> block;
  Span brace;

  friend bool operator==(const Declaration& a, const Declaration& b) {
    return a.keyword == b.keyword && a.head == b.head && a.block == b.block;
  }
};

struct ModelDocument {
  std::string source_name = "model";
  std::vector<Declaration> declarations;
  friend bool operator==(const ModelDocument& a, const ModelDocument& b) { return a.declarations == b.declarations; }
};

inline const std::set<std::string>& declaration_keywords() {
  static const std::set<std::string> k{"agent",  "promise", "imposition", "container", "table", "ethernet", "switch",
                                       "router", "link",    "vlan",       "tunnel",    "cell",  "desired"};
  return k;
}

/// Keywords whose declaration carries a `{ }` block.
inline bool takes_block(const std::string& kw) {
  static const std::set<std::string> k{"container", "table", "ethernet", "switch", "router", "vlan", "cell", "desired"};
  return k.count(kw) != 0;
}

namespace detail {

enum class Tok { word, open, close, semi, newline };

struct Token {
  Tok kind;
  Word word;
};

/// Splits text into words, braces, `;` and newlines. A `{` glued to the
/// preceding word is part of it up to the matching `}` on the same line.
inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    Span at{line, col};
    if (c == '\n') {
      out.push_back({Tok::newline, {"\n", at}});
      advance(1);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      advance(1);
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (c == '{' || c == '}' || c == ';') {
      Tok k = c == '{' ? Tok::open : c == '}' ? Tok::close : Tok::semi;
      out.push_back({k, {std::string(1, c), at}});
      advance(1);
    } else {
      std::size_t start = i;
      while (i < text.size()) {
        char d = text[i];
        if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '\f' || d == '\v' || d == '#' || d == ';' ||
            d == '}')
          break;
        if (d == '{') {
          auto close = text.find_first_of("}\n", i);
          if (close == text.npos || text[close] == '\n') {
            advance((close == text.npos ? text.size() : close) - i);
            break;
          }
          advance(close + 1 - i);
          continue;
        }
        advance(1);
      }
      out.push_back({Tok::word, {std::string(text.substr(start, i - start)), at}});
    }
  }
  return out;
}

} // namespace detail

/// Recursive-descent parse into declarations; recovers at the next line that
/// starts with a declaration keyword.
inline std::vector<Diagnostic> parse_structure(std::string_view text, ModelDocument& doc) {
  using detail::Tok;
  std::vector<Diagnostic> diags;
  auto toks = detail::lex(text);
  std::size_t i = 0;
  auto error = [&](Span s, std::string msg, std::string hint = {}) {
    diags.push_back({Diagnostic::Severity::error, s, std::move(msg), std::move(hint)});
  };
  auto at_line_start = [&](std::size_t k) { return k == 0 || toks[k - 1].kind == Tok::newline; };
  auto starts_decl = [&](std::size_t k) {
    return toks[k].kind == Tok::word && at_line_start(k) && declaration_keywords().count(toks[k].word.text);
  };
  auto skip_to_decl = [&] {
    while (i < toks.size() && !starts_decl(i)) ++i;
  };

  while (i < toks.size()) {
    const auto& t = toks[i];
    if (t.kind == Tok::newline || t.kind == Tok::semi) {
      ++i;
      continue;
    }
    if (t.kind != Tok::word || !declaration_keywords().count(t.word.text)) {
      error(t.word.span, "expected a declaration, found '" + t.word.text + "'",
            "declarations start with agent, promise, imposition, container, table, ethernet, switch, router, link, "
            "vlan, tunnel, cell or desired");
      ++i;
      skip_to_decl();
      continue;
    }
    Declaration d;
    d.keyword = t.word;
    ++i;
    while (i < toks.size() && toks[i].kind == Tok::word) d.head.push_back(toks[i++].word);
    bool wants_block = takes_block(d.keyword.text);
    bool has_open = i < toks.size() && toks[i].kind == Tok::open;
    if (!wants_block) {
      if (has_open || (i < toks.size() && toks[i].kind == Tok::close)) {
        error(toks[i].word.span, "'" + d.keyword.text + "' takes no block");
        ++i;
        skip_to_decl();
        continue;
      }
      doc.declarations.push_back(std::move(d));
      continue;
    }
    if (!has_open) {
      error(i < toks.size() ? toks[i].word.span : d.keyword.span, "'" + d.keyword.text + "' needs a '{' block");
      skip_to_decl();
      continue;
    }
    d.brace = toks[i].word.span;
    ++i;
    std::vector<Statement> block;
    Statement cur;
    bool closed = false, bad = false;
    while (i < toks.size()) {
      const auto& b = toks[i];
      if (starts_decl(i)) break;
      if (b.kind == Tok::close) {
        closed = true;
        ++i;
        break;
      }
      if (b.kind == Tok::open) {
        error(b.word.span, "nested blocks are not allowed");
        bad = true;
      } else if (b.kind == Tok::newline || b.kind == Tok::semi) {
        if (!cur.empty()) block.push_back(std::move(cur));
        cur.clear();
      } else {
        if (cur.empty() && declaration_keywords().count(b.word.text)) {
          error(b.word.span, "statement cannot start with the keyword '" + b.word.text + "'",
                "start a new line for a declaration");
          bad = true;
        }
        cur.push_back(b.word);
      }
      ++i;
    }
    if (!cur.empty()) block.push_back(std::move(cur));
    if (!closed) {
      error(d.brace, "unterminated block for '" + d.keyword.text + "'", "add a closing '}'");
      continue;
    }
    if (i < toks.size() && toks[i].kind != Tok::newline) {
      error(toks[i].word.span, "unexpected text after '}'");
      skip_to_decl();
      bad = true;
    }
    if (bad) continue;
    d.block = std::move(block);
    doc.declarations.push_back(std::move(d));
  }
  return diags;
}

/// Text that parses back to an equal document.
inline std::string render(const ModelDocument& doc) {
  std::string s;
  for (const auto& d : doc.declarations) {
    s += d.keyword.text;
    for (const auto& w : d.head) s += " " + w.text;
    if (d.block) {
      s += " {\n";
      for (const auto& st : *d.block) {
        s += " ";
        for (const auto& w : st) s += " " + w.text;
        s += "\n";
      }
      s += "}";
    }
    s += "\n";
  }
  return s;
}

} // namespace pnet::dsl

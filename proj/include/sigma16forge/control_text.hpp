#pragma once

// Textual form of a control algorithm.
//
//   # comment
//   signals ctl_a, ctl_b;
//   conditions cnd;
//   selector ir_op 4;
//   initial st_fetch;
//   state st_fetch: assert ctl_a, ctl_b when !cnd; next st_decode;
//   state st_decode: next case ir_op { 0 -> st_add, 0xf -> st_fetch, default -> st_fetch };
//   state st_wait: next if cnd then st_fetch else st_wait;
//
// `when` gates the single signal before it.

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "sigma16forge/control.hpp"
#include "sigma16forge/util/hex.hpp"

namespace sigma16forge {

namespace detail {

struct CtlToken {
  enum Kind { Ident, Number, Punct, End } kind;
  std::string text;
  std::uint64_t value = 0;
  int line = 0;
};

inline std::vector<CtlToken> lex_control(std::string_view src) {
  std::vector<CtlToken> out;
  int line = 1;
  std::size_t i = 0;
  auto err = [&](const std::string& m) { return ControlError("control text line " + std::to_string(line) + ": " + m); };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({CtlToken::Ident, std::string(src.substr(i, j - i)), 0, line});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isalnum(static_cast<unsigned char>(src[j]))) ++j;
      std::string_view t = src.substr(i, j - i);
      std::uint64_t v = 0;
      if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
        auto h = parse_hex(t.substr(2));
        if (!h) throw err("bad number '" + std::string(t) + "'");
        v = *h;
      } else {
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size()) throw err("bad number '" + std::string(t) + "'");
      }
      out.push_back({CtlToken::Number, std::string(t), v, line});
      i = j;
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      out.push_back({CtlToken::Punct, "->", 0, line});
      i += 2;
    } else if (std::string_view(":;,{}!").find(c) != std::string_view::npos) {
      out.push_back({CtlToken::Punct, std::string(1, c), 0, line});
      ++i;
    } else {
      throw err(std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({CtlToken::End, "", 0, line});
  return out;
}

class ControlParser {
 public:
  explicit ControlParser(std::string_view src) : toks_(lex_control(src)) {}

  ControlAlgorithm parse() {
    ControlAlgorithm alg;
    while (peek().kind != CtlToken::End) {
      const std::string kw = ident("keyword");
      if (kw == "signals") {
        alg.signals = names();
      } else if (kw == "conditions") {
        alg.conditions = names();
      } else if (kw == "selector") {
        Selector s;
        s.name = ident("selector name");
        s.width = static_cast<std::size_t>(number());
        expect(";");
        alg.selectors.push_back(s);
      } else if (kw == "initial") {
        alg.initial = ident("state name");
        expect(";");
      } else if (kw == "state") {
        alg.states.push_back(state());
      } else {
        throw error("unknown keyword '" + kw + "'");
      }
    }
    return alg;
  }

 private:
  const CtlToken& peek() const { return toks_[pos_]; }
  const CtlToken& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  ControlError error(const std::string& m) const {
    return ControlError("control text line " + std::to_string(peek().line) + ": " + m);
  }
  bool accept(std::string_view p) {
    if (peek().kind == CtlToken::Punct && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    if (peek().kind == CtlToken::Ident && peek().text == w) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view p) {
    if (!accept(p)) throw error("expected '" + std::string(p) + "', found '" + peek().text + "'");
  }
  std::string ident(const char* what) {
    if (peek().kind != CtlToken::Ident) throw error(std::string("expected ") + what + ", found '" + peek().text + "'");
    return take().text;
  }
  std::uint64_t number() {
    if (peek().kind != CtlToken::Number) throw error("expected a number, found '" + peek().text + "'");
    return take().value;
  }
  std::vector<std::string> names() {
    std::vector<std::string> v;
    if (accept(";")) return v;
    do v.push_back(ident("name"));
    while (accept(","));
    expect(";");
    return v;
  }

  ControlState state() {
    ControlState s;
    s.name = ident("state name");
    expect(":");
    if (accept_word("assert")) {
      do {
        Assertion a;
        a.signal = ident("signal name");
        if (accept_word("when")) {
          a.when = !accept("!");
          a.condition = ident("condition name");
        }
        s.assertions.push_back(a);
      } while (accept(","));
      expect(";");
    }
    if (!accept_word("next")) throw error("expected 'next' in state " + s.name);
    s.next = rule();
    expect(";");
    return s;
  }

  NextRule rule() {
    if (accept_word("if")) {
      const bool negate = accept("!");
      std::string cond = ident("condition name");
      if (!accept_word("then")) throw error("expected 'then'");
      NextRule a = rule();
      if (!accept_word("else")) throw error("expected 'else'");
      NextRule b = rule();
      return negate ? NextRule::branch(cond, std::move(b), std::move(a)) : NextRule::branch(cond, std::move(a), std::move(b));
    }
    if (accept_word("case")) {
      NextRule r;
      r.type = NextRule::Type::Dispatch;
      r.selector = ident("selector name");
      expect("{");
      std::optional<NextRule> fallback;
      do {
        if (accept_word("default")) {
          expect("->");
          fallback = rule();
        } else {
          r.keys.push_back(number());
          expect("->");
          r.children.push_back(rule());
        }
      } while (accept(","));
      expect("}");
      if (fallback) r.children.push_back(std::move(*fallback));
      return r;
    }
    return NextRule::go(ident("state name"));
  }

  std::vector<CtlToken> toks_;
  std::size_t pos_ = 0;
};

inline std::string rule_text(const NextRule& r) {
  switch (r.type) {
    case NextRule::Type::Goto:
      return r.target;
    case NextRule::Type::Branch:
      return "if " + r.condition + " then " + rule_text(r.children[0]) + " else " + rule_text(r.children[1]);
    case NextRule::Type::Dispatch: {
      std::string s = "case " + r.selector + " { ";
      for (std::size_t i = 0; i < r.keys.size(); ++i) {
        if (i) s += ", ";
        s += "0x" + hex(r.keys[i], 1) + " -> " + rule_text(r.children[i]);
      }
      if (r.has_default()) s += std::string(r.keys.empty() ? "" : ", ") + "default -> " + rule_text(r.children.back());
      return s + " }";
    }
  }
  return {};
}

}  // namespace detail

inline ControlAlgorithm parse_control(std::string_view text) { return detail::ControlParser(text).parse(); }

inline std::string control_to_text(const ControlAlgorithm& alg) {
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  };
  std::string out;
  out += "signals " + list(alg.signals) + ";\n";
  out += "conditions " + list(alg.conditions) + ";\n";
  for (const auto& s : alg.selectors) out += "selector " + s.name + " " + std::to_string(s.width) + ";\n";
  out += "initial " + alg.initial + ";\n";
  for (const auto& s : alg.states) {
    out += "\nstate " + s.name + ":";
    if (!s.assertions.empty()) {
      out += "\n  assert ";
      for (std::size_t i = 0; i < s.assertions.size(); ++i) {
        const auto& a = s.assertions[i];
        out += (i ? ", " : "") + a.signal;
        if (!a.condition.empty()) out += std::string(" when ") + (a.when ? "" : "!") + a.condition;
      }
      out += ";";
    }
    out += "\n  next " + detail::rule_text(s.next) + ";\n";
  }
  return out;
}

}  // namespace sigma16forge

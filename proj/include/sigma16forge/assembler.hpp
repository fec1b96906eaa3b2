#pragma once

// Two-pass assembler for Sigma16 assembly text, and the object text format.
//
//   label  mnemonic  operands   ; comment
//
// A label starts in column 1. Operands are `Rd,Ra,Rb` (RRR), `Rd,disp[Ra]`
// (RX; jump also takes `disp[Ra]`), or a value for `data`. Values are
// decimal (negative allowed), $hex, or a label.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sigma16forge/isa.hpp"

namespace sigma16forge {

struct Diagnostic {
  int line = 0;
  std::string message;

  [[nodiscard]] std::string str() const { return "line " + std::to_string(line) + ": " + message; }
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct SourceLine {
  int line = 0;
  std::string label;
  std::string mnemonic;  // empty when the line holds no statement
  std::string operands;  // whitespace removed
  std::string comment;
  std::optional<std::string> error;
};

struct ListingLine {
  int line = 0;
  std::optional<Word16> address;
  std::vector<Word16> words;
  std::string source;
};

struct ObjectModule {
  Word16 origin = 0;
  std::vector<Word16> code;
  std::map<std::string, Word16> symbols;
  std::vector<ListingLine> listing;
  std::vector<Diagnostic> diagnostics;

  [[nodiscard]] bool ok() const { return diagnostics.empty(); }
};

inline bool valid_label(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

inline SourceLine parse_line(std::string_view text, int line = 0) {
  SourceLine out;
  out.line = line;
  if (const auto semi = text.find(';'); semi != std::string_view::npos) {
    out.comment = std::string(text.substr(semi + 1));
    text = text.substr(0, semi);
  }
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0;
  auto word = [&]() {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    return std::string(text.substr(start, i - start));
  };
  if (!text.empty() && !is_space(text[0])) {
    out.label = word();
    if (!valid_label(out.label)) {
      out.error = "bad label '" + out.label + "'";
      return out;
    }
  }
  out.mnemonic = word();
  for (; i < text.size(); ++i)
    if (!is_space(text[i])) out.operands += text[i];
  if (out.mnemonic.empty() && !out.operands.empty()) out.error = "operands without a mnemonic";
  return out;
}

namespace detail {

struct AsmError {
  std::string message;
};

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline unsigned parse_register(const std::string& s) {
  if (s.size() < 2 || (s[0] != 'R' && s[0] != 'r')) throw AsmError{"expected a register, found '" + s + "'"};
  unsigned v = 0;
  auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v > 15) throw AsmError{"bad register '" + s + "'"};
  return v;
}

inline Word16 parse_value(const std::string& s, const std::map<std::string, Word16>* symbols) {
  if (s.empty()) throw AsmError{"missing value"};
  if (s[0] == '$') {
    const auto h = s.size() <= 5 ? parse_hex(std::string_view(s).substr(1)) : std::nullopt;
    if (!h) throw AsmError{"bad hex value '" + s + "'"};
    return static_cast<Word16>(*h);
  }
  if (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s[0] == '+') {
    long v = 0;
    const char* b = s.data() + (s[0] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw AsmError{"bad number '" + s + "'"};
    if (v < -32768 || v > 65535) throw AsmError{"value " + s + " does not fit in 16 bits"};
    return static_cast<Word16>(v);
  }
  if (!valid_label(s)) throw AsmError{"bad operand '" + s + "'"};
  if (!symbols) return 0;
  auto it = symbols->find(s);
  if (it == symbols->end()) throw AsmError{"undefined label '" + s + "'"};
  return it->second;
}

// disp[Ra]
inline std::pair<Word16, unsigned> parse_indexed(const std::string& s, const std::map<std::string, Word16>* symbols) {
  const auto open = s.find('[');
  if (open == std::string::npos || s.back() != ']') throw AsmError{"expected disp[Ra], found '" + s + "'"};
  const Word16 disp = parse_value(s.substr(0, open), symbols);
  const unsigned ra = parse_register(s.substr(open + 1, s.size() - open - 2));
  return {disp, ra};
}

inline std::size_t statement_size(const SourceLine& l) {
  if (l.mnemonic.empty()) return 0;
  if (l.mnemonic == "data") return 1;
  if (const auto f = format_of(l.mnemonic)) return *f == Format::RX ? 2 : 1;
  throw AsmError{"unknown mnemonic '" + l.mnemonic + "'"};
}

inline std::vector<Word16> encode_statement(const SourceLine& l, const std::map<std::string, Word16>* symbols) {
  const auto ops = split_commas(l.operands);
  if (l.mnemonic == "data") {
    if (ops.size() != 1) throw AsmError{"data takes one value"};
    return {parse_value(ops[0], symbols)};
  }
  const auto fmt = format_of(l.mnemonic);
  if (!fmt) throw AsmError{"unknown mnemonic '" + l.mnemonic + "'"};
  if (*fmt == Format::RRR) {
    if (ops.size() != 3) throw AsmError{"RRR instruction " + l.mnemonic + " needs three registers"};
    return encode(make_rrr(l.mnemonic, parse_register(ops[0]), parse_register(ops[1]), parse_register(ops[2])));
  }
  unsigned d = 0;
  std::string indexed;
  if (ops.size() == 2) {
    d = parse_register(ops[0]);
    indexed = ops[1];
  } else if (ops.size() == 1 && l.mnemonic == "jump") {
    indexed = ops[0];
  } else {
    throw AsmError{"RX instruction " + l.mnemonic + " needs Rd,disp[Ra]"};
  }
  const auto [disp, ra] = parse_indexed(indexed, symbols);
  return encode(make_rx(l.mnemonic, d, disp, ra));
}

}  // namespace detail

inline ObjectModule assemble(std::string_view source) {
  ObjectModule m;
  std::vector<SourceLine> lines;
  std::vector<std::string> raw;
  {
    std::size_t pos = 0;
    int n = 0;
    while (pos < source.size()) {
      auto nl = source.find('\n', pos);
      if (nl == std::string_view::npos) nl = source.size();
      std::string_view text = source.substr(pos, nl - pos);
      if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
      raw.emplace_back(text);
      lines.push_back(parse_line(text, ++n));
      pos = nl + 1;
    }
  }

  // pass 1: addresses and symbols
  std::vector<std::optional<Word16>> addr(lines.size());
  std::vector<bool> bad(lines.size(), false);
  std::size_t lc = m.origin;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.error) {
      m.diagnostics.push_back({l.line, *l.error});
      bad[i] = true;
      continue;
    }
    if (lc > 0xffff && (!l.label.empty() || !l.mnemonic.empty())) {
      m.diagnostics.push_back({l.line, "program does not fit in memory"});
      bad[i] = true;
      continue;
    }
    if (!l.label.empty()) {
      if (m.symbols.count(l.label))
        m.diagnostics.push_back({l.line, "duplicate label '" + l.label + "'"});
      else
        m.symbols[l.label] = static_cast<Word16>(lc);
    }
    try {
      const std::size_t size = detail::statement_size(l);
      if (size) addr[i] = static_cast<Word16>(lc);
      lc += size;
    } catch (const detail::AsmError& e) {
      m.diagnostics.push_back({l.line, e.message});
      bad[i] = true;
    }
  }

  // pass 2: encoding
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ListingLine ll{lines[i].line, addr[i], {}, raw[i]};
    if (!bad[i] && addr[i]) {
      std::vector<Word16> words;
      try {
        words = detail::encode_statement(lines[i], &m.symbols);
      } catch (const detail::AsmError& e) {
        m.diagnostics.push_back({lines[i].line, e.message});
      } catch (const IsaError& e) {
        m.diagnostics.push_back({lines[i].line, e.what()});
      }
      // keep addresses consistent even after an error
      words.resize(detail::statement_size(lines[i]), 0);
      ll.words = words;
      m.code.insert(m.code.end(), words.begin(), words.end());
    } else if (addr[i]) {
      m.code.push_back(0);
    }
    m.listing.push_back(std::move(ll));
  }
  std::stable_sort(m.diagnostics.begin(), m.diagnostics.end(),
                   [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
  return m;
}

inline std::string listing_text(const ObjectModule& m) {
  std::string out;
  for (const auto& l : m.listing) {
    std::string left = l.address ? hex4(*l.address) : "    ";
    for (auto w : l.words) left += " " + hex4(w);
    left.resize(std::max<std::size_t>(left.size(), 16), ' ');
    out += left + l.source + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Object text

inline constexpr std::string_view kObjectHeader = "sigma16forge-obj v1";

class ObjectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string write_object(const ObjectModule& m) {
  if (!m.ok()) throw ObjectError("module has " + std::to_string(m.diagnostics.size()) + " diagnostics");
  std::string out(kObjectHeader);
  out += "\n";
  for (std::size_t i = 0; i < m.code.size(); ++i)
    out += "code " + hex4(static_cast<Word16>(m.origin + i)) + " " + hex4(m.code[i]) + "\n";
  for (const auto& [name, a] : m.symbols) out += "symbol " + name + " " + hex4(a) + "\n";
  return out;
}

/// Loaded image: (address, word) records in file order plus symbols.
struct ObjectImage {
  std::vector<std::pair<Word16, Word16>> records;
  std::map<std::string, Word16> symbols;

  [[nodiscard]] std::size_t extent() const {
    std::size_t e = 0;
    for (const auto& [a, w] : records) e = std::max<std::size_t>(e, std::size_t{a} + 1);
    return e;
  }
  /// Memory contents over [0, extent()); later records win.
  [[nodiscard]] std::vector<Word16> flatten() const {
    std::vector<Word16> mem(extent(), 0);
    for (const auto& [a, w] : records) mem[a] = w;
    return mem;
  }
};

inline ObjectImage image_of(const ObjectModule& m) {
  ObjectImage img;
  for (std::size_t i = 0; i < m.code.size(); ++i) img.records.emplace_back(static_cast<Word16>(m.origin + i), m.code[i]);
  img.symbols = m.symbols;
  return img;
}

inline ObjectImage read_object(std::string_view text) {
  ObjectImage img;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  auto fail = [&](const std::string& msg) { return ObjectError("object line " + std::to_string(n) + ": " + msg); };
  auto word = [&](const std::string& s) {
    const auto v = s.size() == 4 ? parse_hex(s) : std::nullopt;
    if (!v) throw fail("bad hex word '" + s + "'");
    return static_cast<Word16>(*v);
  };
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != kObjectHeader) throw fail("missing header '" + std::string(kObjectHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind, a, b, extra;
    ls >> kind >> a >> b;
    if (ls >> extra) throw fail("trailing text");
    if (kind == "code" && !b.empty()) {
      img.records.emplace_back(word(a), word(b));
    } else if (kind == "symbol" && !b.empty()) {
      if (!valid_label(a)) throw fail("bad symbol name '" + a + "'");
      img.symbols[a] = word(b);
    } else {
      throw fail("unrecognised record '" + line + "'");
    }
  }
  if (n == 0) throw ObjectError("object line 1: empty object");
  return img;
}

/// Disassembly that the assembler accepts back: one statement per line,
/// indented, with an address/word comment.
inline std::string disassembly_text(std::span<const Word16> words, Word16 start = 0) {
  std::string out;
  for (const auto& l : disassemble(words, start)) {
    std::string stmt = "   " + l.text;
    stmt.resize(std::max<std::size_t>(stmt.size() + 1, 28), ' ');
    stmt += "; " + hex4(l.address);
    for (auto w : l.words) stmt += " " + hex4(w);
    out += stmt + "\n";
  }
  return out;
}

}  // namespace sigma16forge

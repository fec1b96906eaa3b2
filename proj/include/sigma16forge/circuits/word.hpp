#pragma once

// Words: fixed-width groups of signals, most significant bit first.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sigma16forge/netlist.hpp"
#include "sigma16forge/simulator.hpp"

namespace sigma16forge {

struct Word {
  std::vector<NodeRef> bits;  // index 0 is the most significant bit

  Word() = default;
  explicit Word(std::vector<NodeRef> b) : bits(std::move(b)) {}

  [[nodiscard]] std::size_t width() const { return bits.size(); }
  [[nodiscard]] NodeRef operator[](std::size_t i) const { return bits.at(i); }
  [[nodiscard]] NodeRef msb() const { return bits.front(); }
  [[nodiscard]] NodeRef lsb() const { return bits.back(); }

  [[nodiscard]] Word slice(std::size_t first, std::size_t count) const {
    if (first + count > bits.size()) throw NetlistError("word slice out of range");
    return Word({bits.begin() + static_cast<std::ptrdiff_t>(first),
                 bits.begin() + static_cast<std::ptrdiff_t>(first + count)});
  }

  friend bool operator==(const Word&, const Word&) = default;
};

inline Word concat(const Word& hi, const Word& lo) {
  Word w = hi;
  w.bits.insert(w.bits.end(), lo.bits.begin(), lo.bits.end());
  return w;
}

/// Operand pairs in bit-slice form: element i holds (x_i, y_i), MSB first.
using BitSlice = std::vector<std::pair<NodeRef, NodeRef>>;

inline BitSlice bitslice(const Word& x, const Word& y) {
  if (x.width() != y.width()) throw NetlistError("bitslice: width mismatch");
  BitSlice s;
  for (std::size_t i = 0; i < x.width(); ++i) s.emplace_back(x[i], y[i]);
  return s;
}

inline std::pair<Word, Word> unslice(const BitSlice& s) {
  Word x, y;
  for (const auto& [a, b] : s) {
    x.bits.push_back(a);
    y.bits.push_back(b);
  }
  return {x, y};
}

inline void require_width(const Word& w, std::size_t n, const char* what) {
  if (w.width() != n)
    throw NetlistError(std::string(what) + ": expected width " + std::to_string(n) + ", got " + std::to_string(w.width()));
}

inline void require_same_width(const Word& a, const Word& b, const char* what) {
  if (a.width() != b.width())
    throw NetlistError(std::string(what) + ": width mismatch " + std::to_string(a.width()) + " vs " + std::to_string(b.width()));
}

// ---------------------------------------------------------------------------
// Netlist plumbing for words. Bit i of word `name` is named `name[i]`,
// where i counts from the most significant end.

inline std::string bit_name(const std::string& name, std::size_t i) { return name + "[" + std::to_string(i) + "]"; }

inline Word input_word(Netlist& n, const std::string& name, std::size_t width) {
  Word w;
  for (std::size_t i = 0; i < width; ++i) w.bits.push_back(n.add_input(bit_name(name, i)));
  return w;
}

inline Word constant_word(Netlist& n, std::uint64_t value, std::size_t width) {
  Word w;
  for (std::size_t i = 0; i < width; ++i) w.bits.push_back(n.constant((value >> (width - 1 - i)) & 1));
  return w;
}

inline void output_word(Netlist& n, const std::string& name, const Word& w) {
  for (std::size_t i = 0; i < w.width(); ++i) n.add_output(bit_name(name, i), w[i]);
}

inline std::vector<std::pair<std::string, NodeRef>> probes_of(const std::string& name, const Word& w) {
  std::vector<std::pair<std::string, NodeRef>> p;
  for (std::size_t i = 0; i < w.width(); ++i) p.emplace_back(bit_name(name, i), w[i]);
  return p;
}

inline std::uint64_t word_value(const Simulator& sim, const Word& w) {
  std::uint64_t v = 0;
  for (const auto& b : w.bits) v = (v << 1) | (sim.value(b) ? 1u : 0u);
  return v;
}

inline void set_word(Simulator& sim, const Word& w, std::uint64_t value) {
  for (std::size_t i = 0; i < w.width(); ++i) sim.set_input(w[i], (value >> (w.width() - 1 - i)) & 1);
}

/// Streams driving each bit of an input word with one value per cycle.
inline void word_streams(NamedStreams& into, const std::string& name, std::size_t width,
                         const std::vector<std::uint64_t>& per_cycle) {
  for (std::size_t i = 0; i < width; ++i) {
    BitStream s;
    for (auto v : per_cycle) s.bits.push_back(static_cast<std::uint8_t>((v >> (width - 1 - i)) & 1));
    into[bit_name(name, i)] = std::move(s);
  }
}

/// Reads back a word at cycle t from named streams.
inline std::uint64_t stream_word(const NamedStreams& s, const std::string& name, std::size_t width, std::size_t t) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v = (v << 1) | (s.at(bit_name(name, i)).at(t) ? 1u : 0u);
  return v;
}

}  // namespace sigma16forge

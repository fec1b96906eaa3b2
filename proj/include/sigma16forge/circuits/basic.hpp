#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sigma16forge/circuits/word.hpp"

namespace sigma16forge {

/// Multiplexer: x when c = 0, y when c = 1.
inline NodeRef mux1(Netlist& n, NodeRef c, NodeRef x, NodeRef y) {
  return n.or2(n.and2(n.inv(c), x), n.and2(c, y));
}

inline Word mux1w(Netlist& n, NodeRef c, const Word& x, const Word& y) {
  require_same_width(x, y, "mux1w");
  Word w;
  for (std::size_t i = 0; i < x.width(); ++i) w.bits.push_back(mux1(n, c, x[i], y[i]));
  return w;
}

/// Four-way word multiplexer selected by (c0, c1), c0 most significant.
inline Word mux2w(Netlist& n, NodeRef c0, NodeRef c1, const Word& w0, const Word& w1, const Word& w2, const Word& w3) {
  return mux1w(n, c0, mux1w(n, c1, w0, w1), mux1w(n, c1, w2, w3));
}

/// Forward wire: a buffer whose source is supplied later by bind_wire, for
/// wiring that refers to signals built further on.
inline NodeRef wire(Netlist& n) { return n.or2(n.zero(), n.zero()); }
inline void bind_wire(Netlist& n, NodeRef w, NodeRef src) { n.set_operands(w, {src, src}); }

inline Word wirew(Netlist& n, std::size_t width) {
  Word w;
  for (std::size_t i = 0; i < width; ++i) w.bits.push_back(wire(n));
  return w;
}
inline void bind_wirew(Netlist& n, const Word& w, const Word& src) {
  require_same_width(w, src, "bind_wirew");
  for (std::size_t i = 0; i < w.width(); ++i) bind_wire(n, w[i], src[i]);
}

inline NodeRef xnor2(Netlist& n, NodeRef a, NodeRef b) { return n.inv(n.xor2(a, b)); }

namespace detail {
inline NodeRef tree(Netlist& n, std::vector<NodeRef> xs, Kind k2, Kind k3, bool empty_value) {
  if (xs.empty()) return n.constant(empty_value);
  while (xs.size() > 1) {
    std::vector<NodeRef> next;
    std::size_t i = 0;
    for (; i + 3 <= xs.size() && xs.size() - i != 4; i += 3) next.push_back(n.gate(k3, {xs[i], xs[i + 1], xs[i + 2]}));
    for (; i + 2 <= xs.size(); i += 2) next.push_back(n.gate(k2, {xs[i], xs[i + 1]}));
    if (i < xs.size()) next.push_back(xs[i]);
    xs = std::move(next);
  }
  return xs.front();
}
}  // namespace detail

/// OR of all bits (balanced tree).
inline NodeRef orw(Netlist& n, const Word& w) { return detail::tree(n, w.bits, Kind::Or2, Kind::Or3, false); }
inline NodeRef andw(Netlist& n, const Word& w) { return detail::tree(n, w.bits, Kind::And2, Kind::And3, true); }

inline Word invw(Netlist& n, const Word& w) {
  Word r;
  for (auto b : w.bits) r.bits.push_back(n.inv(b));
  return r;
}

/// Bitwise and of every bit with one control bit.
inline Word gatew(Netlist& n, NodeRef c, const Word& w) {
  Word r;
  for (auto b : w.bits) r.bits.push_back(n.and2(c, b));
  return r;
}

/// Register bit: state on the output every cycle; at the tick it keeps its
/// value when ld = 0 and takes x when ld = 1.
inline NodeRef reg1(Netlist& n, NodeRef ld, NodeRef x) {
  NodeRef s = n.dff();
  n.connect_dff(s, mux1(n, ld, s, x));
  return s;
}

inline Word regw(Netlist& n, std::size_t width, NodeRef ld, const Word& x) {
  require_width(x, width, "regw");
  Word w;
  for (auto b : x.bits) w.bits.push_back(reg1(n, ld, b));
  return w;
}

/// Plain delay of a word by one cycle.
inline Word dffw(Netlist& n, const Word& x) {
  Word w;
  for (auto b : x.bits) w.bits.push_back(n.dff(b));
  return w;
}

/// One-hot decoder: output bit i (MSB-first position) is 1 iff address == i.
inline Word decode(Netlist& n, std::size_t k, const Word& address) {
  require_width(address, k, "decode");
  if (k == 0) return Word({n.one()});
  const NodeRef a0 = address[0];
  const Word rest = decode(n, k - 1, address.slice(1, k - 1));
  const NodeRef na0 = n.inv(a0);
  Word out;
  for (auto d : rest.bits) out.bits.push_back(n.and2(na0, d));
  for (auto d : rest.bits) out.bits.push_back(n.and2(a0, d));
  return out;
}

/// Right-to-left scan: threads a carry from the least significant position
/// to the most significant, with `block(carry, x) -> (carry_out, bit)`.
/// Returns the final carry and the emitted word (MSB first).
template <typename T, typename Block>
std::pair<NodeRef, Word> mscanr(Block&& block, NodeRef carry, const std::vector<T>& xs) {
  if (xs.empty()) throw NetlistError("mscanr: empty word");
  Word out;
  out.bits.resize(xs.size());
  for (std::size_t i = xs.size(); i-- > 0;) {
    auto [c, bit] = block(carry, xs[i]);
    carry = c;
    out.bits[i] = bit;
  }
  return {carry, out};
}

inline std::pair<NodeRef, NodeRef> half_add(Netlist& n, NodeRef a, NodeRef b) { return {n.and2(a, b), n.xor2(a, b)}; }

/// (carry_out, sum) of x + y + carry.
inline std::pair<NodeRef, NodeRef> full_add(Netlist& n, NodeRef carry, std::pair<NodeRef, NodeRef> xy) {
  const NodeRef p = n.xor2(xy.first, xy.second);
  return {n.or2(n.and2(xy.first, xy.second), n.and2(p, carry)), n.xor2(p, carry)};
}

/// Incrementer: (carry_out, x + cin).
inline std::pair<NodeRef, Word> increment(Netlist& n, NodeRef cin, const Word& x) {
  return mscanr([&](NodeRef c, NodeRef b) { return half_add(n, c, b); }, cin, x.bits);
}

}  // namespace sigma16forge

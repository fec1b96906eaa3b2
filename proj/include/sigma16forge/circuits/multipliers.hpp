#pragma once

// Shift-and-add multipliers: a sequential functional unit with variable
// latency, and a k-stage pipeline taking a new operand pair every cycle.

#include <utility>

#include "sigma16forge/circuits/adders.hpp"

namespace sigma16forge {

struct SeqMultiplier {
  NodeRef busy;
  Word prod;  // 2n bits
};

/// Pulse `start` for one cycle with x and y valid. busy is 1 in the start
/// cycle and while multiplier bits remain; at the first cycle after start
/// with busy = 0, prod = x * y (unsigned). Iteration stops as soon as the
/// remaining multiplier bits are all zero, so the number of busy cycles
/// after start is the bit length of y (at most n).
inline SeqMultiplier seq_multiplier(Netlist& n, std::size_t width, NodeRef start, const Word& x, const Word& y) {
  require_width(x, width, "seq_multiplier x");
  require_width(y, width, "seq_multiplier y");
  const std::size_t wide = 2 * width;
  Word mplier, mcand, acc;
  for (std::size_t i = 0; i < width; ++i) mplier.bits.push_back(n.dff());
  for (std::size_t i = 0; i < wide; ++i) mcand.bits.push_back(n.dff());
  for (std::size_t i = 0; i < wide; ++i) acc.bits.push_back(n.dff());

  Word shr({n.zero()});
  for (std::size_t i = 0; i + 1 < width; ++i) shr.bits.push_back(mplier[i]);
  Word shl = mcand.slice(1, wide - 1);
  shl.bits.push_back(n.zero());
  const Word x_wide = concat(constant_word(n, 0, width), x);

  const Word mplier_next = mux1w(n, start, shr, y);
  const Word mcand_next = mux1w(n, start, shl, x_wide);
  auto [cout, sum] = ripple_add(n, n.zero(), bitslice(acc, mcand));
  (void)cout;
  const Word acc_next = gatew(n, n.inv(start), mux1w(n, mplier.lsb(), acc, sum));

  for (std::size_t i = 0; i < width; ++i) n.connect_dff(mplier[i], mplier_next[i]);
  for (std::size_t i = 0; i < wide; ++i) n.connect_dff(mcand[i], mcand_next[i]);
  for (std::size_t i = 0; i < wide; ++i) n.connect_dff(acc[i], acc_next[i]);
  return {n.or2(start, orw(n, mplier)), acc};
}

/// k pipeline stages; stage j adds (y_j ? x << j : 0) into a running sum
/// and latches (x, y, sum) for the next stage. The product of the pair
/// presented at cycle t is on the output at cycle t + k.
inline Word pipelined_vecmul(Netlist& n, std::size_t k, const Word& x, const Word& y) {
  require_width(x, k, "pipelined_vecmul x");
  require_width(y, k, "pipelined_vecmul y");
  const std::size_t wide = 2 * k;
  Word xs = x, ys = y, acc = constant_word(n, 0, wide);
  for (std::size_t j = 0; j < k; ++j) {
    // x << j, widened to 2k bits
    Word shifted = concat(constant_word(n, 0, k - j), xs);
    if (j) shifted = concat(shifted, constant_word(n, 0, j));
    const NodeRef bit = ys[k - 1 - j];
    auto [cout, sum] = ripple_add(n, n.zero(), bitslice(acc, gatew(n, bit, shifted)));
    (void)cout;
    xs = dffw(n, xs);
    ys = dffw(n, ys);
    acc = dffw(n, sum);
  }
  return acc;
}

struct VecMulCircuit {
  Netlist netlist;
  Word x, y, prod;
};

/// Standalone pipelined multiplier: inputs x[..], y[..]; outputs p[..].
inline VecMulCircuit make_pipelined_vecmul(std::size_t k) {
  VecMulCircuit c;
  c.x = input_word(c.netlist, "x", k);
  c.y = input_word(c.netlist, "y", k);
  c.prod = pipelined_vecmul(c.netlist, k, c.x, c.y);
  output_word(c.netlist, "p", c.prod);
  return c;
}

}  // namespace sigma16forge

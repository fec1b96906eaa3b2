#pragma once

// Two ALUs: the 8-bit exercise ALU with a two-bit opcode, and the M1
// processor ALU with four function-select bits a, b, c, d.

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>

#include "sigma16forge/circuits/adders.hpp"

namespace sigma16forge {

/// Exercise ALU opcode (op1, op0).
struct AluOp {
  NodeRef op1, op0;
};

/// Exercise ALU over 8-bit two's complement bit-slice operands:
///   (0,0) x+y   (0,1) x-y   (1,0) y+1   (1,1) -y
/// One adder does all four by preprocessing its inputs:
///   a = op1 ? 0 : x,  b = op0 ? ~y : y,  carry-in = op1 | op0.
/// ofl is signed overflow of the adder: both adder operands share a sign
/// the result does not.
inline std::pair<NodeRef, Word> alu_exercise(Netlist& n, AluOp op, const BitSlice& xy) {
  if (xy.size() != 8) throw NetlistError("alu_exercise: operands must be 8 bits");
  const NodeRef keep_x = n.inv(op.op1);
  BitSlice ab;
  for (const auto& [x, y] : xy) ab.emplace_back(n.and2(keep_x, x), n.xor2(op.op0, y));
  const NodeRef cin = n.or2(op.op1, op.op0);
  auto [cout, r] = ripple_add(n, cin, ab);
  (void)cout;
  const NodeRef same_sign = xnor2(n, ab[0].first, ab[0].second);
  const NodeRef flipped = n.xor2(r[0], ab[0].first);
  return {n.and2(same_sign, flipped), r};
}

/// M1 ALU function code, bits a b c d.
struct M1AluFunction {
  NodeRef a, b, c, d;
};

/// Encodings asserted by the M1 control (abcd).
namespace alu_code {
inline constexpr std::uint8_t kAdd = 0b0000;
inline constexpr std::uint8_t kSub = 0b0100;
inline constexpr std::uint8_t kInc = 0b1100;
inline constexpr std::uint8_t kCmpLt = 0b0001;
inline constexpr std::uint8_t kCmpEq = 0b0010;
inline constexpr std::uint8_t kCmpGt = 0b0011;
inline constexpr std::uint8_t kNeg = 0b1000;

struct Entry {
  std::uint8_t code;
  std::string_view name;
};
inline constexpr std::array<Entry, 7> kTable = {{{kAdd, "add"},
                                                 {kSub, "sub"},
                                                 {kInc, "inc"},
                                                 {kCmpLt, "cmplt"},
                                                 {kCmpEq, "cmpeq"},
                                                 {kCmpGt, "cmpgt"},
                                                 {kNeg, "neg"}}};
}  // namespace alu_code

/// M1 ALU (width n, two's complement):
///   0000 x+y   0100 x-y   1100 x+1   1000 -y
///   0001 x<y   0010 x=y   0011 x>y   (comparisons give 0 or 1, signed)
/// cnd = 1 iff r != 0.
inline std::pair<NodeRef, Word> alu_m1(Netlist& n, M1AluFunction f, const Word& x, const Word& y) {
  require_same_width(x, y, "alu_m1");
  const std::size_t width = x.width();
  const NodeRef cmp = n.or2(f.c, f.d);
  const NodeRef invert_y = n.or3(f.a, f.b, cmp);   // sub, neg, inc(cleared below), compare
  const NodeRef zero_y = n.and2(f.a, f.b);          // inc
  const NodeRef zero_x = n.and2(f.a, n.inv(f.b));   // neg
  const NodeRef keep_x = n.inv(zero_x);
  const NodeRef keep_y = n.inv(zero_y);
  BitSlice ops;
  for (std::size_t i = 0; i < width; ++i)
    ops.emplace_back(n.and2(keep_x, x[i]), n.and2(keep_y, n.xor2(invert_y, y[i])));
  auto [cout, sum] = ripple_add(n, invert_y, ops);
  (void)cout;

  // Compare from the difference x - y computed by the same adder.
  const NodeRef ovf = n.and2(xnor2(n, ops[0].first, ops[0].second), n.xor2(sum[0], ops[0].first));
  const NodeRef lt = n.xor2(sum[0], ovf);
  const NodeRef eq = n.inv(orw(n, sum));
  const NodeRef gt = n.and2(n.inv(lt), n.inv(eq));
  // (c,d): 01 lt, 10 eq, 11 gt
  const NodeRef bit = mux1(n, f.c, n.and2(f.d, lt), mux1(n, f.d, eq, gt));

  Word r;
  const NodeRef arith = n.inv(cmp);
  for (std::size_t i = 0; i + 1 < width; ++i) r.bits.push_back(n.and2(arith, sum[i]));
  r.bits.push_back(mux1(n, cmp, sum.lsb(), bit));
  return {orw(n, r), r};
}

}  // namespace sigma16forge

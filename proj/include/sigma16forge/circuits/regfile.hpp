#pragma once

#include <vector>

#include "sigma16forge/circuits/basic.hpp"

namespace sigma16forge {

struct RegFile {
  Word a, b;
  std::vector<Word> registers;  // state outputs, for observation
};

namespace detail {
inline Word select_word(Netlist& n, const std::vector<Word>& regs, std::size_t first, std::size_t count,
                        const Word& addr, std::size_t bit) {
  if (count == 1) return regs[first];
  const std::size_t half = count / 2;
  return mux1w(n, addr[bit], select_word(n, regs, first, half, addr, bit + 1),
               select_word(n, regs, first + half, half, addr, bit + 1));
}
}  // namespace detail

/// Combinational read of one register selected by `addr`.
inline Word regfile_read(Netlist& n, const std::vector<Word>& registers, const Word& addr) {
  return detail::select_word(n, registers, 0, registers.size(), addr, 0);
}

/// 2^k registers of `width` bits. Reads are combinational on srcA/srcB; at
/// the tick, if ld = 1, register dest takes p. Register 0 never loads, so
/// it reads as 0.
inline RegFile regfile(Netlist& n, std::size_t width, std::size_t k, NodeRef ld, const Word& dest, const Word& src_a,
                       const Word& src_b, const Word& p) {
  require_width(dest, k, "regfile dest");
  require_width(src_a, k, "regfile srcA");
  require_width(src_b, k, "regfile srcB");
  require_width(p, width, "regfile data");
  const Word lines = decode(n, k, dest);
  RegFile rf;
  for (std::size_t i = 0; i < lines.width(); ++i) {
    const NodeRef load = i == 0 ? n.zero() : n.and2(ld, lines[i]);
    rf.registers.push_back(regw(n, width, load, p));
  }
  rf.a = detail::select_word(n, rf.registers, 0, rf.registers.size(), src_a, 0);
  rf.b = detail::select_word(n, rf.registers, 0, rf.registers.size(), src_b, 0);
  return rf;
}

}  // namespace sigma16forge

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sigma16forge/circuits/basic.hpp"

namespace sigma16forge {

/// Ripple-carry adder over bit-slice operands: (carry_out, x + y + cin mod 2^n).
inline std::pair<NodeRef, Word> ripple_add(Netlist& n, NodeRef cin, const BitSlice& xy) {
  return mscanr([&](NodeRef c, std::pair<NodeRef, NodeRef> p) { return full_add(n, c, p); }, cin, xy);
}

/// Logic-depth bound of prefix_add for width n: 2*ceil(log2(n+1)) + 2.
inline int prefix_add_depth_bound(std::size_t width) {
  int rounds = 0;
  while ((std::size_t{1} << rounds) < width + 1) ++rounds;
  return 2 * rounds + 2;
}

/// Parallel-prefix (Kogge-Stone) adder computing the same function as
/// ripple_add. Carries are prefix combinations of (generate, propagate)
/// pairs, with the carry-in as the generate of an extra lowest position.
inline std::pair<NodeRef, Word> prefix_add(Netlist& n, NodeRef cin, const BitSlice& xy) {
  const std::size_t width = xy.size();
  if (width == 0) throw NetlistError("prefix_add: empty word");
  // Position k = 0 is the carry-in; position k = j + 1 is bit weight j.
  std::vector<NodeRef> g(width + 1);
  std::vector<std::optional<NodeRef>> p(width + 1);  // nullopt: group reaches the carry-in, propagate is irrelevant
  std::vector<NodeRef> half(width);
  g[0] = cin;
  for (std::size_t j = 0; j < width; ++j) {
    const auto& [x, y] = xy[width - 1 - j];
    g[j + 1] = n.and2(x, y);
    half[j] = n.xor2(x, y);
    p[j + 1] = half[j];
  }
  for (std::size_t d = 1; d <= width; d *= 2) {
    auto g_next = g;
    auto p_next = p;
    for (std::size_t k = d; k <= width; ++k) {
      if (!p[k]) continue;  // already final
      g_next[k] = n.or2(g[k], n.and2(*p[k], g[k - d]));
      p_next[k] = p[k - d] ? std::optional<NodeRef>(n.and2(*p[k], *p[k - d])) : std::nullopt;
    }
    g = std::move(g_next);
    p = std::move(p_next);
  }
  Word sum;
  sum.bits.resize(width);
  for (std::size_t j = 0; j < width; ++j) sum.bits[width - 1 - j] = n.xor2(half[j], g[j]);
  return {g[width], sum};
}

}  // namespace sigma16forge

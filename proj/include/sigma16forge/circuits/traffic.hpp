#pragma once

// Traffic light controllers. Both hold in the first green state until the
// reset button is pressed; the cycle starts on the following clock.

#include <vector>

#include "sigma16forge/circuits/basic.hpp"

namespace sigma16forge {

struct TrafficLightV1 {
  Netlist netlist;
  NodeRef reset, green, amber, red;
};

/// Fixed sequence green, green, green, amber, red, red, red, red, amber.
/// Nine states; state 0 is the all-zero encoding of eight flip flops.
inline TrafficLightV1 traffic_light_v1() {
  TrafficLightV1 t;
  Netlist& n = t.netlist;
  t.reset = n.add_input("reset");
  const NodeRef running = n.dff();
  std::vector<NodeRef> s(9);
  for (int i = 1; i <= 8; ++i) s[static_cast<std::size_t>(i)] = n.dff();
  s[0] = n.inv(orw(n, Word(std::vector<NodeRef>(s.begin() + 1, s.end()))));

  const NodeRef advance = n.and2(running, n.inv(t.reset));
  n.connect_dff(running, n.or2(t.reset, running));
  for (std::size_t i = 1; i <= 8; ++i) n.connect_dff(s[i], n.and2(advance, s[i - 1]));

  t.green = n.or3(s[0], s[1], s[2]);
  t.amber = n.or2(s[3], s[8]);
  t.red = orw(n, Word({s[4], s[5], s[6], s[7]}));
  n.add_output("green", t.green);
  n.add_output("amber", t.amber);
  n.add_output("red", t.red);
  return t;
}

struct TrafficLightV2 {
  Netlist netlist;
  NodeRef reset, walk_request;
  NodeRef green, amber, red, walk, dont_walk;
  Word walk_count;  // 16 bits
};

/// Pedestrian crossing. Traffic stays green (at least three cycles) until a
/// walk request is pending; it then goes amber, red with walk lit for four
/// cycles, amber, and back to green. A request is registered on each press
/// of the button (rising edge) and counted in walk_count. Presses while the
/// crossing sequence is already under way are counted but do not queue
/// another crossing.
inline TrafficLightV2 traffic_light_v2() {
  TrafficLightV2 t;
  Netlist& n = t.netlist;
  t.reset = n.add_input("reset");
  t.walk_request = n.add_input("walk_request");

  const NodeRef running = n.dff();
  const NodeRef prev = n.dff(t.walk_request);
  const NodeRef pending = n.dff();
  // G0 is the all-zero encoding
  const NodeRef g1 = n.dff(), g2 = n.dff(), a1 = n.dff(), r1 = n.dff(), r2 = n.dff(), r3 = n.dff(), r4 = n.dff(),
                a2 = n.dff();
  const NodeRef g0 = n.inv(orw(n, Word({g1, g2, a1, r1, r2, r3, r4, a2})));

  const NodeRef nreset = n.inv(t.reset);
  const NodeRef advance = n.and2(running, nreset);
  const NodeRef press = n.and2(t.walk_request, n.inv(prev));
  t.green = n.or3(g0, g1, g2);
  const NodeRef request = n.or2(pending, n.and2(press, t.green));
  const NodeRef go = n.and2(g2, request);

  n.connect_dff(running, n.or2(t.reset, running));
  n.connect_dff(g1, n.and2(advance, g0));
  n.connect_dff(g2, n.and2(advance, n.or2(g1, n.and2(g2, n.inv(request)))));
  n.connect_dff(a1, n.and2(advance, go));
  n.connect_dff(r1, n.and2(advance, a1));
  n.connect_dff(r2, n.and2(advance, r1));
  n.connect_dff(r3, n.and2(advance, r2));
  n.connect_dff(r4, n.and2(advance, r3));
  n.connect_dff(a2, n.and2(advance, r4));
  n.connect_dff(pending, n.and3(nreset, running, n.and2(request, n.inv(go))));

  // counter
  Word count;
  for (int i = 0; i < 16; ++i) count.bits.push_back(n.dff());
  auto [carry, inc] = increment(n, press, count);
  (void)carry;
  const Word next = gatew(n, nreset, inc);
  for (std::size_t i = 0; i < 16; ++i) n.connect_dff(count[i], next[i]);
  t.walk_count = count;

  t.amber = n.or2(a1, a2);
  t.red = orw(n, Word({r1, r2, r3, r4}));
  t.walk = t.red;
  t.dont_walk = n.inv(t.walk);
  n.add_output("green", t.green);
  n.add_output("amber", t.amber);
  n.add_output("red", t.red);
  n.add_output("walk", t.walk);
  n.add_output("dont_walk", t.dont_walk);
  output_word(n, "walk_count", t.walk_count);
  return t;
}

}  // namespace sigma16forge

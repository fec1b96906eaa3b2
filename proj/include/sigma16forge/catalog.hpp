#pragma once

// Named circuits for the command line: build by name, export, simulate.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigma16forge/circuits/adders.hpp"
#include "sigma16forge/circuits/alu.hpp"
#include "sigma16forge/circuits/multipliers.hpp"
#include "sigma16forge/circuits/traffic.hpp"
#include "sigma16forge/m1.hpp"

namespace sigma16forge {

struct CatalogEntry {
  std::string name;
  std::string description;
  std::function<Netlist()> build;
};

inline const std::vector<CatalogEntry>& circuit_catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"mux1", "1-bit multiplexer", [] {
         Netlist n;
         const NodeRef c = n.add_input("c"), x = n.add_input("x"), y = n.add_input("y");
         n.add_output("out", mux1(n, c, x, y));
         return n;
       }},
      {"reg1", "1-bit register", [] {
         Netlist n;
         const NodeRef ld = n.add_input("ld"), x = n.add_input("x");
         n.add_output("s", reg1(n, ld, x));
         return n;
       }},
      {"toggle", "flip flop fed back through an inverter", [] {
         Netlist n;
         const NodeRef q = n.dff();
         n.connect_dff(q, n.inv(q));
         n.add_output("q", q);
         return n;
       }},
      {"traffic1", "traffic light, fixed cycle", [] { return traffic_light_v1().netlist; }},
      {"traffic2", "traffic light with walk request", [] { return traffic_light_v2().netlist; }},
      {"ripple8", "8-bit ripple-carry adder", [] {
         Netlist n;
         const NodeRef cin = n.add_input("cin");
         auto [c, s] = ripple_add(n, cin, bitslice(input_word(n, "x", 8), input_word(n, "y", 8)));
         n.add_output("cout", c);
         output_word(n, "s", s);
         return n;
       }},
      {"prefix16", "16-bit parallel-prefix adder", [] {
         Netlist n;
         const NodeRef cin = n.add_input("cin");
         auto [c, s] = prefix_add(n, cin, bitslice(input_word(n, "x", 16), input_word(n, "y", 16)));
         n.add_output("cout", c);
         output_word(n, "s", s);
         return n;
       }},
      {"alu8", "8-bit exercise ALU", [] {
         Netlist n;
         AluOp op{n.add_input("op1"), n.add_input("op0")};
         auto [ofl, r] = alu_exercise(n, op, bitslice(input_word(n, "x", 8), input_word(n, "y", 8)));
         n.add_output("ofl", ofl);
         output_word(n, "r", r);
         return n;
       }},
      {"vecmul8", "8-bit pipelined multiplier", [] { return make_pipelined_vecmul(8).netlist; }},
      {"seqmul8", "8-bit sequential multiplier", [] {
         Netlist n;
         const NodeRef start = n.add_input("start");
         auto m = seq_multiplier(n, 8, start, input_word(n, "x", 8), input_word(n, "y", 8));
         n.add_output("busy", m.busy);
         output_word(n, "prod", m.prod);
         return n;
       }},
      {"m1", "M1 processor", [] { return build_m1().netlist; }},
      {"m1-loadxi", "M1 processor with loadxi", [] { return build_m1({true, std::nullopt}).netlist; }},
  };
  return entries;
}

inline const CatalogEntry* find_circuit(std::string_view name) {
  for (const auto& e : circuit_catalog())
    if (e.name == name) return &e;
  return nullptr;
}

/// Default stimulus: `reset` high in cycle 0, every other input 0.
inline NamedStreams default_stimulus(const Netlist& n) {
  NamedStreams s;
  for (const auto& [name, _] : n.inputs()) s[name] = name == "reset" ? BitStream{1} : BitStream{};
  return s;
}

}  // namespace sigma16forge

#pragma once

// Runs one program on the emulator and on the M1 circuit and compares final
// registers, final memory, and the executed-instruction sequences.

#include <optional>
#include <string>
#include <vector>

#include "sigma16forge/emulator.hpp"
#include "sigma16forge/m1.hpp"
#include "sigma16forge/testbench.hpp"

namespace sigma16forge {

enum class M1Variant { Auto, Base, Loadxi };

struct VerifyOptions {
  std::uint64_t max_steps = 100000;       // emulator instruction budget
  std::optional<std::uint64_t> max_cycles;  // M1 budget; default 8 per instruction + 16
  M1Variant variant = M1Variant::Auto;
  std::optional<std::pair<std::string, std::uint8_t>> alu_fault;
};

struct VerifyReport {
  bool ok = false;
  bool refused = false;
  std::string message;
  std::uint64_t steps = 0;
  std::uint64_t cycles = 0;
  bool loadxi = false;
  std::vector<InstructionEvent> emulator_events, m1_events;
};

/// (address, instruction, ea) of each instruction the emulator executed.
inline std::vector<InstructionEvent> executed_events(const std::vector<TraceEvent>& trace) {
  std::vector<InstructionEvent> out;
  for (const auto& e : trace) {
    if (e.kind == EventKind::Executed) out.push_back({e.address, e.instr, e.ea, false, 0});
    if (e.kind == EventKind::Jumped && !out.empty()) out.back().jumped = true;
  }
  return out;
}

inline std::string describe(const InstructionEvent& e) {
  std::string s = hex4(e.address) + " " + to_string(e.instr);
  if (e.ea) s += " ea=" + hex4(*e.ea);
  return s;
}

inline VerifyReport verify(const ObjectImage& img, const VerifyOptions& opt = {}) {
  VerifyReport rep;
  Emulator emu(img);
  const RunResult run = emu.run(opt.max_steps);
  rep.steps = run.steps;
  if (run.status != RunStatus::Halted) {
    rep.message = "emulator did not halt within " + std::to_string(opt.max_steps) + " instructions";
    return rep;
  }
  rep.emulator_events = executed_events(run.events);
  bool uses_loadxi = false;
  for (const auto& e : rep.emulator_events) {
    if (e.instr.mnemonic == "mul" || e.instr.mnemonic == "div") {
      rep.refused = true;
      rep.message = "program executes " + e.instr.mnemonic + " at " + hex4(e.address) +
                    "; M1 has no " + e.instr.mnemonic + " datapath (it runs as a no-op), so the two levels differ by design";
      return rep;
    }
    uses_loadxi = uses_loadxi || e.instr.mnemonic == "loadxi";
  }
  rep.loadxi = opt.variant == M1Variant::Loadxi || (opt.variant == M1Variant::Auto && uses_loadxi);

  M1Machine m1(M1Options{rep.loadxi, opt.alu_fault});
  DriverScript quiet = m1_driver_script(m1.circuit().algorithm);
  quiet.report_instructions = false;
  Driver watcher(m1.circuit().algorithm, quiet);
  const std::uint64_t budget = opt.max_cycles.value_or(8 * run.steps + 16);
  const M1Run m = run_program(m1, img, budget, [&](const CycleRecord& r) { watcher.watch(r); });
  rep.cycles = m.cycles;
  rep.m1_events = watcher.events();

  const auto& ee = rep.emulator_events;
  const auto& me = rep.m1_events;
  for (std::size_t i = 0; i < std::min(ee.size(), me.size()); ++i) {
    if (!(ee[i] == me[i])) {
      rep.message = "instruction " + std::to_string(i) + " differs: emulator " + describe(ee[i]) + ", M1 " + describe(me[i]);
      return rep;
    }
  }
  if (m.status != M1Status::Halted) {
    rep.message = "M1 did not halt within " + std::to_string(budget) + " cycles (" + std::to_string(me.size()) +
                  " instructions retired)";
    return rep;
  }
  if (ee.size() != me.size()) {
    rep.message = "instruction counts differ: emulator " + std::to_string(ee.size()) + ", M1 " + std::to_string(me.size());
    return rep;
  }
  for (unsigned r = 0; r < 16; ++r) {
    if (emu.reg(r) != m.view.regs[r]) {
      rep.message = "final R" + std::to_string(r) + " differs: emulator " + hex4(emu.reg(r)) + ", M1 " + hex4(m.view.regs[r]);
      return rep;
    }
  }
  for (std::size_t a = 0; a < kMemoryWords; ++a) {
    if (emu.state().mem[a] != m.view.mem[a]) {
      rep.message = "final mem[" + hex4(static_cast<Word16>(a)) + "] differs: emulator " + hex4(emu.state().mem[a]) +
                    ", M1 " + hex4(m.view.mem[a]);
      return rep;
    }
  }
  rep.ok = true;
  rep.message = "equivalent: " + std::to_string(ee.size()) + " instructions, " + std::to_string(m.cycles) + " M1 cycles";
  return rep;
}

}  // namespace sigma16forge

#pragma once

// Instruction-level Sigma16 interpreter. Each step fetches, executes and
// reports what happened as a list of events.

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigma16forge/assembler.hpp"
#include "sigma16forge/isa.hpp"

namespace sigma16forge {

class EmulatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMemoryWords = 65536;

struct MachineState {
  Word16 pc = 0, ir = 0, adr = 0;
  std::array<Word16, 16> regs{};
  std::vector<Word16> mem = std::vector<Word16>(kMemoryWords, 0);
  bool halted = false;
  std::uint64_t step_count = 0;
};

struct RegWrite {
  unsigned reg;
  Word16 old_value, new_value;
  friend bool operator==(const RegWrite&, const RegWrite&) = default;
};

struct MemWrite {
  Word16 address, old_value, new_value;
  friend bool operator==(const MemWrite&, const MemWrite&) = default;
};

enum class EventKind { Fetched, Executed, Jumped, Trapped, Halted, Warning };

struct TraceEvent {
  EventKind kind = EventKind::Executed;
  Instruction instr;
  Word16 address = 0;  // address of the instruction
  std::optional<Word16> ea;
  Word16 pc_before = 0, pc_after = 0;
  std::vector<RegWrite> reg_writes;
  std::vector<MemWrite> mem_writes;
  std::string message;
};

enum class RunStatus { Halted, BudgetExhausted, Breakpoint };

struct RunResult {
  RunStatus status = RunStatus::Halted;
  std::uint64_t steps = 0;
  std::vector<TraceEvent> events;
};

class Emulator {
 public:
  Emulator() = default;
  explicit Emulator(const ObjectImage& obj) { load(obj); }

  /// Clears the machine and loads the image; returns warnings for addresses
  /// written more than once (the later record wins).
  std::vector<std::string> load(const ObjectImage& obj, Word16 origin = 0) {
    s_ = MachineState{};
    s_.pc = origin;
    std::vector<std::string> warnings;
    std::vector<bool> seen(kMemoryWords, false);
    for (const auto& [a, w] : obj.records) {
      if (seen[a]) warnings.push_back("address " + hex4(a) + " loaded more than once");
      seen[a] = true;
      s_.mem[a] = w;
    }
    return warnings;
  }

  [[nodiscard]] const MachineState& state() const { return s_; }
  MachineState& state() { return s_; }
  [[nodiscard]] Word16 reg(unsigned r) const { return s_.regs.at(r); }
  [[nodiscard]] Word16 mem(Word16 a) const { return s_.mem[a]; }
  [[nodiscard]] bool halted() const { return s_.halted; }

  std::vector<TraceEvent> step() {
    if (s_.halted) throw EmulatorError("step(): the machine has halted");
    std::vector<TraceEvent> events;
    const Word16 at = s_.pc;
    const Word16 w0 = s_.mem[at];
    s_.ir = w0;
    s_.pc = static_cast<Word16>(at + 1);

    const bool rx = (w0 >> 12) == kOpRX && !rx_mnemonic(w0 & 0xf).empty();
    Instruction ins;
    if (rx) {
      const Word16 disp = s_.mem[s_.pc];
      s_.pc = static_cast<Word16>(s_.pc + 1);
      s_.adr = disp;
      ins = decode(w0, disp);
    } else {
      ins = decode(w0);
    }

    TraceEvent fetched{EventKind::Fetched, ins, at, std::nullopt, at, s_.pc, {}, {}, {}};
    events.push_back(fetched);

    TraceEvent ex{EventKind::Executed, ins, at, std::nullopt, at, s_.pc, {}, {}, {}};
    auto write_reg = [&](unsigned r, Word16 v) {
      if (r == 0) return;
      ex.reg_writes.push_back({r, s_.regs[r], v});
      s_.regs[r] = v;
    };
    auto sgn = [](Word16 v) { return static_cast<std::int16_t>(v); };
    const Word16 a = s_.regs[ins.sa], b = s_.regs[ins.sb];
    std::optional<TraceEvent> extra;

    if (!ins.known()) {
      extra = TraceEvent{EventKind::Warning, ins, at, std::nullopt, at, s_.pc, {}, {},
                         "undefined instruction " + hex4(w0) + " treated as no operation"};
    } else if (ins.format == Format::RRR) {
      const auto& m = ins.mnemonic;
      if (m == "add") {
        write_reg(ins.d, static_cast<Word16>(a + b));
      } else if (m == "sub") {
        write_reg(ins.d, static_cast<Word16>(a - b));
      } else if (m == "mul") {
        write_reg(ins.d, static_cast<Word16>(static_cast<std::int32_t>(sgn(a)) * sgn(b)));
      } else if (m == "div") {
        if (b == 0)
          extra = TraceEvent{EventKind::Warning, ins, at, std::nullopt, at, s_.pc, {}, {},
                             "division by zero; R" + std::to_string(ins.d) + " unchanged"};
        else
          write_reg(ins.d, static_cast<Word16>(static_cast<std::int32_t>(sgn(a)) / sgn(b)));
      } else if (m == "cmplt") {
        write_reg(ins.d, sgn(a) < sgn(b) ? 1 : 0);
      } else if (m == "cmpeq") {
        write_reg(ins.d, a == b ? 1 : 0);
      } else if (m == "cmpgt") {
        write_reg(ins.d, sgn(a) > sgn(b) ? 1 : 0);
      } else if (m == "trap") {
        s_.halted = true;
        extra = TraceEvent{EventKind::Trapped, ins, at, std::nullopt, at, s_.pc, {}, {},
                           "trap R" + std::to_string(ins.d) + "=" + hex4(s_.regs[ins.d]) + " R" + std::to_string(ins.sa) +
                               "=" + hex4(a) + " R" + std::to_string(ins.sb) + "=" + hex4(b)};
      }
    } else {
      const Word16 ea = static_cast<Word16>(*ins.disp + a);
      ex.ea = ea;
      const auto& m = ins.mnemonic;
      const Word16 rd = s_.regs[ins.d];
      bool jump = false;
      if (m == "lea") {
        write_reg(ins.d, ea);
      } else if (m == "load") {
        write_reg(ins.d, s_.mem[ea]);
      } else if (m == "store") {
        ex.mem_writes.push_back({ea, s_.mem[ea], rd});
        s_.mem[ea] = rd;
      } else if (m == "jump") {
        jump = true;
      } else if (m == "jumpf") {
        jump = rd == 0;
      } else if (m == "jumpt") {
        jump = rd != 0;
      } else if (m == "jal") {
        write_reg(ins.d, s_.pc);
        jump = true;
      } else if (m == "loadxi") {
        write_reg(ins.d, s_.mem[ea]);
        write_reg(ins.sa, static_cast<Word16>(a + 1));
      }
      if (jump) {
        s_.pc = ea;
        extra = TraceEvent{EventKind::Jumped, ins, at, ea, at, ea, {}, {}, {}};
      }
    }
    ex.pc_after = s_.pc;
    ++s_.step_count;
    events.push_back(std::move(ex));
    if (extra) events.push_back(std::move(*extra));
    if (s_.halted) events.push_back(TraceEvent{EventKind::Halted, ins, at, std::nullopt, at, s_.pc, {}, {}, {}});
    return events;
  }

  /// Steps until halt or `max_steps` instructions. With breakpoints, stops
  /// before executing an instruction at a breakpoint address (not counting
  /// the very first instruction).
  RunResult run(std::uint64_t max_steps, const std::vector<Word16>& breakpoints = {}) {
    if (max_steps == 0) throw EmulatorError("run(): max_steps must be positive");
    RunResult r;
    while (!s_.halted) {
      if (r.steps > 0 && std::find(breakpoints.begin(), breakpoints.end(), s_.pc) != breakpoints.end()) {
        r.status = RunStatus::Breakpoint;
        return r;
      }
      if (r.steps == max_steps) {
        r.status = RunStatus::BudgetExhausted;
        return r;
      }
      auto ev = step();
      r.events.insert(r.events.end(), std::make_move_iterator(ev.begin()), std::make_move_iterator(ev.end()));
      ++r.steps;
    }
    r.status = RunStatus::Halted;
    return r;
  }

 private:
  MachineState s_;
};

/// Machine-readable trace line(s) for one event; Fetched events produce none.
///   EXEC <addr> <mnemonic> <operands> <ea|->
///   REG  R<n> <old> <new>
///   MEM  <addr> <old> <new>
///   JUMP <addr> <target>
///   TRAP <addr> <detail>
///   HALT <pc>
///   WARN <addr> <message>
inline std::string trace_lines(const TraceEvent& e) {
  std::string out;
  switch (e.kind) {
    case EventKind::Fetched:
      break;
    case EventKind::Executed:
      out += "EXEC\t" + hex4(e.address) + "\t" + (e.instr.known() ? e.instr.mnemonic : "data") + "\t" +
             operands_text(e.instr) + "\t" + (e.ea ? hex4(*e.ea) : "-") + "\n";
      for (const auto& w : e.reg_writes)
        out += "REG\tR" + std::to_string(w.reg) + "\t" + hex4(w.old_value) + "\t" + hex4(w.new_value) + "\n";
      for (const auto& w : e.mem_writes)
        out += "MEM\t" + hex4(w.address) + "\t" + hex4(w.old_value) + "\t" + hex4(w.new_value) + "\n";
      break;
    case EventKind::Jumped:
      out += "JUMP\t" + hex4(e.address) + "\t" + hex4(e.ea.value_or(0)) + "\n";
      break;
    case EventKind::Trapped:
      out += "TRAP\t" + hex4(e.address) + "\t" + e.message + "\n";
      break;
    case EventKind::Halted:
      out += "HALT\t" + hex4(e.pc_after) + "\n";
      break;
    case EventKind::Warning:
      out += "WARN\t" + hex4(e.address) + "\t" + e.message + "\n";
      break;
  }
  return out;
}

}  // namespace sigma16forge

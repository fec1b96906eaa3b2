#pragma once

// Simulation driver for M1: renders each clock cycle as a text block and
// follows the control state to report executed instructions.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sigma16forge/control.hpp"
#include "sigma16forge/isa.hpp"
#include "sigma16forge/m1.hpp"

namespace sigma16forge {

/// One formatting group of a cycle block.
struct DriverSection {
  enum class Kind {
    Inputs,   // reset dma dma_a dma_d, then ctl_start
    Bits,     // name = 0/1 grid, names right-aligned
    Signals,  // name = 0/1 grid, names left-aligned
    Words,    // rows of name = hex4 (names in `one_bit` print a single digit)
    Memory,   // ctl_sto m_sto / m_addr m_real_addr m_data m_out
  };
  Kind kind = Kind::Bits;
  std::string title;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> one_bit;
};

struct DriverScript {
  std::vector<DriverSection> sections;
  bool report_instructions = true;  // watchers for fetch, effective address, jumps, retirement

  [[nodiscard]] std::vector<std::string> names() const {
    std::vector<std::string> v;
    for (const auto& s : sections)
      for (const auto& r : s.rows) v.insert(v.end(), r.begin(), r.end());
    return v;
  }
};

namespace detail {
inline std::vector<std::vector<std::string>> chunk(const std::vector<std::string>& names, std::size_t per_row) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < names.size(); i += per_row)
    rows.emplace_back(names.begin() + static_cast<std::ptrdiff_t>(i),
                      names.begin() + static_cast<std::ptrdiff_t>(std::min(names.size(), i + per_row)));
  return rows;
}
inline std::string rjust(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }
inline std::string ljust(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }
}  // namespace detail

inline DriverScript m1_driver_script(const ControlAlgorithm& alg) {
  DriverScript s;
  std::vector<std::string> states;
  for (const auto& st : alg.states) states.push_back(st.name);
  s.sections.push_back({DriverSection::Kind::Inputs, "Computer system inputs",
                        {{"reset", "dma", "dma_a", "dma_d"}, {"ctl_start"}}, {}});
  s.sections.push_back({DriverSection::Kind::Bits, "Control state", detail::chunk(states, 4), {}});
  s.sections.push_back({DriverSection::Kind::Signals, "Control signals", detail::chunk(alg.signals, 4), {}});
  s.sections.push_back({DriverSection::Kind::Words, "Datapath",
                        {{"ir", "pc", "ad", "a", "b", "r"}, {"x", "y", "p", "ma", "md", "cnd"}}, {"cnd"}});
  s.sections.push_back({DriverSection::Kind::Memory, "Memory", {{"ctl_sto", "m_sto"}, {"m_addr", "m_data", "m_out"}}, {}});
  return s;
}

inline std::string format_cycle(const CycleRecord& rec, const DriverScript& script) {
  using detail::ljust;
  using detail::rjust;
  std::string out = "Clock cycle " + std::to_string(rec.cycle) + "\n";
  auto bit = [&](const std::string& n) { return std::to_string(rec.at(n) ? 1 : 0); };
  bool first = true;
  for (const auto& sec : script.sections) {
    if (!first) out += "\n";
    first = false;
    out += sec.title + "\n";
    switch (sec.kind) {
      case DriverSection::Kind::Inputs: {
        if (!sec.rows.empty()) {
          std::string line = "        ";
          for (const auto& n : sec.rows[0]) {
            const bool word = n == "dma_a" || n == "dma_d";
            line += " " + n + "=" + (word ? hex4(rec.at(n)) : bit(n));
          }
          out += line + "\n";
        }
        for (std::size_t r = 1; r < sec.rows.size(); ++r)
          for (const auto& n : sec.rows[r]) out += n + " = " + bit(n) + "\n";
        break;
      }
      case DriverSection::Kind::Bits:
        for (const auto& row : sec.rows) {
          std::string line = "   ";
          for (std::size_t i = 0; i < row.size(); ++i) line += rjust(row[i], i == 0 ? 12 : 13) + " = " + bit(row[i]);
          out += line + "\n";
        }
        break;
      case DriverSection::Kind::Signals:
        for (const auto& row : sec.rows) {
          std::string line = "  ";
          for (const auto& n : row) line += " " + ljust(n, 10) + " = " + bit(n);
          out += line + "\n";
        }
        break;
      case DriverSection::Kind::Words:
        for (const auto& row : sec.rows) {
          std::string line = "  ";
          for (const auto& n : row) {
            const bool one = std::find(sec.one_bit.begin(), sec.one_bit.end(), n) != sec.one_bit.end();
            line += rjust(n, 4) + " = " + (one ? bit(n) : hex4(rec.at(n)));
          }
          out += line + "\n";
        }
        break;
      case DriverSection::Kind::Memory: {
        out += "   ctl_sto = " + bit("ctl_sto") + "      m_sto = " + bit("m_sto") + "\n";
        const Word16 a = rec.at("m_addr");
        out += "     m_addr = " + hex4(a) + "  m_real_addr = " + hex(a & 0xff, 2) + "  m_data = " + hex4(rec.at("m_data")) +
               "  m_out =" + hex4(rec.at("m_out")) + "\n";
        break;
      }
    }
  }
  return out;
}

/// Recovers the tap values printed in a block made by format_cycle.
inline CycleRecord parse_cycle_block(const std::string& block) {
  CycleRecord rec;
  std::istringstream in(block);
  std::string line;
  bool in_states = false;
  while (std::getline(in, line)) {
    if (line.rfind("Clock cycle ", 0) == 0) {
      rec.cycle = std::stoull(line.substr(12));
      continue;
    }
    if (line == "Control state") {
      in_states = true;
      continue;
    }
    if (!line.empty() && line[0] != ' ' && line.find('=') == std::string::npos) {
      in_states = false;
      continue;
    }
    // tokens: name = value | name=value | name =value
    std::string norm;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '=') {
        while (!norm.empty() && norm.back() == ' ') norm.pop_back();
        norm += " = ";
        while (i + 1 < line.size() && line[i + 1] == ' ') ++i;
      } else {
        norm += line[i];
      }
    }
    std::istringstream ts(norm);
    std::string name, eq, value;
    while (ts >> name >> eq >> value) {
      if (eq != "=") throw NetlistError("malformed cycle block line: " + line);
      const auto v = parse_hex(value);
      if (!v) throw NetlistError("malformed value in cycle block: " + value);
      if (name == "m_real_addr") continue;
      rec.taps[name] = static_cast<std::uint16_t>(*v);
      if (in_states) rec.state_names.push_back(name);
    }
  }
  return rec;
}

/// An instruction as observed on the circuit.
struct InstructionEvent {
  Word16 address = 0;
  Instruction instr;
  std::optional<Word16> ea;
  bool jumped = false;
  std::uint64_t cycle = 0;  // retirement cycle

  friend bool operator==(const InstructionEvent& a, const InstructionEvent& b) {
    return a.address == b.address && a.instr == b.instr && a.ea == b.ea;
  }
};

/// Follows an M1 run cycle by cycle. Fields of the current instruction are
/// latched as they appear; it retires in the cycle whose successor state
/// is the fetch state, or on entering st_trap0.
class Driver {
 public:
  explicit Driver(ControlAlgorithm alg, std::optional<DriverScript> script = std::nullopt)
      : alg_(std::move(alg)), script_(script ? std::move(*script) : m1_driver_script(alg_)) {}

  [[nodiscard]] const DriverScript& script() const { return script_; }
  [[nodiscard]] const std::vector<InstructionEvent>& events() const { return events_; }

  std::vector<std::string> watch(const CycleRecord& rec) {
    std::vector<std::string> msgs;
    const auto state = rec.state();
    if (!state) {
      prev_disp_fetch_ = false;
      return msgs;
    }
    const bool disp_fetch = rec.bit("ctl_ma_pc") && rec.bit("ctl_ad_ld");
    if (*state == alg_.initial) {
      cur_ = InstructionEvent{};
      cur_.address = rec.at("pc");
      disp_.reset();
    } else {
      if (prev_disp_fetch_ && !disp_) {
        disp_ = rec.at("ad");
        if (script_.report_instructions) msgs.push_back("Fetched displacement = " + hex4(*disp_));
      }
      const Word16 ir = rec.at("ir");
      const bool rx = (ir >> 12) == kOpRX && !rx_mnemonic(ir & 0xf).empty();
      if (rec.bit("ctl_y_ad") && !cur_.ea) cur_.ea = rec.at("r");
      const std::string mn = rx ? std::string(rx_mnemonic(ir & 0xf)) : "";
      if (rec.bit("ctl_y_ad") && is_jump(mn)) {
        if (rec.bit("ctl_pc_ld")) {
          cur_.jumped = true;
          jump_target_ = rec.at("r");
          if (script_.report_instructions) msgs.push_back(mn + " instruction jumped");
        } else if (script_.report_instructions) {
          msgs.push_back(mn + " instruction did not jump");
        }
      }
      const std::string next = next_state(alg_, *state, {{"ir_op", ir >> 12}, {"ir_sb", ir & 0xf}}, {{"cnd", rec.bit("cnd")}});
      const bool trap_entry = *state == "st_trap0" && !in_trap_;
      if ((next == alg_.initial && *state != "st_trap0") || trap_entry) {
        cur_.instr = rx && disp_ ? decode(ir, *disp_) : (rx ? unknown_instruction(ir) : decode(ir));
        if (!rx || !disp_) cur_.ea.reset();
        cur_.cycle = rec.cycle;
        events_.push_back(cur_);
        if (script_.report_instructions) {
          const std::string stars(72, '*');
          msgs.push_back(stars);
          std::string line = "Executed instruction:  " + detail::ljust(cur_.instr.known() ? cur_.instr.mnemonic : "data", 6) +
                             " " + operands_text(cur_.instr, false);
          if (cur_.ea) line += "   effective address = " + hex4(*cur_.ea);
          msgs.push_back(line);
          if (cur_.jumped) msgs.push_back("jumped to " + hex4(jump_target_) + " in cycle " + std::to_string(rec.cycle));
          if (trap_entry) msgs.push_back("halted in cycle " + std::to_string(rec.cycle));
          msgs.push_back("Processor state:    pc = " + hex4(rec.at("pc")) + "  ir = " + hex4(ir) + "  ad = " + hex4(rec.at("ad")));
          msgs.push_back(stars);
        }
      }
      in_trap_ = *state == "st_trap0";
    }
    prev_disp_fetch_ = disp_fetch;
    return msgs;
  }

  /// Cycle block followed by this cycle's messages.
  std::string render(const CycleRecord& rec) {
    std::string out = format_cycle(rec, script_);
    const auto msgs = watch(rec);
    if (!msgs.empty()) {
      out += "\n";
      for (const auto& m : msgs) out += m + "\n";
    }
    return out;
  }

 private:
  ControlAlgorithm alg_;
  DriverScript script_;
  std::vector<InstructionEvent> events_;
  InstructionEvent cur_;
  std::optional<Word16> disp_;
  Word16 jump_target_ = 0;
  bool prev_disp_fetch_ = false;
  bool in_trap_ = false;
};

}  // namespace sigma16forge

#pragma once

// Sigma16 instruction set: formats, opcode tables, encode/decode and
// disassembly.
//
// Word 0 holds four nibbles [op d sa sb], most significant first. op = f
// selects the RX format, whose secondary opcode lives in sb and whose
// displacement is the following word.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sigma16forge/util/hex.hpp"

namespace sigma16forge {

using Word16 = std::uint16_t;

class IsaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { RRR, RX, Unknown };

struct OpcodeEntry {
  std::uint8_t code;
  std::string_view mnemonic;
};

inline constexpr std::uint8_t kOpXX = 0xe;
inline constexpr std::uint8_t kOpRX = 0xf;

inline constexpr std::array<OpcodeEntry, 8> kRrrOpcodes = {{{0x0, "add"},
                                                            {0x1, "sub"},
                                                            {0x2, "mul"},
                                                            {0x3, "div"},
                                                            {0x4, "cmplt"},
                                                            {0x5, "cmpeq"},
                                                            {0x6, "cmpgt"},
                                                            {0xd, "trap"}}};

inline constexpr std::array<OpcodeEntry, 8> kRxOpcodes = {{{0x0, "lea"},
                                                           {0x1, "load"},
                                                           {0x2, "store"},
                                                           {0x3, "jump"},
                                                           {0x4, "jumpf"},
                                                           {0x5, "jumpt"},
                                                           {0x6, "jal"},
                                                           {0x7, "loadxi"}}};

namespace detail {
template <std::size_t N>
constexpr std::optional<std::uint8_t> code_of(const std::array<OpcodeEntry, N>& t, std::string_view m) {
  for (const auto& e : t)
    if (e.mnemonic == m) return e.code;
  return std::nullopt;
}
template <std::size_t N>
constexpr std::string_view mnemonic_of(const std::array<OpcodeEntry, N>& t, std::uint8_t code) {
  for (const auto& e : t)
    if (e.code == code) return e.mnemonic;
  return {};
}
}  // namespace detail

inline std::optional<std::uint8_t> rrr_code(std::string_view m) { return detail::code_of(kRrrOpcodes, m); }
inline std::optional<std::uint8_t> rx_code(std::string_view m) { return detail::code_of(kRxOpcodes, m); }
inline std::string_view rrr_mnemonic(std::uint8_t op) { return detail::mnemonic_of(kRrrOpcodes, op); }
inline std::string_view rx_mnemonic(std::uint8_t sb) { return detail::mnemonic_of(kRxOpcodes, sb); }

inline bool is_jump(std::string_view mnemonic) {
  return mnemonic == "jump" || mnemonic == "jumpf" || mnemonic == "jumpt" || mnemonic == "jal";
}

inline std::optional<Format> format_of(std::string_view mnemonic) {
  if (rrr_code(mnemonic)) return Format::RRR;
  if (rx_code(mnemonic)) return Format::RX;
  return std::nullopt;
}

/// A decoded instruction. RRR uses d, sa, sb; RX uses d, sa and disp (sb is
/// the secondary opcode). Unknown keeps the raw first word and occupies one
/// word, so an undefined RX code does not consume a displacement.
struct Instruction {
  Format format = Format::Unknown;
  std::string mnemonic;
  std::uint8_t d = 0, sa = 0, sb = 0;
  std::optional<Word16> disp;
  Word16 raw = 0;

  [[nodiscard]] std::size_t size() const { return format == Format::RX ? 2 : 1; }
  [[nodiscard]] bool known() const { return format != Format::Unknown; }
  [[nodiscard]] std::uint8_t opcode() const { return static_cast<std::uint8_t>(raw >> 12); }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// A word that is not an instruction, rendered as data.
inline Instruction unknown_instruction(Word16 w) {
  Instruction i;
  i.raw = w;
  i.d = (w >> 8) & 0xf;
  i.sa = (w >> 4) & 0xf;
  i.sb = w & 0xf;
  return i;
}

inline Instruction make_rrr(std::string_view mnemonic, unsigned d, unsigned a, unsigned b) {
  const auto op = rrr_code(mnemonic);
  if (!op) throw IsaError("not an RRR mnemonic: " + std::string(mnemonic));
  if (d > 15 || a > 15 || b > 15) throw IsaError("register number out of range");
  Instruction i;
  i.format = Format::RRR;
  i.mnemonic = std::string(mnemonic);
  i.d = static_cast<std::uint8_t>(d);
  i.sa = static_cast<std::uint8_t>(a);
  i.sb = static_cast<std::uint8_t>(b);
  i.raw = static_cast<Word16>(*op << 12 | d << 8 | a << 4 | b);
  return i;
}

inline Instruction make_rx(std::string_view mnemonic, unsigned d, Word16 disp, unsigned a) {
  const auto sb = rx_code(mnemonic);
  if (!sb) throw IsaError("not an RX mnemonic: " + std::string(mnemonic));
  if (d > 15 || a > 15) throw IsaError("register number out of range");
  Instruction i;
  i.format = Format::RX;
  i.mnemonic = std::string(mnemonic);
  i.d = static_cast<std::uint8_t>(d);
  i.sa = static_cast<std::uint8_t>(a);
  i.sb = *sb;
  i.disp = disp;
  i.raw = static_cast<Word16>(kOpRX << 12 | d << 8 | a << 4 | *sb);
  return i;
}

inline std::vector<Word16> encode(const Instruction& instr) {
  if (instr.d > 15 || instr.sa > 15 || instr.sb > 15) throw IsaError("instruction field out of range");
  switch (instr.format) {
    case Format::RRR: {
      const auto op = rrr_code(instr.mnemonic);
      if (!op) throw IsaError("not an RRR mnemonic: " + instr.mnemonic);
      if (instr.disp) throw IsaError("RRR instruction has no displacement");
      return {static_cast<Word16>(*op << 12 | instr.d << 8 | instr.sa << 4 | instr.sb)};
    }
    case Format::RX: {
      const auto sb = rx_code(instr.mnemonic);
      if (!sb) throw IsaError("not an RX mnemonic: " + instr.mnemonic);
      if (!instr.disp) throw IsaError("RX instruction needs a displacement");
      return {static_cast<Word16>(kOpRX << 12 | instr.d << 8 | instr.sa << 4 | *sb), *instr.disp};
    }
    case Format::Unknown:
      return {instr.raw};
  }
  return {};
}

/// RX words need `word1`. An unknown opcode decodes to Format::Unknown.
inline Instruction decode(Word16 word0, std::optional<Word16> word1 = std::nullopt) {
  Instruction i;
  i.raw = word0;
  const auto op = static_cast<std::uint8_t>(word0 >> 12);
  i.d = (word0 >> 8) & 0xf;
  i.sa = (word0 >> 4) & 0xf;
  i.sb = word0 & 0xf;
  if (op == kOpRX) {
    const auto m = rx_mnemonic(i.sb);
    if (m.empty()) return i;
    if (!word1) throw IsaError("RX instruction " + hex4(word0) + " is missing its displacement word");
    i.format = Format::RX;
    i.mnemonic = std::string(m);
    i.disp = *word1;
    return i;
  }
  const auto m = rrr_mnemonic(op);
  if (m.empty()) return i;  // includes the reserved XX escape
  i.format = Format::RRR;
  i.mnemonic = std::string(m);
  return i;
}

/// Operand text: "R1,R2,R3" or "R6,$0011[R0]"; `dollar` = false drops the
/// hex marker as the simulation driver prints it.
inline std::string operands_text(const Instruction& i, bool dollar = true) {
  auto reg = [](unsigned r) { return "R" + std::to_string(r); };
  switch (i.format) {
    case Format::RRR:
      return reg(i.d) + "," + reg(i.sa) + "," + reg(i.sb);
    case Format::RX:
      return reg(i.d) + "," + (dollar ? "$" : "") + hex4(i.disp.value_or(0)) + "[" + reg(i.sa) + "]";
    case Format::Unknown:
      return (dollar ? "$" : "") + hex4(i.raw);
  }
  return {};
}

/// Assembler-compatible text of one instruction.
inline std::string to_string(const Instruction& i) {
  if (!i.known()) return "data " + operands_text(i);
  return i.mnemonic + " " + operands_text(i);
}

struct DisasmLine {
  Word16 address = 0;
  std::vector<Word16> words;
  std::string text;
};

/// Decodes a word sequence placed at `start`. Undefined words, and an RX
/// first word with no following word, come out as data.
inline std::vector<DisasmLine> disassemble(std::span<const Word16> words, Word16 start = 0) {
  std::vector<DisasmLine> out;
  std::size_t k = 0;
  while (k < words.size()) {
    DisasmLine line;
    line.address = static_cast<Word16>(start + k);
    const Word16 w0 = words[k];
    const bool truncated = (w0 >> 12) == kOpRX && k + 1 >= words.size();
    const Instruction ins = truncated ? unknown_instruction(w0) : decode(w0, k + 1 < words.size() ? std::optional<Word16>(words[k + 1]) : std::nullopt);
    for (std::size_t j = 0; j < ins.size(); ++j) line.words.push_back(words[k + j]);
    line.text = to_string(ins);
    k += ins.size();
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace sigma16forge

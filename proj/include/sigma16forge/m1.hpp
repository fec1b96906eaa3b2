#pragma once

// M1: a gate-level Sigma16 processor. Datapath of registers, register file,
// ALU and multiplexers; one-hot control generated from m1_control_algorithm();
// memory as a single behavioural port; DMA inputs to load a program.

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigma16forge/assembler.hpp"
#include "sigma16forge/circuits/alu.hpp"
#include "sigma16forge/circuits/regfile.hpp"
#include "sigma16forge/control.hpp"
#include "sigma16forge/simulator.hpp"

namespace sigma16forge {

inline const std::vector<std::string>& m1_signal_roster() {
  static const std::vector<std::string> roster = {
      "ctl_alu_a", "ctl_alu_b", "ctl_alu_c",  "ctl_alu_d", "ctl_rf_ld", "ctl_rf_pc", "ctl_rf_alu", "ctl_rf_sd",
      "ctl_ir_ld", "ctl_pc_ld", "ctl_ad_ld",  "ctl_ad_alu", "ctl_ma_pc", "ctl_x_pc", "ctl_y_ad",  "ctl_sto"};
  return roster;
}

/// With the loadxi extension: register-file destination is sa and its input is ad.
inline constexpr std::string_view kLoadxiDestSignal = "ctl_rf_ds";

inline const std::vector<std::string>& m1_datapath_taps() {
  static const std::vector<std::string> taps = {"ir", "pc", "ad", "a", "b", "r", "x", "y", "p", "ma", "md"};
  return taps;
}

struct M1Options {
  bool loadxi = false;  // add st_loadxi0..3 and ctl_rf_ds
  /// Replace the ALU function asserted in one state (fault injection).
  std::optional<std::pair<std::string, std::uint8_t>> alu_fault;
};

namespace detail {

inline std::vector<Assertion> asserts(std::initializer_list<const char*> names) {
  std::vector<Assertion> v;
  for (const char* s : names) v.push_back({s, "", true});
  return v;
}

inline void set_alu_code(ControlState& s, std::uint8_t abcd) {
  std::erase_if(s.assertions, [](const Assertion& a) { return a.signal.rfind("ctl_alu_", 0) == 0; });
  static constexpr const char* kBits[] = {"ctl_alu_a", "ctl_alu_b", "ctl_alu_c", "ctl_alu_d"};
  for (int i = 0; i < 4; ++i)
    if ((abcd >> (3 - i)) & 1) s.assertions.push_back({kBits[i], "", true});
}

}  // namespace detail

/// The M1 control algorithm: 25 states, plus four for loadxi when enabled.
inline ControlAlgorithm m1_control_algorithm(const M1Options& opt = {}) {
  using detail::asserts;
  ControlAlgorithm alg;
  alg.signals = m1_signal_roster();
  if (opt.loadxi) alg.signals.emplace_back(kLoadxiDestSignal);
  alg.conditions = {"cnd"};
  alg.selectors = {{"ir_op", 4}, {"ir_sb", 4}};
  alg.initial = "st_instr_fet";

  auto fetch = NextRule::go("st_instr_fet");
  // displacement fetch, shared by the first state of every RX instruction
  auto rx0 = [] { return asserts({"ctl_ma_pc", "ctl_ad_ld", "ctl_x_pc", "ctl_alu_a", "ctl_alu_b", "ctl_pc_ld"}); };

  std::vector<std::pair<std::uint64_t, NextRule>> rx = {
      {0x0, NextRule::go("st_lea0")},   {0x1, NextRule::go("st_load0")},  {0x2, NextRule::go("st_store0")},
      {0x3, NextRule::go("st_jump0")},  {0x4, NextRule::go("st_jumpf0")}, {0x5, NextRule::go("st_jumpt0")},
      {0x6, NextRule::go("st_jal0")}};
  if (opt.loadxi) rx.emplace_back(0x7, NextRule::go("st_loadxi0"));

  auto& st = alg.states;
  st.push_back({"st_instr_fet",
                asserts({"ctl_ma_pc", "ctl_ir_ld", "ctl_x_pc", "ctl_alu_a", "ctl_alu_b", "ctl_pc_ld"}),
                NextRule::go("st_dispatch")});
  st.push_back({"st_dispatch", {},
                NextRule::dispatch("ir_op",
                                   {{0x0, NextRule::go("st_add")},
                                    {0x1, NextRule::go("st_sub")},
                                    {0x2, NextRule::go("st_mul0")},
                                    {0x4, NextRule::go("st_cmplt")},
                                    {0x5, NextRule::go("st_cmpeq")},
                                    {0x6, NextRule::go("st_cmpgt")},
                                    {0xd, NextRule::go("st_trap0")},
                                    {0xf, NextRule::dispatch("ir_sb", rx, fetch)}},
                                   fetch)});
  st.push_back({"st_add", asserts({"ctl_rf_alu", "ctl_rf_ld"}), fetch});
  st.push_back({"st_sub", asserts({"ctl_alu_b", "ctl_rf_alu", "ctl_rf_ld"}), fetch});
  st.push_back({"st_mul0", {}, fetch});
  st.push_back({"st_cmplt", asserts({"ctl_alu_d", "ctl_rf_alu", "ctl_rf_ld"}), fetch});
  st.push_back({"st_cmpeq", asserts({"ctl_alu_c", "ctl_rf_alu", "ctl_rf_ld"}), fetch});
  st.push_back({"st_cmpgt", asserts({"ctl_alu_c", "ctl_alu_d", "ctl_rf_alu", "ctl_rf_ld"}), fetch});
  st.push_back({"st_trap0", {}, NextRule::go("st_trap0")});
  st.push_back({"st_lea0", rx0(), NextRule::go("st_lea1")});
  st.push_back({"st_lea1", asserts({"ctl_y_ad", "ctl_rf_alu", "ctl_rf_ld"}), fetch});
  st.push_back({"st_load0", rx0(), NextRule::go("st_load1")});
  st.push_back({"st_load1", asserts({"ctl_y_ad", "ctl_ad_alu", "ctl_ad_ld"}), NextRule::go("st_load2")});
  st.push_back({"st_load2", asserts({"ctl_rf_ld"}), fetch});
  st.push_back({"st_store0", rx0(), NextRule::go("st_store1")});
  st.push_back({"st_store1", asserts({"ctl_y_ad", "ctl_ad_alu", "ctl_ad_ld"}), NextRule::go("st_store2")});
  st.push_back({"st_store2", asserts({"ctl_rf_sd", "ctl_sto"}), fetch});
  st.push_back({"st_jump0", rx0(), NextRule::go("st_jump1")});
  st.push_back({"st_jump1", asserts({"ctl_y_ad", "ctl_pc_ld"}), fetch});
  st.push_back({"st_jumpf0", rx0(), NextRule::go("st_jumpf1")});
  st.push_back({"st_jumpf1", {{"ctl_y_ad", "", true}, {"ctl_pc_ld", "cnd", false}}, fetch});
  st.push_back({"st_jumpt0", rx0(), NextRule::go("st_jumpt1")});
  st.push_back({"st_jumpt1", {{"ctl_y_ad", "", true}, {"ctl_pc_ld", "cnd", true}}, fetch});
  st.push_back({"st_jal0", rx0(), NextRule::go("st_jal1")});
  st.push_back({"st_jal1", asserts({"ctl_rf_pc", "ctl_rf_ld", "ctl_y_ad", "ctl_pc_ld"}), fetch});
  if (opt.loadxi) {
    st.push_back({"st_loadxi0", rx0(), NextRule::go("st_loadxi1")});
    st.push_back({"st_loadxi1", asserts({"ctl_y_ad", "ctl_ad_alu", "ctl_ad_ld"}), NextRule::go("st_loadxi2")});
    // load into Rd while ad takes the incremented index, then ad into Rsa
    st.push_back({"st_loadxi2", asserts({"ctl_rf_ld", "ctl_alu_a", "ctl_alu_b", "ctl_ad_alu", "ctl_ad_ld"}),
                  NextRule::go("st_loadxi3")});
    st.push_back({"st_loadxi3", asserts({"ctl_rf_ld", "ctl_rf_ds"}), fetch});
  }
  if (opt.alu_fault) {
    ControlState* s = alg.find(opt.alu_fault->first);
    if (!s) throw ControlError("fault injection: no state '" + opt.alu_fault->first + "'");
    detail::set_alu_code(*s, opt.alu_fault->second);
  }
  return alg;
}

/// Signal-level handles on a built M1.
struct M1Interface {
  NodeRef reset, dma, dma_store, ctl_start;
  Word dma_a, dma_d;
  ControlCircuit control;
  std::map<std::string, Word> datapath;  // ir pc ad a b r x y p ma md
  NodeRef cnd, halted;
  NodeRef m_sto;
  Word m_addr, m_data, m_out;
  std::vector<Word> registers;  // R0..R15
};

struct M1Circuit {
  Netlist netlist;
  M1Interface io;
  ControlAlgorithm algorithm;
  M1Options options;
};

inline M1Circuit build_m1(const M1Options& opt = {}) {
  constexpr std::size_t n16 = 16;
  M1Circuit m;
  m.options = opt;
  m.algorithm = m1_control_algorithm(opt);
  Netlist& n = m.netlist;
  M1Interface& io = m.io;

  io.reset = n.add_input("reset");
  io.dma = n.add_input("dma");
  io.dma_store = n.add_input("dma_store");
  io.dma_a = input_word(n, "dma_a", n16);
  io.dma_d = input_word(n, "dma_d", n16);
  io.ctl_start = n.add_input("ctl_start");

  // ir, pc and ad are flip flops whose inputs are connected at the end;
  // cnd and the register-file input p are forward wires.
  auto fresh = [&] {
    Word w;
    for (std::size_t i = 0; i < n16; ++i) w.bits.push_back(n.dff());
    return w;
  };
  const Word ir = fresh(), pc = fresh(), ad = fresh();
  const Word ir_op = ir.slice(0, 4), ir_d = ir.slice(4, 4), ir_sa = ir.slice(8, 4), ir_sb = ir.slice(12, 4);
  const NodeRef cnd = wire(n);
  const Word p = wirew(n, n16);

  io.control = synthesize(n, m.algorithm, io.reset, {{"cnd", cnd}}, {{"ir_op", ir_op}, {"ir_sb", ir_sb}}, io.ctl_start);
  auto ctl = [&](const std::string& s) { return io.control.signal(s); };
  const M1AluFunction alu_fn{ctl("ctl_alu_a"), ctl("ctl_alu_b"), ctl("ctl_alu_c"), ctl("ctl_alu_d")};

  const Word rf_sa = mux1w(n, ctl("ctl_rf_sd"), ir_sa, ir_d);
  const Word rf_sb = mux1w(n, ctl("ctl_rf_sd"), ir_sb, ir_sa);
  const Word rf_dest = opt.loadxi ? mux1w(n, ctl(std::string(kLoadxiDestSignal)), ir_d, ir_sa) : ir_d;
  const RegFile rf = regfile(n, n16, 4, ctl("ctl_rf_ld"), rf_dest, rf_sa, rf_sb, p);
  bind_wire(n, cnd, orw(n, regfile_read(n, rf.registers, ir_d)));

  const Word x = mux1w(n, ctl("ctl_x_pc"), rf.a, pc);
  const Word y = mux1w(n, ctl("ctl_y_ad"), rf.b, ad);
  const Word r = alu_m1(n, alu_fn, x, y).second;

  const Word ma = mux1w(n, ctl("ctl_ma_pc"), ad, pc);
  const Word md = rf.a;
  io.m_addr = mux1w(n, io.dma, ma, io.dma_a);
  io.m_data = mux1w(n, io.dma, md, io.dma_d);
  io.m_sto = mux1(n, io.dma, ctl("ctl_sto"), io.dma_store);
  const NodeRef mem = n.memport(io.m_addr.bits, io.m_data.bits, io.m_sto);
  for (std::size_t i = 0; i < n16; ++i) io.m_out.bits.push_back(NodeRef{mem.id, static_cast<std::uint16_t>(i), mem.owner});

  Word p_in = mux1w(n, ctl("ctl_rf_pc"), mux1w(n, ctl("ctl_rf_alu"), io.m_out, r), pc);
  if (opt.loadxi) p_in = mux1w(n, ctl(std::string(kLoadxiDestSignal)), p_in, ad);
  bind_wirew(n, p, p_in);
  const Word q = mux1w(n, ctl("ctl_ad_alu"), io.m_out, r);

  auto load_reg = [&](const Word& reg, NodeRef ld, const Word& in) {
    for (std::size_t i = 0; i < n16; ++i) n.connect_dff(reg[i], mux1(n, ld, reg[i], in[i]));
  };
  load_reg(ir, ctl("ctl_ir_ld"), io.m_out);
  load_reg(pc, ctl("ctl_pc_ld"), r);
  load_reg(ad, ctl("ctl_ad_ld"), q);
  io.cnd = cnd;

  io.halted = io.control.state_bit("st_trap0");
  io.registers = rf.registers;
  io.datapath = {{"ir", ir}, {"pc", pc}, {"ad", ad}, {"a", rf.a}, {"b", rf.b}, {"r", r},
                 {"x", x},   {"y", y},   {"p", p},   {"ma", ma},  {"md", md}};

  for (std::size_t i = 0; i < io.control.state_names.size(); ++i)
    n.add_output(io.control.state_names[i], io.control.state[i]);
  for (const auto& [name, ref] : io.control.signals) n.add_output(name, ref);
  for (const auto& [name, w] : io.datapath) output_word(n, name, w);
  n.add_output("cnd", io.cnd);
  n.add_output("halted", io.halted);
  n.add_output("m_sto", io.m_sto);
  output_word(n, "m_addr", io.m_addr);
  output_word(n, "m_data", io.m_data);
  output_word(n, "m_out", io.m_out);
  for (std::size_t i = 0; i < io.registers.size(); ++i) output_word(n, "R" + std::to_string(i), io.registers[i]);
  n.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Running programs

/// All observable values of one clock cycle, sampled after the
/// combinational logic has settled and before the tick.
struct CycleRecord {
  std::uint64_t cycle = 0;
  std::map<std::string, std::uint16_t> taps;
  std::vector<std::string> state_names;  // roster order

  [[nodiscard]] std::uint16_t at(const std::string& name) const {
    auto it = taps.find(name);
    if (it == taps.end()) throw NetlistError("cycle record has no tap '" + name + "'");
    return it->second;
  }
  [[nodiscard]] bool bit(const std::string& name) const { return at(name) != 0; }
  [[nodiscard]] std::optional<std::string> state() const {
    std::optional<std::string> s;
    for (const auto& name : state_names) {
      if (!bit(name)) continue;
      if (s) return std::nullopt;
      s = name;
    }
    return s;
  }
  [[nodiscard]] std::size_t hot_count() const {
    std::size_t k = 0;
    for (const auto& name : state_names) k += bit(name) ? 1 : 0;
    return k;
  }
};

struct MachineView {
  Word16 pc = 0, ir = 0, ad = 0;
  std::array<Word16, 16> regs{};
  std::vector<Word16> mem;
};

enum class M1Status { Halted, BudgetExhausted };

/// A simulated M1 with a cycle-level driving interface.
class M1Machine {
 public:
  explicit M1Machine(const M1Options& opt = {}) : circuit_(build_m1(opt)), sim_(circuit_.netlist) {}

  [[nodiscard]] const M1Circuit& circuit() const { return circuit_; }
  [[nodiscard]] const Simulator& simulator() const { return sim_; }
  [[nodiscard]] std::uint64_t cycle() const { return sim_.cycle(); }
  [[nodiscard]] bool started() const { return started_; }

  /// Power-on state with memory cleared.
  void power_on() {
    sim_.reset(true);
    started_ = false;
  }

  /// Writes the image into memory through the DMA inputs, one word per cycle.
  void dma_load(const ObjectImage& img) {
    for (const auto& [addr, word] : img.records) {
      drive(false, true, true, addr, word, false);
      step();
    }
  }

  /// One cycle with reset = 1, after which the processor runs from pc = 0.
  void start() {
    drive(true, false, false, 0, 0, false);
    step();
    started_ = true;
  }

  /// Power on, DMA the program in, reset.
  void boot(const ObjectImage& img) {
    power_on();
    dma_load(img);
    start();
  }

  /// Settles and samples the current cycle without ticking.
  CycleRecord sample() {
    if (started_) drive(false, false, false, 0, 0, true);
    sim_.settle();
    return record();
  }

  /// Executes one processor cycle and returns what was visible during it.
  CycleRecord step() {
    if (started_) drive(false, false, false, 0, 0, true);
    sim_.settle();
    CycleRecord rec = record();
    sim_.tick();
    return rec;
  }

  [[nodiscard]] bool halted() {
    sim_.settle();
    return sim_.value(circuit_.io.halted);
  }

  [[nodiscard]] MachineView view() {
    sim_.settle();
    const auto& io = circuit_.io;
    MachineView v;
    v.pc = static_cast<Word16>(word_value(sim_, io.datapath.at("pc")));
    v.ir = static_cast<Word16>(word_value(sim_, io.datapath.at("ir")));
    v.ad = static_cast<Word16>(word_value(sim_, io.datapath.at("ad")));
    for (std::size_t i = 0; i < 16; ++i) v.regs[i] = static_cast<Word16>(word_value(sim_, io.registers[i]));
    v.mem = sim_.memory();
    return v;
  }

  [[nodiscard]] Word16 read_memory(Word16 a) const { return sim_.read_memory(a); }
  void poke_memory(Word16 a, Word16 v) { sim_.write_memory(a, v); }

 private:
  void drive(bool reset, bool dma, bool dma_store, Word16 a, Word16 d, bool start) {
    const auto& io = circuit_.io;
    sim_.set_input(io.reset, reset);
    sim_.set_input(io.dma, dma);
    sim_.set_input(io.dma_store, dma_store);
    set_word(sim_, io.dma_a, a);
    set_word(sim_, io.dma_d, d);
    sim_.set_input(io.ctl_start, start);
  }

  CycleRecord record() const {
    const auto& io = circuit_.io;
    CycleRecord rec;
    rec.cycle = sim_.cycle();
    rec.state_names = io.control.state_names;
    auto& t = rec.taps;
    t["reset"] = sim_.value(io.reset);
    t["dma"] = sim_.value(io.dma);
    t["dma_store"] = sim_.value(io.dma_store);
    t["dma_a"] = static_cast<Word16>(word_value(sim_, io.dma_a));
    t["dma_d"] = static_cast<Word16>(word_value(sim_, io.dma_d));
    t["ctl_start"] = sim_.value(io.ctl_start);
    for (std::size_t i = 0; i < io.control.state_names.size(); ++i)
      t[io.control.state_names[i]] = sim_.value(io.control.state[i]);
    for (const auto& [name, ref] : io.control.signals) t[name] = sim_.value(ref);
    for (const auto& [name, w] : io.datapath) t[name] = static_cast<Word16>(word_value(sim_, w));
    t["cnd"] = sim_.value(io.cnd);
    t["halted"] = sim_.value(io.halted);
    t["m_sto"] = sim_.value(io.m_sto);
    t["m_addr"] = static_cast<Word16>(word_value(sim_, io.m_addr));
    t["m_data"] = static_cast<Word16>(word_value(sim_, io.m_data));
    t["m_out"] = static_cast<Word16>(word_value(sim_, io.m_out));
    for (std::size_t i = 0; i < io.registers.size(); ++i)
      t["R" + std::to_string(i)] = static_cast<Word16>(word_value(sim_, io.registers[i]));
    return rec;
  }

  M1Circuit circuit_;
  Simulator sim_;
  bool started_ = false;
};

struct M1Run {
  M1Status status = M1Status::Halted;
  std::uint64_t cycles = 0;  // processor cycles after reset
  MachineView view;
};

/// Boots the image and runs through the first st_trap0 cycle, or until
/// `max_cycles` processor cycles have elapsed. `observe` sees every processor cycle.
inline M1Run run_program(M1Machine& m, const ObjectImage& img, std::uint64_t max_cycles,
                         const std::function<void(const CycleRecord&)>& observe = {}) {
  m.boot(img);
  M1Run result;
  for (;;) {
    if (result.cycles == max_cycles) {
      result.status = M1Status::BudgetExhausted;
      break;
    }
    const CycleRecord rec = m.step();
    if (observe) observe(rec);
    ++result.cycles;
    if (rec.bit("halted")) break;
  }
  result.view = m.view();
  return result;
}

}  // namespace sigma16forge

#pragma once

// Cycle-based simulation of synchronous netlists. A signal is a stream of
// bits indexed by clock cycle; flip flops power on at 0 and all update
// together at the tick.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sigma16forge/netlist.hpp"

namespace sigma16forge {

/// Bits by cycle; cycles past the end read as `pad`.
struct BitStream {
  std::vector<std::uint8_t> bits;
  bool pad = false;

  BitStream() = default;
  BitStream(std::initializer_list<int> v, bool pad_bit = false) : pad(pad_bit) {
    for (int b : v) bits.push_back(b ? 1 : 0);
  }
  static BitStream from_string(std::string_view s, bool pad_bit = false) {
    BitStream b;
    b.pad = pad_bit;
    for (char c : s) {
      if (c == '0' || c == '1')
        b.bits.push_back(static_cast<std::uint8_t>(c - '0'));
      else if (c != '_' && c != ' ')
        throw NetlistError(std::string("bad bit character '") + c + "'");
    }
    return b;
  }
  static BitStream constant(bool v) {
    BitStream b;
    b.pad = v;
    return b;
  }

  [[nodiscard]] bool at(std::size_t t) const { return t < bits.size() ? bits[t] != 0 : pad; }
  [[nodiscard]] std::size_t size() const { return bits.size(); }
  [[nodiscard]] std::string to_string() const {
    std::string s;
    for (auto b : bits) s += b ? '1' : '0';
    return s;
  }
  friend bool operator==(const BitStream&, const BitStream&) = default;
};

class Simulator {
 public:
  explicit Simulator(const Netlist& n) : owner_(n.serial()) {
    const auto order = evaluation_order(n);
    const auto& comps = n.components();
    base_.resize(comps.size());
    std::uint32_t slot = 0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      base_[i] = slot;
      slot += comps[i].kind == Kind::MemPort ? kMemDataBits : 1;
    }
    values_.assign(slot, 0);

    auto slot_of = [&](NodeRef r) { return base_[r.id] + r.lane; };
    for (auto id : order) {
      const auto& c = comps[id];
      switch (c.kind) {
        case Kind::Input:
        case Kind::Dff:
          break;
        case Kind::Constant:
          values_[base_[id]] = c.value ? 1 : 0;
          break;
        case Kind::MemPort: {
          Op op{c.kind, base_[id], 0, 0, 0};
          program_.push_back(op);
          for (int i = 0; i < kMemPortArity; ++i) mem_operands_.push_back(slot_of(c.operands[i]));
          memory_.assign(std::size_t{1} << kMemAddrBits, 0);
          break;
        }
        default: {
          Op op{c.kind, base_[id], 0, 0, 0};
          std::uint32_t* dst[3] = {&op.a, &op.b, &op.c};
          for (std::size_t k = 0; k < c.operands.size(); ++k) *dst[k] = slot_of(c.operands[k]);
          program_.push_back(op);
        }
      }
    }
    for (std::uint32_t id = 0; id < comps.size(); ++id) {
      if (comps[id].kind == Kind::Dff) {
        dffs_.push_back({base_[id], slot_of(comps[id].operands[0])});
        dff_ids_.push_back(id);
      }
    }
  }

  void set_input(NodeRef r, bool v) {
    check(r);
    values_[base_[r.id]] = v ? 1 : 0;
    dirty_ = true;
  }

  /// Evaluates combinational logic for the current cycle.
  void settle() {
    auto& v = values_;
    for (const auto& op : program_) {
      switch (op.kind) {
        case Kind::Inv: v[op.out] = v[op.a] ^ 1; break;
        case Kind::And2: v[op.out] = v[op.a] & v[op.b]; break;
        case Kind::And3: v[op.out] = v[op.a] & v[op.b] & v[op.c]; break;
        case Kind::Or2: v[op.out] = v[op.a] | v[op.b]; break;
        case Kind::Or3: v[op.out] = v[op.a] | v[op.b] | v[op.c]; break;
        case Kind::Xor2: v[op.out] = v[op.a] ^ v[op.b]; break;
        case Kind::MemPort: {
          const std::uint16_t word = memory_[word_at(0)];
          for (int i = 0; i < kMemDataBits; ++i) v[op.out + i] = (word >> (kMemDataBits - 1 - i)) & 1;
          break;
        }
        default: break;
      }
    }
    dirty_ = false;
  }

  /// Value of `r` in the current (settled) cycle.
  [[nodiscard]] bool value(NodeRef r) const {
    check(r);
    if (dirty_) throw NetlistError("Simulator::value(): inputs changed since last settle()");
    return values_[base_[r.id] + r.lane] != 0;
  }

  /// Clock tick: every flip flop takes its input, memory commits a pending store.
  void tick() {
    if (dirty_) settle();
    if (!mem_operands_.empty() && values_[mem_operands_[kMemPortArity - 1]]) {
      std::uint16_t data = 0;
      for (int i = 0; i < kMemDataBits; ++i) data = static_cast<std::uint16_t>((data << 1) | values_[mem_operands_[kMemAddrBits + i]]);
      memory_[word_at(0)] = data;
    }
    for (const auto& d : dffs_) next_.push_back(values_[d.in]);
    for (std::size_t i = 0; i < dffs_.size(); ++i) values_[dffs_[i].out] = next_[i];
    next_.clear();
    ++cycle_;
    dirty_ = true;
  }

  /// settle() then tick().
  void step() {
    settle();
    tick();
  }

  [[nodiscard]] std::uint64_t cycle() const { return cycle_; }

  /// Flip flop contents in ascending component-id order.
  [[nodiscard]] std::vector<std::uint8_t> state() const {
    std::vector<std::uint8_t> s;
    s.reserve(dffs_.size());
    for (const auto& d : dffs_) s.push_back(values_[d.out]);
    return s;
  }
  void set_state(const std::vector<std::uint8_t>& s) {
    if (s.size() != dffs_.size()) throw NetlistError("set_state(): wrong number of flip flops");
    for (std::size_t i = 0; i < s.size(); ++i) values_[dffs_[i].out] = s[i] ? 1 : 0;
    dirty_ = true;
  }
  [[nodiscard]] std::size_t dff_count() const { return dffs_.size(); }

  [[nodiscard]] bool has_memory() const { return !memory_.empty(); }
  [[nodiscard]] std::uint16_t read_memory(std::uint16_t addr) const { return memory_.at(addr); }
  /// Direct memory initialisation, outside the circuit's own ports.
  void write_memory(std::uint16_t addr, std::uint16_t value) {
    memory_.at(addr) = value;
    dirty_ = true;
  }
  [[nodiscard]] const std::vector<std::uint16_t>& memory() const { return memory_; }

  /// Back to power-on: flip flops 0, cycle 0. Memory contents are kept unless `clear_memory`.
  void reset(bool clear_memory = false) {
    for (const auto& d : dffs_) values_[d.out] = 0;
    if (clear_memory) std::fill(memory_.begin(), memory_.end(), 0);
    cycle_ = 0;
    dirty_ = true;
  }

 private:
  struct Op {
    Kind kind;
    std::uint32_t out, a, b, c;
  };
  struct DffSlot {
    std::uint32_t out, in;
  };

  void check(NodeRef r) const {
    if (r.owner != owner_ || r.id >= base_.size()) throw NetlistError("node reference does not belong to the simulated netlist");
  }

  [[nodiscard]] std::size_t word_at(int first) const {
    std::size_t a = 0;
    for (int i = 0; i < kMemAddrBits; ++i) a = (a << 1) | values_[mem_operands_[static_cast<std::size_t>(first + i)]];
    return a;
  }

  std::uint32_t owner_;
  std::vector<std::uint32_t> base_;
  std::vector<std::uint8_t> values_;
  std::vector<Op> program_;
  std::vector<DffSlot> dffs_;
  std::vector<std::uint32_t> dff_ids_;
  std::vector<std::uint8_t> next_;
  std::vector<std::uint32_t> mem_operands_;
  std::vector<std::uint16_t> memory_;
  std::uint64_t cycle_ = 0;
  bool dirty_ = true;
};

// ---------------------------------------------------------------------------

using NamedStreams = std::map<std::string, BitStream>;

/// Ordered (name, stream) pairs from one run, as consumed by export_vcd.
struct SimTrace {
  std::size_t ncycles = 0;
  std::vector<std::pair<std::string, BitStream>> signals;

  [[nodiscard]] const BitStream* find(std::string_view name) const {
    for (const auto& [n, s] : signals)
      if (n == name) return &s;
    return nullptr;
  }
};

/// Runs `ncycles` cycles recording the given probes. Every declared input
/// needs a stream; short streams extend with their pad bit.
inline SimTrace trace(const Netlist& n, const NamedStreams& inputs, std::size_t ncycles,
                      const std::vector<std::pair<std::string, NodeRef>>& probes) {
  for (const auto& [name, _] : inputs)
    if (!n.find_input(name)) throw NetlistError("stream given for unknown input: " + name);
  std::vector<std::pair<NodeRef, const BitStream*>> drive;
  for (const auto& [name, ref] : n.inputs()) {
    auto it = inputs.find(name);
    if (it == inputs.end()) throw NetlistError("missing input stream: " + name);
    drive.emplace_back(ref, &it->second);
  }
  Simulator sim(n);
  SimTrace out;
  out.ncycles = ncycles;
  for (const auto& [name, _] : probes) out.signals.push_back({name, BitStream{}});
  for (std::size_t t = 0; t < ncycles; ++t) {
    for (const auto& [ref, s] : drive) sim.set_input(ref, s->at(t));
    sim.settle();
    for (std::size_t i = 0; i < probes.size(); ++i)
      out.signals[i].second.bits.push_back(sim.value(probes[i].second) ? 1 : 0);
    sim.tick();
  }
  return out;
}

/// Streams for every named output.
inline NamedStreams simulate(const Netlist& n, const NamedStreams& inputs, std::size_t ncycles) {
  auto t = trace(n, inputs, ncycles, n.outputs());
  NamedStreams out;
  for (auto& [name, s] : t.signals) out.emplace(name, std::move(s));
  return out;
}

// ---------------------------------------------------------------------------
// Explicit-state model checking

struct ModelCheckResult {
  bool holds = true;
  std::size_t states_explored = 0;
  /// Input vectors (in netlist input order), one per cycle, ending at the violating cycle.
  std::vector<std::vector<std::uint8_t>> counterexample;
};

/// Checks `property` at every cycle 0..depth-1 of every input sequence of
/// that length, i.e. exhaustively over all 2^(inputs*depth) input streams,
/// deduplicating reached flip flop states. The property sees the settled
/// simulator of the cycle under test.
inline ModelCheckResult model_check(const Netlist& n, std::size_t depth,
                                    const std::function<bool(const Simulator&)>& property) {
  if (n.memport_id()) throw NetlistError("model_check(): netlists with memory are not supported");
  const auto& ins = n.inputs();
  if (ins.size() > 16) throw NetlistError("model_check(): too many inputs to enumerate");
  const std::size_t combos = std::size_t{1} << ins.size();

  struct Node {
    std::vector<std::uint8_t> state;
    std::size_t parent;
    std::size_t combo;
  };
  constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

  Simulator sim(n);
  std::vector<Node> nodes;
  std::unordered_set<std::string> seen;
  auto key = [](const std::vector<std::uint8_t>& s) { return std::string(s.begin(), s.end()); };

  nodes.push_back({sim.state(), kRoot, 0});
  seen.insert(key(nodes[0].state));
  std::vector<std::size_t> frontier{0};
  ModelCheckResult res;

  auto apply = [&](std::size_t combo) {
    for (std::size_t i = 0; i < ins.size(); ++i) sim.set_input(ins[i].second, (combo >> i) & 1);
  };
  auto inputs_of = [&](std::size_t combo) {
    std::vector<std::uint8_t> v;
    for (std::size_t i = 0; i < ins.size(); ++i) v.push_back(static_cast<std::uint8_t>((combo >> i) & 1));
    return v;
  };

  for (std::size_t t = 0; t < depth && !frontier.empty(); ++t) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier) {
      for (std::size_t combo = 0; combo < combos; ++combo) {
        sim.set_state(nodes[idx].state);
        apply(combo);
        sim.settle();
        if (!property(sim)) {
          res.holds = false;
          std::vector<std::vector<std::uint8_t>> rev{inputs_of(combo)};
          for (std::size_t k = idx; nodes[k].parent != kRoot; k = nodes[k].parent) rev.push_back(inputs_of(nodes[k].combo));
          res.counterexample.assign(rev.rbegin(), rev.rend());
          res.states_explored = nodes.size();
          return res;
        }
        sim.tick();
        auto s = sim.state();
        if (seen.insert(key(s)).second) {
          nodes.push_back({std::move(s), idx, combo});
          next.push_back(nodes.size() - 1);
        }
      }
    }
    frontier = std::move(next);
  }
  res.states_explored = nodes.size();
  return res;
}

}  // namespace sigma16forge

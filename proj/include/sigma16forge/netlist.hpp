#pragma once

// Structural circuit representation: an explicit graph of gates, flip flops,
// inputs, constants and (at most one) memory port, built through handles.

#include <algorithm>
#include <array>
#include <atomic>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sigma16forge {

class NetlistError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind : std::uint8_t { Input, Constant, Inv, And2, And3, Or2, Or3, Xor2, Dff, MemPort };

inline constexpr std::size_t kKindCount = 10;
inline constexpr std::array<Kind, kKindCount> kAllKinds = {
    Kind::Input, Kind::Constant, Kind::Inv, Kind::And2, Kind::And3,
    Kind::Or2,   Kind::Or3,      Kind::Xor2, Kind::Dff, Kind::MemPort};

// Memory port geometry: 16 address bits, 16 data bits, one store enable.
inline constexpr int kMemAddrBits = 16;
inline constexpr int kMemDataBits = 16;
inline constexpr int kMemPortArity = kMemAddrBits + kMemDataBits + 1;

inline constexpr std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Input: return "input";
    case Kind::Constant: return "const";
    case Kind::Inv: return "inv";
    case Kind::And2: return "and2";
    case Kind::And3: return "and3";
    case Kind::Or2: return "or2";
    case Kind::Or3: return "or3";
    case Kind::Xor2: return "xor2";
    case Kind::Dff: return "dff";
    case Kind::MemPort: return "memport";
  }
  return "?";
}

inline std::optional<Kind> kind_from_name(std::string_view s) {
  for (Kind k : kAllKinds)
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

/// Fixed operand count per kind.
inline constexpr int arity(Kind k) {
  switch (k) {
    case Kind::Input:
    case Kind::Constant: return 0;
    case Kind::Inv:
    case Kind::Dff: return 1;
    case Kind::And2:
    case Kind::Or2:
    case Kind::Xor2: return 2;
    case Kind::And3:
    case Kind::Or3: return 3;
    case Kind::MemPort: return kMemPortArity;
  }
  return 0;
}

inline constexpr bool is_gate(Kind k) {
  return k == Kind::Inv || k == Kind::And2 || k == Kind::And3 || k == Kind::Or2 ||
         k == Kind::Or3 || k == Kind::Xor2;
}

/// Handle to one output bit of a component. `lane` selects a data bit of the
/// memory port (0 = most significant); every other kind has only lane 0.
struct NodeRef {
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t id = kNone;
  std::uint16_t lane = 0;
  std::uint32_t owner = 0;

  [[nodiscard]] bool bound() const { return id != kNone; }
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct Component {
  Kind kind = Kind::Constant;
  bool value = false;  // Constant only
  std::string name;    // Input only
  std::vector<NodeRef> operands;
};

class Netlist {
 public:
  Netlist() : serial_(next_serial()) {}

  [[nodiscard]] std::uint32_t serial() const { return serial_; }
  [[nodiscard]] std::size_t size() const { return components_.size(); }
  [[nodiscard]] const std::vector<Component>& components() const { return components_; }
  [[nodiscard]] const Component& component(NodeRef r) const {
    check_ref(r);
    return components_[r.id];
  }
  [[nodiscard]] const std::vector<std::pair<std::string, NodeRef>>& inputs() const { return inputs_; }
  [[nodiscard]] const std::vector<std::pair<std::string, NodeRef>>& outputs() const { return outputs_; }

  [[nodiscard]] NodeRef ref(std::uint32_t id, std::uint16_t lane = 0) const {
    NodeRef r{id, lane, serial_};
    check_ref(r);
    return r;
  }

  [[nodiscard]] bool owns(NodeRef r) const {
    if (r.owner != serial_ || r.id >= components_.size()) return false;
    const Kind k = components_[r.id].kind;
    return k == Kind::MemPort ? r.lane < kMemDataBits : r.lane == 0;
  }

  void check_ref(NodeRef r) const {
    if (!r.bound()) throw NetlistError("unbound node reference");
    if (!owns(r)) throw NetlistError("node reference does not belong to this netlist");
  }

  NodeRef add_input(std::string name) {
    if (find_input(name)) throw NetlistError("duplicate input name: " + name);
    Component c;
    c.kind = Kind::Input;
    c.name = name;
    NodeRef r = append(std::move(c));
    inputs_.emplace_back(std::move(name), r);
    return r;
  }

  /// Shared constant nodes; at most one of each value per netlist.
  NodeRef constant(bool v) {
    auto& cached = v ? one_ : zero_;
    if (!cached) {
      Component c;
      c.kind = Kind::Constant;
      c.value = v;
      cached = append(std::move(c));
    }
    return *cached;
  }
  NodeRef zero() { return constant(false); }
  NodeRef one() { return constant(true); }

  NodeRef gate(Kind kind, std::vector<NodeRef> operands) {
    if (!is_gate(kind)) throw NetlistError("gate(): not a logic gate kind: " + std::string(kind_name(kind)));
    check_operands(kind, operands);
    Component c;
    c.kind = kind;
    c.operands = std::move(operands);
    return append(std::move(c));
  }

  NodeRef inv(NodeRef a) { return gate(Kind::Inv, {a}); }
  NodeRef and2(NodeRef a, NodeRef b) { return gate(Kind::And2, {a, b}); }
  NodeRef and3(NodeRef a, NodeRef b, NodeRef c) { return gate(Kind::And3, {a, b, c}); }
  NodeRef or2(NodeRef a, NodeRef b) { return gate(Kind::Or2, {a, b}); }
  NodeRef or3(NodeRef a, NodeRef b, NodeRef c) { return gate(Kind::Or3, {a, b, c}); }
  NodeRef xor2(NodeRef a, NodeRef b) { return gate(Kind::Xor2, {a, b}); }

  NodeRef dff(NodeRef d) {
    check_ref(d);
    Component c;
    c.kind = Kind::Dff;
    c.operands = {d};
    return append(std::move(c));
  }

  /// A flip flop whose input is connected later with connect_dff; this is
  /// how feedback through state is expressed.
  NodeRef dff() {
    Component c;
    c.kind = Kind::Dff;
    c.operands = {NodeRef{}};
    return append(std::move(c));
  }

  void connect_dff(NodeRef q, NodeRef d) {
    check_ref(q);
    check_ref(d);
    auto& c = components_[q.id];
    if (c.kind != Kind::Dff) throw NetlistError("connect_dff(): target is not a dff");
    if (c.operands[0].bound()) throw NetlistError("connect_dff(): dff already connected");
    c.operands[0] = d;
  }

  /// Rewire an existing gate or dff. Permits arbitrary graphs, including
  /// combinational loops that check_synchronous later rejects.
  void set_operands(NodeRef node, std::vector<NodeRef> operands) {
    check_ref(node);
    auto& c = components_[node.id];
    if (!is_gate(c.kind) && c.kind != Kind::Dff)
      throw NetlistError("set_operands(): only gates and dffs can be rewired");
    check_operands(c.kind, operands);
    c.operands = std::move(operands);
  }

  /// The single memory component: combinational read at `address`, write of
  /// `data` at the clock tick when `store` is 1. Returns lane 0 of the output.
  NodeRef memport(std::span<const NodeRef> address, std::span<const NodeRef> data, NodeRef store) {
    if (memport_) throw NetlistError("netlist already has a memory port");
    if (address.size() != kMemAddrBits || data.size() != kMemDataBits)
      throw NetlistError("memport(): address and data must be 16 bits");
    std::vector<NodeRef> ops(address.begin(), address.end());
    ops.insert(ops.end(), data.begin(), data.end());
    ops.push_back(store);
    check_operands(Kind::MemPort, ops);
    Component c;
    c.kind = Kind::MemPort;
    c.operands = std::move(ops);
    NodeRef r = append(std::move(c));
    memport_ = r.id;
    return r;
  }

  [[nodiscard]] std::optional<std::uint32_t> memport_id() const { return memport_; }

  void add_output(std::string name, NodeRef r) {
    check_ref(r);
    if (find_output(name)) throw NetlistError("duplicate output name: " + name);
    outputs_.emplace_back(std::move(name), r);
  }

  [[nodiscard]] std::optional<NodeRef> find_input(std::string_view name) const {
    for (const auto& [n, r] : inputs_)
      if (n == name) return r;
    return std::nullopt;
  }
  [[nodiscard]] std::optional<NodeRef> find_output(std::string_view name) const {
    for (const auto& [n, r] : outputs_)
      if (n == name) return r;
    return std::nullopt;
  }

  /// Rebuilds a netlist from raw records (ids are positions in `comps`;
  /// `owner` fields are ignored and rewritten). Used by the text importer.
  static Netlist restore(std::vector<Component> comps,
                         const std::vector<std::pair<std::string, std::uint32_t>>& inputs,
                         const std::vector<std::pair<std::string, std::pair<std::uint32_t, std::uint16_t>>>& outputs) {
    Netlist n;
    n.components_ = std::move(comps);
    for (auto& c : n.components_) {
      for (auto& op : c.operands)
        if (op.bound()) op.owner = n.serial_;
      if (c.kind == Kind::MemPort) {
        if (n.memport_) throw NetlistError("netlist already has a memory port");
        n.memport_ = static_cast<std::uint32_t>(&c - n.components_.data());
      }
    }
    for (std::uint32_t i = 0; i < n.components_.size(); ++i) {
      const auto& c = n.components_[i];
      if (static_cast<int>(c.operands.size()) != arity(c.kind))
        throw NetlistError("component " + std::to_string(i) + ": wrong operand count");
      for (const auto& op : c.operands)
        if (op.bound()) n.check_ref(op);
      if (c.kind == Kind::Constant) (c.value ? n.one_ : n.zero_) = NodeRef{i, 0, n.serial_};
    }
    for (const auto& [name, id] : inputs) {
      NodeRef r{id, 0, n.serial_};
      n.check_ref(r);
      if (n.components_[id].kind != Kind::Input) throw NetlistError("input record refers to a non-input");
      if (n.find_input(name)) throw NetlistError("duplicate input name: " + name);
      n.components_[id].name = name;
      n.inputs_.emplace_back(name, r);
    }
    for (const auto& [name, at] : outputs) n.add_output(name, NodeRef{at.first, at.second, n.serial_});
    return n;
  }

  /// Throws if any operand is still unconnected.
  void validate() const {
    for (std::size_t i = 0; i < components_.size(); ++i)
      for (const auto& op : components_[i].operands)
        if (!op.bound())
          throw NetlistError("component " + std::to_string(i) + " (" +
                             std::string(kind_name(components_[i].kind)) + ") has an unconnected operand");
  }

 private:
  static std::uint32_t next_serial() {
    static std::atomic<std::uint32_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }

  void check_operands(Kind kind, const std::vector<NodeRef>& ops) const {
    if (static_cast<int>(ops.size()) != arity(kind))
      throw NetlistError(std::string(kind_name(kind)) + " expects " + std::to_string(arity(kind)) +
                         " operands, got " + std::to_string(ops.size()));
    for (const auto& op : ops) check_ref(op);
  }

  NodeRef append(Component c) {
    components_.push_back(std::move(c));
    return NodeRef{static_cast<std::uint32_t>(components_.size() - 1), 0, serial_};
  }

  std::uint32_t serial_;
  std::vector<Component> components_;
  std::vector<std::pair<std::string, NodeRef>> inputs_;
  std::vector<std::pair<std::string, NodeRef>> outputs_;
  std::optional<NodeRef> zero_, one_;
  std::optional<std::uint32_t> memport_;
};

// ---------------------------------------------------------------------------
// Cost model

struct NetlistStats {
  std::array<std::size_t, kKindCount> counts{};
  std::size_t dff_count = 0;
  std::size_t gate_count = 0;
  std::size_t total = 0;

  [[nodiscard]] std::size_t count(Kind k) const { return counts[static_cast<std::size_t>(k)]; }
  friend bool operator==(const NetlistStats&, const NetlistStats&) = default;
};

inline NetlistStats stats(const Netlist& n) {
  NetlistStats s;
  for (const auto& c : n.components()) {
    ++s.counts[static_cast<std::size_t>(c.kind)];
    if (c.kind == Kind::Dff) ++s.dff_count;
    if (is_gate(c.kind)) ++s.gate_count;
  }
  s.total = n.size();
  return s;
}

// ---------------------------------------------------------------------------
// Synchronous-model check

/// Operand indices of `c` that feed its output within the same cycle.
inline std::span<const NodeRef> combinational_operands(const Component& c) {
  switch (c.kind) {
    case Kind::Dff: return {};
    case Kind::MemPort: return std::span<const NodeRef>(c.operands).first(kMemAddrBits);
    default: return c.operands;
  }
}

struct SyncReport {
  bool ok = true;
  std::vector<NodeRef> cycle;  // components on one combinational loop, in signal-flow order
};

/// Reports a violation iff some directed cycle avoids every flip flop.
/// Deterministic: roots are visited in ascending component id.
inline SyncReport check_synchronous(const Netlist& n) {
  const auto& comps = n.components();
  enum : std::uint8_t { White, Grey, Black };
  std::vector<std::uint8_t> colour(comps.size(), White);
  struct Frame {
    std::uint32_t id;
    std::size_t next;
  };
  std::vector<Frame> stack;

  for (std::uint32_t root = 0; root < comps.size(); ++root) {
    if (colour[root] != White) continue;
    stack.push_back({root, 0});
    colour[root] = Grey;
    while (!stack.empty()) {
      auto& top = stack.back();
      auto ops = combinational_operands(comps[top.id]);
      if (top.next == ops.size()) {
        colour[top.id] = Black;
        stack.pop_back();
        continue;
      }
      const NodeRef op = ops[top.next++];
      if (!op.bound()) continue;
      if (colour[op.id] == Grey) {
        // Stack from op up to top is the loop; dependency order reversed gives signal flow.
        SyncReport rep;
        rep.ok = false;
        std::size_t i = stack.size();
        while (i > 0 && stack[i - 1].id != op.id) --i;
        for (std::size_t j = stack.size(); j-- > (i > 0 ? i - 1 : 0);)
          rep.cycle.push_back(NodeRef{stack[j].id, 0, n.serial()});
        return rep;
      }
      if (colour[op.id] == White) {
        colour[op.id] = Grey;
        stack.push_back({op.id, 0});
      }
    }
  }
  return {};
}

/// Combinational evaluation order (operands before users). Throws on a
/// combinational loop or an unconnected operand.
inline std::vector<std::uint32_t> evaluation_order(const Netlist& n) {
  n.validate();
  if (auto rep = check_synchronous(n); !rep.ok)
    throw NetlistError("netlist violates the synchronous model: combinational loop through " +
                       std::to_string(rep.cycle.size()) + " component(s)");
  const auto& comps = n.components();
  std::vector<std::uint8_t> done(comps.size(), 0);
  std::vector<std::uint32_t> order;
  order.reserve(comps.size());
  std::vector<std::pair<std::uint32_t, std::size_t>> stack;
  for (std::uint32_t root = 0; root < comps.size(); ++root) {
    if (done[root]) continue;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      auto ops = combinational_operands(comps[id]);
      if (next < ops.size()) {
        const auto op = ops[next++].id;
        if (!done[op]) stack.emplace_back(op, 0);
        continue;
      }
      if (!done[id]) {
        done[id] = 1;
        order.push_back(id);
      }
      stack.pop_back();
    }
  }
  return order;
}

/// Logic depth of every component: gates count 1, the memory read counts 1,
/// inputs, constants and flip flop outputs are 0.
inline std::vector<int> logic_levels(const Netlist& n) {
  const auto order = evaluation_order(n);
  const auto& comps = n.components();
  std::vector<int> level(comps.size(), 0);
  for (auto id : order) {
    const auto& c = comps[id];
    if (!is_gate(c.kind) && c.kind != Kind::MemPort) continue;
    int m = 0;
    for (const auto& op : combinational_operands(c)) m = std::max(m, level[op.id]);
    level[id] = m + 1;
  }
  return level;
}

/// Longest gate path ending at any of `sinks`.
inline int longest_path(const Netlist& n, std::span<const NodeRef> sinks) {
  const auto level = logic_levels(n);
  int m = 0;
  for (const auto& s : sinks) {
    n.check_ref(s);
    m = std::max(m, level[s.id]);
  }
  return m;
}

}  // namespace sigma16forge

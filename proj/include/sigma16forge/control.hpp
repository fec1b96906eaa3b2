#pragma once

// Control algorithms as explicit state machines, and a generator that turns
// one into a one-hot control circuit.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigma16forge/circuits/basic.hpp"

namespace sigma16forge {

class ControlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A control signal asserted in a state, optionally only when a condition
/// input has a given value.
struct Assertion {
  std::string signal;
  std::string condition;  // empty: unconditional
  bool when = true;       // asserted when condition == when

  friend bool operator==(const Assertion&, const Assertion&) = default;
};

/// Next-state rule: a tree of conditionals and selector dispatches with
/// state names at the leaves.
struct NextRule {
  enum class Type { Goto, Branch, Dispatch };

  Type type = Type::Goto;
  std::string target;     // Goto
  std::string condition;  // Branch: children[0] if condition is 1, else children[1]
  std::string selector;   // Dispatch: children[i] for keys[i]; a trailing extra child is the default
  std::vector<std::uint64_t> keys;
  std::vector<NextRule> children;

  static NextRule go(std::string state) {
    NextRule r;
    r.target = std::move(state);
    return r;
  }
  static NextRule branch(std::string cond, NextRule then_rule, NextRule else_rule) {
    NextRule r;
    r.type = Type::Branch;
    r.condition = std::move(cond);
    r.children = {std::move(then_rule), std::move(else_rule)};
    return r;
  }
  static NextRule dispatch(std::string sel, std::vector<std::pair<std::uint64_t, NextRule>> cases,
                           std::optional<NextRule> fallback = std::nullopt) {
    NextRule r;
    r.type = Type::Dispatch;
    r.selector = std::move(sel);
    for (auto& [k, c] : cases) {
      r.keys.push_back(k);
      r.children.push_back(std::move(c));
    }
    if (fallback) r.children.push_back(std::move(*fallback));
    return r;
  }
  [[nodiscard]] bool has_default() const { return type == Type::Dispatch && children.size() > keys.size(); }

  friend bool operator==(const NextRule&, const NextRule&) = default;
};

struct ControlState {
  std::string name;
  std::vector<Assertion> assertions;
  NextRule next;

  friend bool operator==(const ControlState&, const ControlState&) = default;
};

struct Selector {
  std::string name;
  std::size_t width = 0;
  friend bool operator==(const Selector&, const Selector&) = default;
};

struct ControlAlgorithm {
  std::vector<ControlState> states;
  std::string initial;
  std::vector<std::string> signals;
  std::vector<std::string> conditions;
  std::vector<Selector> selectors;

  [[nodiscard]] const ControlState* find(std::string_view name) const {
    for (const auto& s : states)
      if (s.name == name) return &s;
    return nullptr;
  }
  [[nodiscard]] ControlState* find(std::string_view name) {
    for (auto& s : states)
      if (s.name == name) return &s;
    return nullptr;
  }
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].name == name) return i;
    return std::nullopt;
  }
  [[nodiscard]] const Selector* find_selector(std::string_view name) const {
    for (const auto& s : selectors)
      if (s.name == name) return &s;
    return nullptr;
  }

  friend bool operator==(const ControlAlgorithm&, const ControlAlgorithm&) = default;
};

// ---------------------------------------------------------------------------

namespace detail {
inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

inline void check_rule(const ControlAlgorithm& alg, const std::string& where, const NextRule& r,
                       std::vector<std::string>& out) {
  switch (r.type) {
    case NextRule::Type::Goto:
      if (!alg.find(r.target)) out.push_back(where + ": next state '" + r.target + "' does not exist");
      return;
    case NextRule::Type::Branch:
      if (!contains(alg.conditions, r.condition))
        out.push_back(where + ": branch on undeclared condition '" + r.condition + "'");
      if (r.children.size() != 2) {
        out.push_back(where + ": branch needs a then and an else rule");
        return;
      }
      break;
    case NextRule::Type::Dispatch: {
      const Selector* sel = alg.find_selector(r.selector);
      if (!sel) {
        out.push_back(where + ": dispatch on undeclared selector '" + r.selector + "'");
      } else {
        const std::uint64_t range = std::uint64_t{1} << sel->width;
        std::set<std::uint64_t> seen;
        for (auto k : r.keys) {
          if (k >= range) out.push_back(where + ": case value " + std::to_string(k) + " out of range for " + r.selector);
          if (!seen.insert(k).second) out.push_back(where + ": duplicate case value " + std::to_string(k));
        }
        if (!r.has_default() && seen.size() < range)
          out.push_back(where + ": dispatch on " + r.selector + " does not cover every value and has no default");
      }
      if (r.children.size() != r.keys.size() && r.children.size() != r.keys.size() + 1) {
        out.push_back(where + ": malformed dispatch");
        return;
      }
      break;
    }
  }
  for (const auto& c : r.children) check_rule(alg, where, c, out);
}
}  // namespace detail

/// Every violated invariant, one message each; empty means valid.
inline std::vector<std::string> validate(const ControlAlgorithm& alg) {
  std::vector<std::string> out;
  std::set<std::string> names;
  for (const auto& s : alg.states)
    if (!names.insert(s.name).second) out.push_back("duplicate state name '" + s.name + "'");
  if (alg.states.empty()) out.push_back("algorithm has no states");
  if (!alg.find(alg.initial)) out.push_back("initial state '" + alg.initial + "' does not exist");
  std::set<std::string> roster;
  for (const auto& s : alg.signals)
    if (!roster.insert(s).second) out.push_back("duplicate control signal '" + s + "'");
  for (const auto& s : alg.states) {
    for (const auto& a : s.assertions) {
      if (!roster.count(a.signal)) out.push_back(s.name + ": asserts undeclared signal '" + a.signal + "'");
      if (!a.condition.empty() && !detail::contains(alg.conditions, a.condition))
        out.push_back(s.name + ": assertion gated on undeclared condition '" + a.condition + "'");
    }
    detail::check_rule(alg, s.name, s.next, out);
  }
  return out;
}

inline void require_valid(const ControlAlgorithm& alg) {
  auto d = validate(alg);
  if (d.empty()) return;
  std::string msg = "invalid control algorithm:";
  for (const auto& m : d) msg += "\n  " + m;
  throw ControlError(msg);
}

// ---------------------------------------------------------------------------
// Behavioural reference

using ConditionValues = std::map<std::string, bool>;
using SelectorValues = std::map<std::string, std::uint64_t>;

/// The state following `state` for the given inputs.
inline std::string next_state(const ControlAlgorithm& alg, std::string_view state, const SelectorValues& sel,
                              const ConditionValues& cond) {
  const ControlState* s = alg.find(state);
  if (!s) throw ControlError("unknown state '" + std::string(state) + "'");
  const NextRule* r = &s->next;
  for (;;) {
    switch (r->type) {
      case NextRule::Type::Goto:
        return r->target;
      case NextRule::Type::Branch:
        r = &r->children[cond.at(r->condition) ? 0 : 1];
        break;
      case NextRule::Type::Dispatch: {
        const auto v = sel.at(r->selector);
        auto it = std::find(r->keys.begin(), r->keys.end(), v);
        if (it != r->keys.end())
          r = &r->children[static_cast<std::size_t>(it - r->keys.begin())];
        else if (r->has_default())
          r = &r->children.back();
        else
          throw ControlError("dispatch value not covered");
        break;
      }
    }
  }
}

/// Signals asserted in `state` after condition gating.
inline std::set<std::string> asserted(const ControlAlgorithm& alg, std::string_view state, const ConditionValues& cond) {
  const ControlState* s = alg.find(state);
  if (!s) throw ControlError("unknown state '" + std::string(state) + "'");
  std::set<std::string> out;
  for (const auto& a : s->assertions)
    if (a.condition.empty() || cond.at(a.condition) == a.when) out.insert(a.signal);
  return out;
}

// ---------------------------------------------------------------------------
// Synthesis

struct ControlCircuit {
  std::vector<std::string> state_names;  // bit i of `state` is state_names[i]
  Word state;                            // one-hot
  std::map<std::string, NodeRef> signals;

  [[nodiscard]] NodeRef state_bit(std::string_view name) const {
    for (std::size_t i = 0; i < state_names.size(); ++i)
      if (state_names[i] == name) return state[i];
    throw ControlError("no state '" + std::string(name) + "'");
  }
  [[nodiscard]] NodeRef signal(const std::string& name) const {
    auto it = signals.find(name);
    if (it == signals.end()) throw ControlError("no control signal '" + name + "'");
    return it->second;
  }
};

/// One flip flop per state. While `reset` is 1 the next tick enters the
/// initial state with every other state cleared; before the first reset no
/// state is active. When `enable` is given and 0, the state holds and all
/// control outputs are 0.
inline ControlCircuit synthesize(Netlist& n, const ControlAlgorithm& alg, NodeRef reset,
                                 const std::map<std::string, NodeRef>& conditions,
                                 const std::map<std::string, Word>& selectors,
                                 std::optional<NodeRef> enable = std::nullopt) {
  require_valid(alg);
  for (const auto& c : alg.conditions)
    if (!conditions.count(c)) throw ControlError("no circuit input for condition '" + c + "'");
  for (const auto& s : alg.selectors) {
    auto it = selectors.find(s.name);
    if (it == selectors.end()) throw ControlError("no circuit input for selector '" + s.name + "'");
    if (it->second.width() != s.width) throw ControlError("selector '" + s.name + "' has the wrong width");
  }

  ControlCircuit cc;
  const std::size_t count = alg.states.size();
  for (const auto& s : alg.states) {
    cc.state_names.push_back(s.name);
    cc.state.bits.push_back(n.dff());
  }

  std::map<std::string, Word> decoded;
  auto lines_of = [&](const std::string& sel) -> const Word& {
    auto it = decoded.find(sel);
    if (it == decoded.end()) {
      const Word& w = selectors.at(sel);
      it = decoded.emplace(sel, decode(n, w.width(), w)).first;
    }
    return it->second;
  };
  auto cond_ref = [&](const std::string& c, bool when) { return when ? conditions.at(c) : n.inv(conditions.at(c)); };

  std::vector<std::vector<NodeRef>> into(count);
  auto emit = [&](auto&& self, const NextRule& r, NodeRef guard) -> void {
    switch (r.type) {
      case NextRule::Type::Goto:
        into[*alg.index_of(r.target)].push_back(guard);
        return;
      case NextRule::Type::Branch:
        self(self, r.children[0], n.and2(guard, cond_ref(r.condition, true)));
        self(self, r.children[1], n.and2(guard, cond_ref(r.condition, false)));
        return;
      case NextRule::Type::Dispatch: {
        const Word& lines = lines_of(r.selector);
        Word covered;
        for (std::size_t i = 0; i < r.keys.size(); ++i) {
          const NodeRef line = lines[static_cast<std::size_t>(r.keys[i])];
          covered.bits.push_back(line);
          self(self, r.children[i], n.and2(guard, line));
        }
        if (r.has_default()) self(self, r.children.back(), n.and2(guard, n.inv(orw(n, covered))));
        return;
      }
    }
  };
  for (std::size_t i = 0; i < count; ++i) emit(emit, alg.states[i].next, cc.state[i]);

  const NodeRef nreset = n.inv(reset);
  const std::size_t init = *alg.index_of(alg.initial);
  for (std::size_t i = 0; i < count; ++i) {
    NodeRef next = orw(n, Word(into[i]));
    if (enable) next = mux1(n, *enable, cc.state[i], next);
    n.connect_dff(cc.state[i], i == init ? n.or2(reset, next) : n.and2(nreset, next));
  }

  std::map<std::string, std::vector<NodeRef>> terms;
  for (const auto& sig : alg.signals) terms[sig];
  for (std::size_t i = 0; i < count; ++i)
    for (const auto& a : alg.states[i].assertions)
      terms[a.signal].push_back(a.condition.empty() ? cc.state[i] : n.and2(cc.state[i], cond_ref(a.condition, a.when)));
  for (auto& [sig, t] : terms) {
    NodeRef s = orw(n, Word(t));
    if (enable) s = n.and2(*enable, s);
    cc.signals[sig] = s;
  }
  return cc;
}

/// Name of the single active state in a one-hot state word.
inline std::string state_name_of(const std::vector<std::string>& names, const std::vector<std::uint8_t>& bits) {
  if (bits.size() != names.size()) throw ControlError("state word width does not match the state roster");
  std::optional<std::size_t> hot;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) continue;
    if (hot) throw ControlError("state word is not one-hot: " + names[*hot] + " and " + names[i] + " both set");
    hot = i;
  }
  if (!hot) throw ControlError("state word is not one-hot: no state set");
  return names[*hot];
}

}  // namespace sigma16forge

#include <catch_amalgamated.hpp>

#include <random>

#include "sigma16forge/control_text.hpp"
#include "sigma16forge/m1.hpp"

using namespace sigma16forge;

namespace {

ControlAlgorithm toggle_machine() {
  ControlAlgorithm a;
  a.signals = {"out_a", "out_b"};
  a.conditions = {"go"};
  a.initial = "s0";
  a.states.push_back({"s0", {{"out_a", "", true}}, NextRule::branch("go", NextRule::go("s1"), NextRule::go("s0"))});
  a.states.push_back({"s1", {{"out_b", "go", false}}, NextRule::go("s0")});
  return a;
}

ControlAlgorithm dispatch_machine() {
  ControlAlgorithm a;
  a.signals = {"x", "y", "z"};
  a.conditions = {"c"};
  a.selectors = {{"op", 2}};
  a.initial = "d";
  a.states.push_back({"d", {{"x", "", true}},
                      NextRule::dispatch("op", {{0, NextRule::go("p")}, {3, NextRule::go("q")}}, NextRule::go("d"))});
  a.states.push_back({"p", {{"y", "", true}, {"z", "c", true}}, NextRule::go("q")});
  a.states.push_back({"q", {{"x", "", true}, {"y", "", true}}, NextRule::branch("c", NextRule::go("d"), NextRule::go("p"))});
  return a;
}

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
  for (const auto& d : diags)
    if (d.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("a well-formed algorithm validates") {
  CHECK(validate(toggle_machine()).empty());
  CHECK(validate(dispatch_machine()).empty());
  CHECK(validate(m1_control_algorithm()).empty());
  CHECK(validate(m1_control_algorithm({true, std::nullopt})).empty());
}

TEST_CASE("validate reports every broken invariant") {
  SECTION("missing next state") {
    auto a = toggle_machine();
    a.states[1].next = NextRule::go("nowhere");
    CHECK(mentions(validate(a), "'nowhere' does not exist"));
  }
  SECTION("undeclared signal") {
    auto a = toggle_machine();
    a.states[0].assertions.push_back({"ghost", "", true});
    CHECK(mentions(validate(a), "undeclared signal 'ghost'"));
  }
  SECTION("undeclared condition") {
    auto a = toggle_machine();
    a.states[1].assertions.push_back({"out_a", "nope", true});
    CHECK(mentions(validate(a), "undeclared condition 'nope'"));
  }
  SECTION("duplicate state") {
    auto a = toggle_machine();
    a.states.push_back(a.states[0]);
    CHECK(mentions(validate(a), "duplicate state name 's0'"));
  }
  SECTION("uncovered dispatch") {
    auto a = dispatch_machine();
    a.states[0].next = NextRule::dispatch("op", {{0, NextRule::go("p")}});
    CHECK(mentions(validate(a), "does not cover every value"));
  }
  SECTION("case out of range") {
    auto a = dispatch_machine();
    a.states[0].next = NextRule::dispatch("op", {{4, NextRule::go("p")}}, NextRule::go("d"));
    CHECK(mentions(validate(a), "out of range"));
  }
  SECTION("bad initial") {
    auto a = toggle_machine();
    a.initial = "zz";
    CHECK(mentions(validate(a), "initial state 'zz'"));
  }
  SECTION("synthesis refuses an invalid algorithm") {
    auto a = toggle_machine();
    a.initial = "zz";
    Netlist n;
    CHECK_THROWS_AS(synthesize(n, a, n.add_input("reset"), {{"go", n.add_input("go")}}, {}), ControlError);
  }
}

TEST_CASE("synthesis needs a circuit input for every condition and selector") {
  Netlist n;
  const NodeRef reset = n.add_input("reset");
  CHECK_THROWS_AS(synthesize(n, dispatch_machine(), reset, {}, {{"op", input_word(n, "op", 2)}}), ControlError);
  CHECK_THROWS_AS(synthesize(n, dispatch_machine(), reset, {{"c", n.add_input("c")}}, {}), ControlError);
  CHECK_THROWS_AS(synthesize(n, dispatch_machine(), reset, {{"c", n.add_input("c2")}}, {{"op", input_word(n, "w", 3)}}),
                  ControlError);
}

TEST_CASE("synthesized toggle machine follows its algorithm") {
  const auto alg = toggle_machine();
  Netlist n;
  const NodeRef reset = n.add_input("reset"), go = n.add_input("go");
  const ControlCircuit cc = synthesize(n, alg, reset, {{"go", go}}, {});
  REQUIRE(check_synchronous(n).ok);
  Simulator sim(n);
  sim.set_input(reset, true);
  sim.settle();
  CHECK(word_value(sim, cc.state) == 0);  // no state before the first reset
  sim.tick();
  sim.set_input(reset, false);
  const std::string gos = "0110100111";
  std::string states, a, b;
  for (char g : gos) {
    sim.set_input(go, g == '1');
    sim.settle();
    states += sim.value(cc.state_bit("s0")) ? '0' : '1';
    a += sim.value(cc.signal("out_a")) ? '1' : '0';
    b += sim.value(cc.signal("out_b")) ? '1' : '0';
    sim.tick();
  }
  CHECK(states == "0010010010");
  CHECK(a == "1101101101");
  CHECK(b == "0000010000");
  CHECK_THROWS_AS(cc.signal("nope"), ControlError);
  CHECK_THROWS_AS(cc.state_bit("nope"), ControlError);
}

TEST_CASE("synthesized control matches the behavioural reference on random inputs") {
  for (const auto& alg : {toggle_machine(), dispatch_machine(), m1_control_algorithm()}) {
    Netlist n;
    const NodeRef reset = n.add_input("reset");
    std::map<std::string, NodeRef> conds;
    for (const auto& c : alg.conditions) conds[c] = n.add_input(c);
    std::map<std::string, Word> sels;
    for (const auto& s : alg.selectors) sels[s.name] = input_word(n, s.name, s.width);
    const ControlCircuit cc = synthesize(n, alg, reset, conds, sels);
    Simulator sim(n);
    sim.set_input(reset, true);
    sim.step();
    sim.set_input(reset, false);
    std::string expect = alg.initial;
    std::mt19937 rng(11);
    for (int t = 0; t < 2000; ++t) {
      ConditionValues cv;
      SelectorValues sv;
      for (const auto& c : alg.conditions) {
        cv[c] = rng() & 1;
        sim.set_input(conds.at(c), cv[c]);
      }
      for (const auto& s : alg.selectors) {
        sv[s.name] = rng() & ((1u << s.width) - 1);
        set_word(sim, sels.at(s.name), sv[s.name]);
      }
      sim.settle();
      std::vector<std::uint8_t> bits;
      for (auto b : cc.state.bits) bits.push_back(sim.value(b));
      REQUIRE(state_name_of(cc.state_names, bits) == expect);
      const auto on = asserted(alg, expect, cv);
      for (const auto& sig : alg.signals) REQUIRE(sim.value(cc.signal(sig)) == (on.count(sig) > 0));
      expect = next_state(alg, expect, sv, cv);
      sim.tick();
    }
  }
}

TEST_CASE("reset in mid-run returns to the initial state") {
  const auto alg = dispatch_machine();
  Netlist n;
  const NodeRef reset = n.add_input("reset"), c = n.add_input("c");
  const Word op = input_word(n, "op", 2);
  const ControlCircuit cc = synthesize(n, alg, reset, {{"c", c}}, {{"op", op}});
  Simulator sim(n);
  sim.set_input(reset, true);
  sim.step();
  sim.set_input(reset, false);
  set_word(sim, op, 0);
  sim.step();  // d -> p
  sim.settle();
  REQUIRE(sim.value(cc.state_bit("p")));
  sim.set_input(reset, true);
  sim.step();
  sim.settle();
  CHECK(word_value(sim, cc.state) == 0b100);
}

TEST_CASE("enable input freezes the state and silences the outputs") {
  const auto alg = toggle_machine();
  Netlist n;
  const NodeRef reset = n.add_input("reset"), go = n.add_input("go"), en = n.add_input("en");
  const ControlCircuit cc = synthesize(n, alg, reset, {{"go", go}}, {}, en);
  Simulator sim(n);
  sim.set_input(reset, true);
  sim.step();
  sim.set_input(reset, false);
  sim.set_input(go, true);
  sim.set_input(en, false);
  for (int i = 0; i < 3; ++i) {
    sim.settle();
    CHECK(sim.value(cc.state_bit("s0")));
    CHECK_FALSE(sim.value(cc.signal("out_a")));
    sim.tick();
  }
  sim.set_input(en, true);
  sim.settle();
  CHECK(sim.value(cc.signal("out_a")));
  sim.tick();
  sim.settle();
  CHECK(sim.value(cc.state_bit("s1")));
}

TEST_CASE("state_name_of rejects words that are not one-hot") {
  const std::vector<std::string> names{"a", "b", "c"};
  CHECK(state_name_of(names, {0, 1, 0}) == "b");
  CHECK_THROWS_WITH(state_name_of(names, {0, 0, 0}), Catch::Matchers::ContainsSubstring("no state set"));
  CHECK_THROWS_WITH(state_name_of(names, {1, 0, 1}), Catch::Matchers::ContainsSubstring("a and c"));
  CHECK_THROWS_AS(state_name_of(names, {1, 0}), ControlError);
}

TEST_CASE("control text round trips") {
  for (const auto& alg : {toggle_machine(), dispatch_machine(), m1_control_algorithm(),
                          m1_control_algorithm({true, std::nullopt})}) {
    const std::string text = control_to_text(alg);
    const ControlAlgorithm back = parse_control(text);
    CHECK(back == alg);
    CHECK(control_to_text(back) == text);
  }
}

TEST_CASE("control text parses the documented syntax") {
  const auto alg = parse_control(R"(
# comment
signals ctl_a, ctl_b;
conditions cnd;
selector ir_op 4;
initial st_fetch;
state st_fetch: assert ctl_a, ctl_b when !cnd; next st_decode;
state st_decode: next case ir_op { 0 -> st_fetch, 0xf -> st_wait, default -> st_fetch };
state st_wait: next if cnd then st_fetch else st_wait;
)");
  CHECK(validate(alg).empty());
  REQUIRE(alg.states.size() == 3);
  CHECK(alg.states[0].assertions[1] == Assertion{"ctl_b", "cnd", false});
  CHECK(next_state(alg, "st_decode", {{"ir_op", 15}}, {}) == "st_wait");
  CHECK(next_state(alg, "st_decode", {{"ir_op", 7}}, {}) == "st_fetch");
  CHECK(next_state(alg, "st_wait", {}, {{"cnd", false}}) == "st_wait");
}

TEST_CASE("control text errors carry a line number") {
  CHECK_THROWS_WITH(parse_control("signals a;\nstate s: next ;\n"), Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_FALSE(validate(parse_control("signals a;\ninitial s;\nstate s: assert a; next t;\n")).empty());
}

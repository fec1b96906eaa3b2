// Acceptance checks: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "sigma16forge.hpp"

using namespace sigma16forge;

namespace {

struct Failure {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ObjectImage program(const std::string& name) {
  const auto m = assemble(slurp(std::string(SIGMA16_PROGRAMS) + "/" + name + ".asm.txt"));
  require(m.ok(), name + " does not assemble");
  return image_of(m);
}

ObjectImage source_image(const std::string& src) {
  const auto m = assemble(src);
  require(m.ok(), "inline program does not assemble");
  return image_of(m);
}

void feedback_rejection() {
  Netlist bad;
  const NodeRef x = bad.inv(bad.zero());
  bad.set_operands(x, {x});
  const SyncReport rep = check_synchronous(bad);
  require(!rep.ok, "x = inv x accepted");
  require(!rep.cycle.empty(), "no cycle reported");
  require(std::find(rep.cycle.begin(), rep.cycle.end(), x) != rep.cycle.end(), "cycle report misses the inverter");
  Netlist good;
  const NodeRef ld = good.add_input("ld"), in = good.add_input("x");
  good.add_output("s", reg1(good, ld, in));
  require(check_synchronous(good).ok, "reg1 rejected");
}

void adder_oracles() {
  for (bool prefix : {false, true}) {
    for (std::size_t width : {std::size_t{8}, std::size_t{16}}) {
      Netlist n;
      const NodeRef cin = n.add_input("cin");
      const Word x = input_word(n, "x", width), y = input_word(n, "y", width);
      auto [c, s] = prefix ? prefix_add(n, cin, bitslice(x, y)) : ripple_add(n, cin, bitslice(x, y));
      Simulator sim(n);
      const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
      auto check = [&](std::uint64_t a, std::uint64_t b, bool ci) {
        set_word(sim, x, a);
        set_word(sim, y, b);
        sim.set_input(cin, ci);
        sim.settle();
        const std::uint64_t total = a + b + ci;
        require(word_value(sim, s) == (total & mask) && sim.value(c) == ((total >> width) != 0),
                std::string(prefix ? "prefix" : "ripple") + " adder wrong at width " + std::to_string(width));
      };
      if (width == 8) {
        for (std::uint64_t a = 0; a < 256; ++a)
          for (std::uint64_t b = 0; b < 256; ++b)
            for (bool ci : {false, true}) check(a, b, ci);
      } else {
        std::mt19937 rng(2024);
        for (int i = 0; i < 10000; ++i) check(rng() & mask, rng() & mask, rng() & 1);
      }
    }
  }
  auto depth = [](bool prefix) {
    Netlist n;
    const NodeRef cin = n.add_input("cin");
    auto [c, s] = prefix ? prefix_add(n, cin, bitslice(input_word(n, "x", 16), input_word(n, "y", 16)))
                         : ripple_add(n, cin, bitslice(input_word(n, "x", 16), input_word(n, "y", 16)));
    std::vector<NodeRef> sinks = s.bits;
    sinks.push_back(c);
    return longest_path(n, sinks);
  };
  const int dp = depth(true), dr = depth(false);
  require(dp < dr, "prefix depth " + std::to_string(dp) + " not below ripple depth " + std::to_string(dr));
}

void exercise_alu() {
  Netlist n;
  AluOp op{n.add_input("op1"), n.add_input("op0")};
  const Word x = input_word(n, "x", 8), y = input_word(n, "y", 8);
  auto [ofl, r] = alu_exercise(n, op, bitslice(x, y));
  Simulator sim(n);
  for (int code = 0; code < 4; ++code) {
    sim.set_input(op.op1, code & 2);
    sim.set_input(op.op0, code & 1);
    for (int a = 0; a < 256; ++a)
      for (int b = 0; b < 256; ++b) {
        set_word(sim, x, static_cast<std::uint64_t>(a));
        set_word(sim, y, static_cast<std::uint64_t>(b));
        sim.settle();
        const int sa = static_cast<std::int8_t>(a), sb = static_cast<std::int8_t>(b);
        const int exact = code == 0 ? sa + sb : code == 1 ? sa - sb : code == 2 ? sb + 1 : -sb;
        require(word_value(sim, r) == static_cast<std::uint64_t>(exact & 0xff), "result wrong");
        require(sim.value(ofl) == (exact < -128 || exact > 127), "overflow wrong");
      }
  }
}

void isa_round_trip() {
  for (std::uint32_t w = 0; w <= 0xffff; ++w) {
    const Instruction i = decode(static_cast<Word16>(w), Word16{0xbeef});
    if (!i.known()) continue;
    const auto words = encode(i);
    require(words[0] == w, "encode(decode) differs at " + hex4(static_cast<Word16>(w)));
    require(decode(words[0], words.size() > 1 ? std::optional<Word16>(words[1]) : std::nullopt) == i, "decode(encode)");
  }
  require(to_string(decode(0xf604, Word16{0x0011})) == "jumpf R6,$0011[R0]", "f604 0011");
  require(encode(make_rx("loadxi", 1, 0x12ab, 2)) == std::vector<Word16>{0xf127, 0x12ab}, "loadxi encoding");
}

void emulator_exercise() {
  const ObjectImage base = program("insertion_sort");
  const Word16 n = base.symbols.at("n"), a = base.symbols.at("a");
  std::mt19937 rng(77);
  for (int t = 0; t < 8; ++t) {
    ObjectImage img = base;
    std::vector<std::int16_t> xs(10);
    img.records.emplace_back(n, static_cast<Word16>(10));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = static_cast<std::int16_t>(rng());
      img.records.emplace_back(static_cast<Word16>(a + i), static_cast<Word16>(xs[i]));
    }
    Emulator e;
    e.load(img);
    require(e.run(1000000).status == RunStatus::Halted, "did not halt");
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i < xs.size(); ++i)
      require(static_cast<std::int16_t>(e.mem(static_cast<Word16>(a + i))) == xs[i], "array not sorted");
  }
}

void co_verification() {
  std::set<std::string> covered;
  const char* corpus[] = {"insertion_sort", "arraymax", "loadxi_demo", "jumps", "arith", "procedure", "jumpf_demo"};
  for (const char* name : corpus) {
    const VerifyReport rep = verify(program(name));
    require(rep.ok, std::string(name) + ": " + rep.message);
    for (const auto& e : rep.emulator_events) covered.insert(e.instr.mnemonic);
  }
  for (const char* m : {"add", "sub", "cmplt", "cmpeq", "cmpgt", "lea", "load", "store", "jump", "jumpf", "jumpt", "jal",
                        "trap", "loadxi"})
    require(covered.count(m) > 0, std::string("corpus does not execute ") + m);
}

std::vector<std::string> state_sequence(const std::string& src, M1Machine& m) {
  std::vector<std::string> seq;
  run_program(m, source_image(src), 1000, [&](const CycleRecord& r) { seq.push_back(r.state().value_or("?")); });
  return seq;
}

void cycle_contract() {
  M1Machine m;
  const auto load = state_sequence("  load R1,x[R0]\n  trap R0,R0,R0\nx data 5\n", m);
  const std::vector<std::string> want{"st_instr_fet", "st_dispatch", "st_load0", "st_load1", "st_load2", "st_instr_fet"};
  require(std::vector<std::string>(load.begin(), load.begin() + 6) == want, "load state sequence");
  const auto adds = state_sequence("  add R1,R2,R3\n  add R4,R1,R1\n  add R5,R4,R1\n  add R6,R5,R5\n  trap R0,R0,R0\n", m);
  std::vector<std::size_t> fetches;
  for (std::size_t i = 0; i < adds.size(); ++i)
    if (adds[i] == "st_instr_fet") fetches.push_back(i);
  require(fetches.size() == 5, "fetch count");
  for (std::size_t i = 0; i + 1 < fetches.size(); ++i) {
    require(fetches[i + 1] - fetches[i] == 3, "add does not retire every 3 cycles");
    require(adds[fetches[i] + 1] == "st_dispatch" && adds[fetches[i] + 2] == "st_add", "add state sequence");
  }
}

void control_invariants() {
  M1Machine m;
  std::size_t cycles = 0;
  const auto r = run_program(m, program("insertion_sort"), 1000, [&](const CycleRecord& rec) {
    ++cycles;
    require(rec.hot_count() == 1, "state word not one-hot in cycle " + std::to_string(rec.cycle));
    require(rec.bit("ctl_sto") == (rec.state() == std::optional<std::string>("st_store2")),
            "ctl_sto outside st_store2 in cycle " + std::to_string(rec.cycle));
  });
  require(cycles == 1000 && r.status == M1Status::BudgetExhausted, "run shorter than 1000 cycles");
}

void traffic_lights() {
  TrafficLightV1 t1 = traffic_light_v1();
  Simulator sim(t1.netlist);
  std::string seq;
  for (int c = 0; c < 28; ++c) {
    sim.set_input(t1.reset, c == 0);
    sim.settle();
    require(sim.value(t1.green) + sim.value(t1.amber) + sim.value(t1.red) == 1, "lamps not exclusive");
    if (c > 0) seq += sim.value(t1.green) ? 'g' : sim.value(t1.amber) ? 'a' : 'r';
    sim.tick();
  }
  require(seq == "gggarrrragggarrrragggarrrra", "sequence " + seq);
  TrafficLightV2 t2 = traffic_light_v2();
  const auto mc = model_check(t2.netlist, 20, [&](const Simulator& s) { return !(s.value(t2.walk) && s.value(t2.green)); });
  require(mc.holds, "walk and green together");
}

void vector_multiplier() {
  const VecMulCircuit c = make_pipelined_vecmul(8);
  std::mt19937 rng(8);
  std::vector<std::uint64_t> xs(500), ys(500);
  for (auto& v : xs) v = rng() % 256;
  for (auto& v : ys) v = rng() % 256;
  NamedStreams in;
  word_streams(in, "x", 8, xs);
  word_streams(in, "y", 8, ys);
  const auto out = simulate(c.netlist, in, 508);
  for (std::size_t t = 0; t < 500; ++t)
    require(stream_word(out, "p", 16, t + 8) == xs[t] * ys[t], "product for cycle " + std::to_string(t));
}

void golden_driver_output() {
  const auto work = std::filesystem::temp_directory_path() / ("sigma16forge-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(work);
  const auto out = work / "driver.txt";
  const std::string cmd = std::string("\"") + SIGMA16_CLI + "\" m1 \"" + SIGMA16_PROGRAMS + "/jumpf_demo.asm.txt\" --driver-output \"" +
                          out.string() + "\" > \"" + (work / "stdout.txt").string() + "\"";
  require(std::system(cmd.c_str()) == 0, "m1 command failed");
  const std::string got = slurp(out.string());
  std::filesystem::remove_all(work);
  const std::string want = slurp(std::string(SIGMA16_GOLDEN) + "/jumpf_demo.txt");
  require(got == want, "driver output differs from the golden file");
  const auto start = got.find("Clock cycle 67\n");
  require(start != std::string::npos, "no cycle 67");
  const std::string block = got.substr(start, got.find("Clock cycle 68\n") - start);
  for (const char* s : {"Computer system inputs\n", "Control state\n", "Control signals\n", "Datapath\n", "Memory\n",
                        "st_jumpf1 = 1", "Executed instruction:  jumpf"})
    require(block.find(s) != std::string::npos, std::string("cycle 67 block lacks '") + s + "'");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<void()> run;
  };
  const std::vector<Criterion> criteria = {
      {"feedback rejection", 1, feedback_rejection},
      {"adder oracles", 60, adder_oracles},
      {"exercise ALU", 60, exercise_alu},
      {"ISA round trip", 0, isa_round_trip},
      {"emulator insertion sort", 5, emulator_exercise},
      {"M1 co-verification", 120, co_verification},
      {"cycle contract", 0, cycle_contract},
      {"control invariants", 0, control_invariants},
      {"traffic lights", 0, traffic_lights},
      {"pipelined vector multiplier", 0, vector_multiplier},
      {"golden driver output", 0, golden_driver_output},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string why;
    try {
      c.run();
    } catch (const Failure& f) {
      why = f.why;
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (why.empty() && c.limit_s > 0 && secs >= c.limit_s)
      why = "took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_s) + " s";
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
    if (c.limit_s > 0) std::snprintf(timing + std::strlen(timing), sizeof timing - std::strlen(timing), " < %.0f s", c.limit_s);
    std::cout << (why.empty() ? "PASS" : "FAIL") << "  " << c.name << "  (" << timing << ")";
    if (!why.empty()) std::cout << "  " << why;
    std::cout << "\n";
    failures += !why.empty();
  }
  return failures == 0 ? 0 : 1;
}

#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "sigma16forge/testbench.hpp"
#include "sigma16forge/verify.hpp"

using namespace sigma16forge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ObjectImage program(const std::string& name) {
  const auto m = assemble(slurp(std::string(SIGMA16_PROGRAMS) + "/" + name + ".asm.txt"));
  REQUIRE(m.ok());
  return image_of(m);
}

struct Capture {
  std::vector<CycleRecord> records;
  std::vector<std::string> text;
};

Capture run_driver(const std::string& name, bool loadxi = false) {
  M1Machine m({loadxi, std::nullopt});
  Driver d(m.circuit().algorithm);
  Capture c;
  run_program(m, program(name), 100000, [&](const CycleRecord& r) {
    c.records.push_back(r);
    c.text.push_back(d.render(r));
  });
  return c;
}

const CycleRecord& at_cycle(const Capture& c, std::uint64_t cycle) {
  for (const auto& r : c.records)
    if (r.cycle == cycle) return r;
  FAIL("no cycle " << cycle);
  return c.records.front();
}

std::string text_at(const Capture& c, std::uint64_t cycle) {
  for (std::size_t i = 0; i < c.records.size(); ++i)
    if (c.records[i].cycle == cycle) return c.text[i];
  return {};
}

}  // namespace

TEST_CASE("a cycle block parses back to the values it shows") {
  const Capture c = run_driver("insertion_sort");
  const DriverScript script = m1_driver_script(m1_control_algorithm());
  const auto names = script.names();
  for (std::size_t i = 0; i < c.records.size(); i += 7) {
    const CycleRecord& rec = c.records[i];
    const CycleRecord back = parse_cycle_block(format_cycle(rec, script));
    REQUIRE(back.cycle == rec.cycle);
    for (const auto& n : names) REQUIRE(back.at(n) == rec.at(n));
    REQUIRE(back.state_names == rec.state_names);
    REQUIRE(back.state() == rec.state());
  }
}

TEST_CASE("parse_cycle_block rejects garbage values") {
  CHECK_THROWS_AS(parse_cycle_block("Clock cycle 3\nDatapath\n    ir = zz\n"), NetlistError);
}

TEST_CASE("jumpf taken at cycle 67 shows the expected datapath") {
  const Capture c = run_driver("jumpf_demo");
  const CycleRecord& r = at_cycle(c, 67);
  CHECK(r.state() == std::optional<std::string>("st_jumpf1"));
  CHECK(r.at("ir") == 0xf604);
  CHECK(r.at("pc") == 0x0010);
  CHECK(r.at("ad") == 0x0011);
  CHECK(r.at("a") == 0x0000);
  CHECK(r.at("b") == 0x0012);
  CHECK(r.at("r") == 0x0011);
  CHECK(r.at("x") == 0x0000);
  CHECK(r.at("y") == 0x0011);
  CHECK(r.at("p") == 0x0331);
  CHECK(r.at("ma") == 0x0011);
  CHECK(r.at("md") == 0x0000);
  CHECK(r.at("cnd") == 0);
  CHECK(r.at("m_out") == 0x0331);
  CHECK(r.bit("ctl_pc_ld"));
  CHECK(r.bit("ctl_y_ad"));

  const std::string t = text_at(c, 67);
  CHECK(t.rfind("Clock cycle 67\n", 0) == 0);
  CHECK(t.find("    ir = f604  pc = 0010  ad = 0011   a = 0000   b = 0012   r = 0011\n") != std::string::npos);
  CHECK(t.find("     x = 0000   y = 0011   p = 0331  ma = 0011  md = 0000 cnd = 0\n") != std::string::npos);
  CHECK(t.find("     st_jumpf1 = 1") != std::string::npos);
  CHECK(t.find("m_out =0331") != std::string::npos);
  CHECK(t.find("jumpf instruction jumped\n") != std::string::npos);
  CHECK(t.find("Executed instruction:  jumpf  R6,0011[R0]   effective address = 0011\n") != std::string::npos);
  CHECK(t.find("jumped to 0011 in cycle 67\n") != std::string::npos);
  CHECK(text_at(c, 66).find("Fetched displacement = 0011\n") == std::string::npos);
  CHECK(text_at(c, 67).find("Fetched displacement = 0011\n") != std::string::npos);
}

TEST_CASE("a jump that is not taken is reported") {
  const Capture c = run_driver("jumps");
  std::string all;
  for (const auto& t : c.text) all += t;
  CHECK(all.find("jumpf instruction did not jump") != std::string::npos);
  CHECK(all.find("jumpt instruction did not jump") != std::string::npos);
  CHECK(all.find("jal instruction jumped") != std::string::npos);
  CHECK(all.find("halted in cycle") != std::string::npos);
}

TEST_CASE("the driver retires the same instructions as the emulator") {
  for (const char* name : {"arraymax", "procedure", "jumpf_demo"}) {
    INFO(name);
    M1Machine m;
    Driver d(m.circuit().algorithm);
    run_program(m, program(name), 100000, [&](const CycleRecord& r) { d.watch(r); });
    Emulator e(program(name));
    const auto want = executed_events(e.run(100000).events);
    CHECK(d.events() == want);
  }
}

TEST_CASE("render without instruction reports is the bare block") {
  M1Machine m;
  DriverScript quiet = m1_driver_script(m.circuit().algorithm);
  quiet.report_instructions = false;
  Driver d(m.circuit().algorithm, quiet);
  run_program(m, program("arraymax"), 100000, [&](const CycleRecord& r) {
    REQUIRE(d.render(r) == format_cycle(r, quiet));
  });
  CHECK_FALSE(d.events().empty());
}

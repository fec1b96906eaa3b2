#include <catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "sigma16forge/assembler.hpp"

using namespace sigma16forge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_diag(const ObjectModule& m, int line, const std::string& needle) {
  for (const auto& d : m.diagnostics)
    if (d.line == line && d.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("parse_line splits label, mnemonic, operands and comment") {
  auto l = parse_line("loop  add R1,R2, R3  ; bump");
  CHECK(l.label == "loop");
  CHECK(l.mnemonic == "add");
  CHECK(l.operands == "R1,R2,R3");
  CHECK(l.comment == " bump");
  CHECK_FALSE(l.error);

  l = parse_line("   trap R0,R0,R0");
  CHECK(l.label.empty());
  CHECK(l.mnemonic == "trap");

  l = parse_line("; only a comment");
  CHECK(l.mnemonic.empty());
  CHECK(l.comment == " only a comment");

  l = parse_line("x data -1");
  CHECK(l.mnemonic == "data");
  CHECK(l.operands == "-1");

  CHECK(parse_line("9bad add R1,R1,R1").error);
  CHECK(parse_line("").mnemonic.empty());
}

TEST_CASE("assembles a small program") {
  const auto m = assemble(
      "     lea   R1,3[R0]\n"
      "     load  R2,x[R0]\n"
      "     add   R3,R1,R2\n"
      "     store R3,y[R0]\n"
      "     trap  R0,R0,R0\n"
      "x    data  $0010\n"
      "y    data  0\n");
  REQUIRE(m.ok());
  CHECK(m.code == std::vector<Word16>{0xf100, 0x0003, 0xf201, 0x0008, 0x0312, 0xf302, 0x0009, 0xd000, 0x0010, 0x0000});
  CHECK(m.symbols.at("x") == 8);
  CHECK(m.symbols.at("y") == 9);
}

TEST_CASE("forward references resolve") {
  const auto m = assemble("  jump done[R0]\n  trap R0,R0,R0\ndone trap R0,R0,R0\n");
  REQUIRE(m.ok());
  CHECK(m.code == std::vector<Word16>{0xf003, 0x0003, 0xd000, 0xd000});
}

TEST_CASE("each bad line gets a diagnostic with its line number") {
  const auto m = assemble(
      "  add R1,R2\n"
      "  foo R1,R2,R3\n"
      "  lea R1,nowhere[R0]\n"
      "a data 1\n"
      "a data 2\n"
      "  add R1,R2,R16\n"
      "  data 70000\n"
      "  trap R0,R0,R0\n");
  CHECK_FALSE(m.ok());
  CHECK(has_diag(m, 1, "three registers"));
  CHECK(has_diag(m, 2, "unknown mnemonic 'foo'"));
  CHECK(has_diag(m, 3, "undefined label 'nowhere'"));
  CHECK(has_diag(m, 5, "duplicate label 'a'"));
  CHECK(has_diag(m, 6, "bad register"));
  CHECK(has_diag(m, 7, "does not fit"));
  CHECK(m.diagnostics.size() == 6);
  CHECK_FALSE(has_diag(m, 8, ""));
  CHECK(m.diagnostics.front().str().rfind("line 1: ", 0) == 0);
  CHECK_THROWS_AS(write_object(m), ObjectError);
}

TEST_CASE("listing shows addresses and words") {
  const auto m = assemble("start lea R1,1[R0]\n; note\n  trap R0,R0,R0\n");
  const std::string text = listing_text(m);
  CHECK(text.find("0000 f100 0001") != std::string::npos);
  CHECK(text.find("0002 d000") != std::string::npos);
  CHECK(text.find("; note") != std::string::npos);
}

TEST_CASE("object text round trips") {
  for (const char* name : {"insertion_sort", "arraymax", "loadxi_demo", "jumps", "arith", "procedure", "jumpf_demo"}) {
    INFO(name);
    const auto m = assemble(slurp(std::string(SIGMA16_PROGRAMS) + "/" + name + ".asm.txt"));
    REQUIRE(m.ok());
    const std::string obj = write_object(m);
    CHECK(obj.rfind(std::string(kObjectHeader) + "\n", 0) == 0);
    const ObjectImage img = read_object(obj);
    CHECK(img.flatten() == m.code);
    CHECK(img.symbols == m.symbols);
    CHECK(write_object(m) == obj);
  }
}

TEST_CASE("corrupt object text is rejected with a line number") {
  const std::string good = std::string(kObjectHeader) + "\ncode 0000 d000\n";
  CHECK_NOTHROW(read_object(good));
  CHECK_THROWS_WITH(read_object(good + "code 0001 zz00\n"), Catch::Matchers::ContainsSubstring("line 3"));
  CHECK_THROWS_WITH(read_object("bogus\n"), Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_WITH(read_object(good + "code 0001 0000 extra\n"), Catch::Matchers::ContainsSubstring("trailing"));
  CHECK_THROWS_WITH(read_object(good + "frob 1 2\n"), Catch::Matchers::ContainsSubstring("unrecognised"));
  CHECK_THROWS_AS(read_object(""), ObjectError);
}

TEST_CASE("disassembly reassembles to the same words") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Word16> words(1 + rng() % 40);
    for (auto& w : words) w = static_cast<Word16>(rng());
    const auto m = assemble(disassembly_text(words));
    REQUIRE(m.ok());
    REQUIRE(m.code == words);
  }
  const auto prog = assemble(slurp(std::string(SIGMA16_PROGRAMS) + "/insertion_sort.asm.txt"));
  CHECK(assemble(disassembly_text(prog.code)).code == prog.code);
}

#include <catch_amalgamated.hpp>

#include <random>

#include "sigma16forge/isa.hpp"

using namespace sigma16forge;

TEST_CASE("every single word decodes and re-encodes to itself") {
  for (std::uint32_t w = 0; w <= 0xffff; ++w) {
    const auto w0 = static_cast<Word16>(w);
    const Instruction i = decode(w0, Word16{0x1234});
    const auto words = encode(i);
    REQUIRE(words[0] == w0);
    REQUIRE(words.size() == i.size());
    const bool rx = (w0 >> 12) == 0xf && (w0 & 0xf) <= 7;
    REQUIRE((i.format == Format::RX) == rx);
    if (rx) REQUIRE(words[1] == 0x1234);
  }
}

TEST_CASE("RX instructions round trip with random displacements") {
  std::mt19937 rng(4);
  for (int k = 0; k < 5000; ++k) {
    const auto& e = kRxOpcodes[rng() % kRxOpcodes.size()];
    const unsigned d = rng() % 16, a = rng() % 16;
    const auto disp = static_cast<Word16>(rng());
    const Instruction i = make_rx(e.mnemonic, d, disp, a);
    const auto words = encode(i);
    REQUIRE(words.size() == 2);
    REQUIRE(decode(words[0], words[1]) == i);
  }
  for (const auto& e : kRrrOpcodes)
    for (unsigned d = 0; d < 16; d += 5)
      for (unsigned a = 0; a < 16; a += 3)
        for (unsigned b = 0; b < 16; b += 7) {
          const Instruction i = make_rrr(e.mnemonic, d, a, b);
          REQUIRE(decode(encode(i)[0]) == i);
        }
}

TEST_CASE("field layout") {
  CHECK(encode(make_rrr("add", 1, 2, 3)) == std::vector<Word16>{0x0123});
  CHECK(encode(make_rrr("trap", 0, 0, 0)) == std::vector<Word16>{0xd000});
  CHECK(encode(make_rx("jumpf", 6, 0x0011, 0)) == std::vector<Word16>{0xf604, 0x0011});
  CHECK(encode(make_rx("loadxi", 1, 0x12ab, 2)) == std::vector<Word16>{0xf127, 0x12ab});
  const Instruction j = decode(0xf604, Word16{0x0011});
  CHECK(to_string(j) == "jumpf R6,$0011[R0]");
  CHECK(operands_text(j, false) == "R6,0011[R0]");
  CHECK(to_string(decode(0xf127, Word16{0x12ab})) == "loadxi R1,$12ab[R2]");
}

TEST_CASE("unknown opcodes") {
  const Instruction xx = decode(0xe123);
  CHECK_FALSE(xx.known());
  CHECK(xx.size() == 1);
  CHECK(to_string(xx) == "data $e123");
  const Instruction rx9 = decode(0xf009);
  CHECK_FALSE(rx9.known());
  CHECK(rx9.size() == 1);
  CHECK_THROWS_AS(decode(0xf001), IsaError);
  CHECK_THROWS_AS(make_rrr("lea", 0, 0, 0), IsaError);
  CHECK_THROWS_AS(make_rx("add", 0, 0, 0), IsaError);
  CHECK_THROWS_AS(make_rrr("add", 16, 0, 0), IsaError);
}

TEST_CASE("disassembly") {
  const std::vector<Word16> words{0xf100, 0x0003, 0x0123, 0xe000, 0xd000, 0xf604};
  const auto lines = disassemble(words);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0].text == "lea R1,$0003[R0]");
  CHECK(lines[0].words == std::vector<Word16>{0xf100, 0x0003});
  CHECK(lines[1].address == 2);
  CHECK(lines[1].text == "add R1,R2,R3");
  CHECK(lines[2].text == "data $e000");
  CHECK(lines[3].text == "trap R0,R0,R0");
  // truncated RX at the end
  CHECK(lines[4].address == 5);
  CHECK(lines[4].text == "data $f604");
  CHECK(disassemble(words, 0x100)[1].address == 0x102);
}

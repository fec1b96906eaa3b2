#pragma once

#include "sigma16forge/assembler.hpp"
#include "sigma16forge/catalog.hpp"
#include "sigma16forge/circuits/adders.hpp"
#include "sigma16forge/circuits/alu.hpp"
#include "sigma16forge/circuits/basic.hpp"
#include "sigma16forge/circuits/multipliers.hpp"
#include "sigma16forge/circuits/regfile.hpp"
#include "sigma16forge/circuits/traffic.hpp"
#include "sigma16forge/circuits/word.hpp"
#include "sigma16forge/control.hpp"
#include "sigma16forge/control_text.hpp"
#include "sigma16forge/emulator.hpp"
#include "sigma16forge/isa.hpp"
#include "sigma16forge/m1.hpp"
#include "sigma16forge/netlist.hpp"
#include "sigma16forge/netlist_io.hpp"
#include "sigma16forge/simulator.hpp"
#include "sigma16forge/testbench.hpp"
#include "sigma16forge/util/hex.hpp"
#include "sigma16forge/verify.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sigma16forge.hpp"
#include "sigma16forge/session.hpp"

using namespace sigma16forge;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kFail, "cannot read " + path};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kFail, "cannot write " + path};
  out << text;
}

void print_diagnostics(const std::string& path, const ObjectModule& m) {
  for (const auto& d : m.diagnostics) std::cerr << path << ":" << d.str() << "\n";
}

/// An object file, or assembly source assembled on the fly.
ObjectImage load_program(const std::string& path) {
  const std::string text = read_file(path);
  if (text.rfind(kObjectHeader, 0) == 0) {
    try {
      return read_object(text);
    } catch (const ObjectError& e) {
      throw Failure{kFail, path + ": " + e.what()};
    }
  }
  const ObjectModule m = assemble(text);
  if (!m.ok()) {
    print_diagnostics(path, m);
    throw Failure{kFail, path + ": assembly failed"};
  }
  return image_of(m);
}

std::string register_block(const std::array<Word16, 16>& regs) {
  std::string s;
  for (unsigned r = 0; r < 16; ++r) {
    std::string name = "R" + std::to_string(r);
    s += (r % 4 ? "  " : "") + std::string(name.size() < 3 ? 3 - name.size() : 0, ' ') + name + " = " + hex4(regs[r]);
    if (r % 4 == 3) s += "\n";
  }
  return s;
}

std::string memory_dump(const std::function<Word16(Word16)>& read, Word16 start, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < count; ++i) {
    const auto a = static_cast<Word16>(start + i);
    if (i % 8 == 0) s += hex4(a) + ":";
    s += " " + hex4(read(a));
    if (i % 8 == 7 || i + 1 == count) s += "\n";
  }
  return s;
}

std::pair<Word16, std::size_t> parse_range(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Failure{kUsage, "--dump-mem expects START:COUNT"};
  const auto start = parse_hex(spec.substr(0, colon));
  std::size_t count = 0;
  try {
    count = std::stoul(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw Failure{kUsage, "--dump-mem: bad count"};
  }
  if (!start || *start > 0xffff || count == 0) throw Failure{kUsage, "--dump-mem expects START:COUNT (hex start)"};
  return {static_cast<Word16>(*start), count};
}

M1Variant parse_variant(const std::string& v) {
  if (v == "auto") return M1Variant::Auto;
  if (v == "base") return M1Variant::Base;
  if (v == "loadxi") return M1Variant::Loadxi;
  throw Failure{kUsage, "--variant must be auto, base or loadxi"};
}

bool uses_loadxi(const ObjectImage& img) {
  const auto mem = img.flatten();
  for (const auto& l : disassemble(mem))
    if (l.text.rfind("loadxi ", 0) == 0) return true;
  return false;
}

const CatalogEntry& circuit_by_name(const std::string& name) {
  const CatalogEntry* e = find_circuit(name);
  if (!e) {
    std::string names;
    for (const auto& c : circuit_catalog()) names += " " + c.name;
    throw Failure{kUsage, "unknown circuit '" + name + "'; known:" + names};
  }
  return *e;
}

std::string stats_text(const Netlist& n) {
  const NetlistStats s = stats(n);
  std::ostringstream o;
  o << "components " << s.total << "\n";
  for (Kind k : kAllKinds)
    if (s.count(k)) o << "  " << kind_name(k) << " " << s.count(k) << "\n";
  o << "gates " << s.gate_count << "\n";
  o << "dffs " << s.dff_count << "\n";
  o << "inputs " << n.inputs().size() << "\n";
  o << "outputs " << n.outputs().size() << "\n";
  const SyncReport r = check_synchronous(n);
  o << "synchronous " << (r.ok ? "yes" : "no") << "\n";
  if (r.ok) {
    std::vector<NodeRef> sinks;
    for (const auto& [_, ref] : n.outputs()) sinks.push_back(ref);
    o << "depth " << longest_path(n, sinks) << "\n";
  }
  return o.str();
}

int cmd_asm(const std::string& in, const std::string& out, const std::string& listing) {
  const ObjectModule m = assemble(read_file(in));
  if (!listing.empty()) write_file(listing, listing_text(m));
  if (!m.ok()) {
    print_diagnostics(in, m);
    return kFail;
  }
  write_file(out, write_object(m));
  return kOk;
}

int cmd_emulate(const std::string& path, std::uint64_t max_steps, bool trace, const std::string& dump) {
  std::optional<std::pair<Word16, std::size_t>> range;
  if (!dump.empty()) range = parse_range(dump);
  Emulator emu;
  for (const auto& w : emu.load(load_program(path))) std::cerr << "warning: " << w << "\n";
  const RunResult r = emu.run(max_steps);
  if (trace)
    for (const auto& e : r.events) std::cout << trace_lines(e);
  for (const auto& e : r.events)
    if (e.kind == EventKind::Warning) std::cerr << "warning: " << hex4(e.address) << ": " << e.message << "\n";
  const auto& s = emu.state();
  if (r.status == RunStatus::Halted)
    std::cout << "halted after " << r.steps << " instructions\n";
  else
    std::cout << "stopped: instruction budget of " << max_steps << " exhausted\n";
  std::cout << "pc = " << hex4(s.pc) << "  ir = " << hex4(s.ir) << "  ad = " << hex4(s.adr) << "\n";
  std::cout << register_block(s.regs);
  if (range) std::cout << memory_dump([&](Word16 a) { return emu.mem(a); }, range->first, range->second);
  if (r.status != RunStatus::Halted) {
    std::cerr << "error: program did not halt within " << max_steps << " instructions\n";
    return kFail;
  }
  return kOk;
}

int cmd_m1(const std::string& path, std::uint64_t max_cycles, const std::string& driver_out, const std::string& variant,
           const std::string& dump) {
  std::optional<std::pair<Word16, std::size_t>> range;
  if (!dump.empty()) range = parse_range(dump);
  const ObjectImage img = load_program(path);
  const M1Variant v = parse_variant(variant);
  const bool loadxi = v == M1Variant::Loadxi || (v == M1Variant::Auto && uses_loadxi(img));
  M1Machine m(M1Options{loadxi, std::nullopt});
  Driver driver(m.circuit().algorithm);
  std::string text;
  const bool want_text = !driver_out.empty();
  const M1Run run = run_program(m, img, max_cycles, [&](const CycleRecord& rec) {
    if (want_text)
      text += driver.render(rec) + "\n";
    else
      driver.watch(rec);
  });
  if (want_text) write_file(driver_out, text);
  if (run.status == M1Status::Halted)
    std::cout << "halted after " << run.cycles << " cycles, " << driver.events().size() << " instructions\n";
  else
    std::cout << "stopped: cycle budget of " << max_cycles << " exhausted, " << driver.events().size()
              << " instructions\n";
  std::cout << "pc = " << hex4(run.view.pc) << "  ir = " << hex4(run.view.ir) << "  ad = " << hex4(run.view.ad) << "\n";
  std::cout << register_block(run.view.regs);
  if (range) std::cout << memory_dump([&](Word16 a) { return run.view.mem[a]; }, range->first, range->second);
  if (run.status != M1Status::Halted) {
    std::cerr << "error: M1 did not halt within " << max_cycles << " cycles\n";
    return kFail;
  }
  return kOk;
}

int cmd_verify(const std::string& path, std::uint64_t max, const std::string& variant, const std::string& fault) {
  VerifyOptions opt;
  opt.max_steps = max;
  opt.variant = parse_variant(variant);
  if (!fault.empty()) {
    const auto eq = fault.find('=');
    const std::string bits = eq == std::string::npos ? "" : fault.substr(eq + 1);
    if (bits.size() != 4 || bits.find_first_not_of("01") != std::string::npos)
      throw Failure{kUsage, "--fault-alu expects STATE=abcd, e.g. st_add=0100"};
    opt.alu_fault = std::make_pair(fault.substr(0, eq), static_cast<std::uint8_t>(std::stoi(bits, nullptr, 2)));
  }
  const VerifyReport rep = verify(load_program(path), opt);
  if (rep.ok) {
    std::cout << "ok: " << rep.message << (rep.loadxi ? " (loadxi variant)" : "") << "\n";
    return kOk;
  }
  std::cout << (rep.refused ? "refused: " : "MISMATCH: ") << rep.message << "\n";
  return kFail;
}

int cmd_control(const std::string& action, const std::string& arg) {
  if (action == "print") {
    if (arg.empty() || arg == "m1") {
      std::cout << control_to_text(m1_control_algorithm());
      return kOk;
    }
    if (arg == "m1-loadxi") {
      std::cout << control_to_text(m1_control_algorithm({true, std::nullopt}));
      return kOk;
    }
    throw Failure{kUsage, "control print: expected m1 or m1-loadxi"};
  }
  if (action == "check") {
    if (arg.empty()) throw Failure{kUsage, "control check: expected a file"};
    ControlAlgorithm alg;
    try {
      alg = parse_control(read_file(arg));
    } catch (const ControlError& e) {
      std::cerr << arg << ": " << e.what() << "\n";
      return kFail;
    }
    const auto diags = validate(alg);
    for (const auto& d : diags) std::cerr << arg << ": " << d << "\n";
    if (!diags.empty()) return kFail;
    std::cout << "ok: " << alg.states.size() << " states, " << alg.signals.size() << " signals\n";
    return kOk;
  }
  throw Failure{kUsage, "control: action must be print or check"};
}

int cmd_vcd(const std::string& name, std::size_t cycles, const std::string& out, const std::vector<std::string>& sel) {
  const Netlist n = circuit_by_name(name).build();
  const SimTrace t = trace(n, default_stimulus(n), cycles, n.outputs());
  try {
    write_file(out, export_vcd(t, sel));
  } catch (const VcdError& e) {
    throw Failure{kFail, e.what()};
  }
  return kOk;
}

int cmd_serve(int port, const std::string& static_dir, const std::string& host) {
  SessionManager sessions;
  httplib::Server server;
  if (!static_dir.empty() && !server.set_mount_point("/", static_dir))
    throw Failure{kFail, "cannot serve static files from " + static_dir};
  auto handler = [&](const httplib::Request& req, httplib::Response& res) {
    Json body = nullptr;
    if (!req.body.empty()) {
      body = Json::parse(req.body, nullptr, false);
      if (body.is_discarded()) {
        res.status = 400;
        res.set_content(Json{{"error", "request body is not JSON"}}.dump(), "application/json");
        return;
      }
    }
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const ApiResponse r = sessions.handle(req.method, req.path, body, query);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  const std::string pattern = R"(/api/.*)";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  server.Put(pattern, handler);
  server.Delete(pattern, handler);
  std::cerr << "serving on http://" << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw Failure{kFail, "cannot listen on port " + std::to_string(port)};
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sigma16 toolchain: assembler, emulator, M1 circuit simulator"};
  app.require_subcommand(1);

  std::string in, out, listing, variant = "auto", dump, fault, name, netlist_file, static_dir, host = "127.0.0.1";
  std::string action, arg;
  std::uint64_t max_steps = 100000, max_cycles = 100000, max = 100000;
  std::size_t cycles = 20;
  bool trace_flag = false;
  int port = 8016;
  std::vector<std::string> signals;
  std::string driver_out;

  auto* asm_cmd = app.add_subcommand("asm", "assemble a source file into an object file");
  asm_cmd->add_option("input", in, "assembly source")->required();
  asm_cmd->add_option("-o,--output", out, "object file (default: stdout)");
  asm_cmd->add_option("--listing", listing, "write a listing file");

  auto* dis_cmd = app.add_subcommand("disasm", "disassemble an object file");
  dis_cmd->add_option("input", in, "object file or source")->required();
  dis_cmd->add_option("-o,--output", out, "output file (default: stdout)");

  auto* emu_cmd = app.add_subcommand("emulate", "run a program on the instruction-level emulator");
  emu_cmd->add_option("input", in, "object file or source")->required();
  emu_cmd->add_option("--max-steps", max_steps, "instruction budget")->check(CLI::PositiveNumber);
  emu_cmd->add_flag("--trace", trace_flag, "print one line per event");
  emu_cmd->add_option("--dump-mem", dump, "print memory START:COUNT (hex start)");

  auto* m1_cmd = app.add_subcommand("m1", "run a program on the M1 circuit");
  m1_cmd->add_option("input", in, "object file or source")->required();
  m1_cmd->add_option("--max-cycles", max_cycles, "processor cycle budget")->check(CLI::PositiveNumber);
  m1_cmd->add_option("--driver-output", driver_out, "write the per-cycle driver text ('-' for stdout)");
  m1_cmd->add_option("--variant", variant, "auto, base or loadxi");
  m1_cmd->add_option("--dump-mem", dump, "print memory START:COUNT (hex start)");

  auto* ver_cmd = app.add_subcommand("verify", "compare the emulator and the M1 circuit on a program");
  ver_cmd->add_option("input", in, "object file or source")->required();
  ver_cmd->add_option("--max", max, "emulator instruction budget")->check(CLI::PositiveNumber);
  ver_cmd->add_option("--variant", variant, "auto, base or loadxi");
  ver_cmd->add_option("--fault-alu", fault, "inject a wrong ALU code: STATE=abcd");

  auto* net_cmd = app.add_subcommand("netlist", "export a named circuit as netlist text");
  net_cmd->add_option("circuit", name, "circuit name")->required();
  net_cmd->add_option("-o,--output", out, "output file (default: stdout)");

  auto* stats_cmd = app.add_subcommand("stats", "component census of a circuit");
  stats_cmd->add_option("circuit", name, "circuit name");
  stats_cmd->add_option("--netlist", netlist_file, "read the circuit from a netlist file");

  auto* vcd_cmd = app.add_subcommand("vcd", "simulate a named circuit and write a VCD");
  vcd_cmd->add_option("circuit", name, "circuit name")->required();
  vcd_cmd->add_option("--cycles", cycles, "number of cycles")->check(CLI::PositiveNumber);
  vcd_cmd->add_option("-o,--output", out, "output file (default: stdout)");
  vcd_cmd->add_option("--signals", signals, "outputs to include")->delimiter(',');

  auto* ctl_cmd = app.add_subcommand("control", "print or check control algorithm text");
  ctl_cmd->add_option("action", action, "print | check")->required();
  ctl_cmd->add_option("arg", arg, "print: m1 | m1-loadxi; check: file");

  auto* serve_cmd = app.add_subcommand("serve", "run the session API over HTTP");
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--static", static_dir, "directory of static files to serve at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*asm_cmd) return cmd_asm(in, out, listing);
    if (*dis_cmd) {
      const ObjectImage img = load_program(in);
      const auto mem = img.flatten();
      write_file(out, disassembly_text(mem));
      return kOk;
    }
    if (*emu_cmd) return cmd_emulate(in, max_steps, trace_flag, dump);
    if (*m1_cmd) return cmd_m1(in, max_cycles, driver_out, variant, dump);
    if (*ver_cmd) return cmd_verify(in, max, variant, fault);
    if (*net_cmd) {
      write_file(out, export_netlist(circuit_by_name(name).build()));
      return kOk;
    }
    if (*stats_cmd) {
      if (name.empty() == netlist_file.empty()) throw Failure{kUsage, "stats: give a circuit name or --netlist FILE"};
      if (!netlist_file.empty()) {
        Netlist n;
        try {
          n = import_netlist(read_file(netlist_file));
        } catch (const NetlistError& e) {
          throw Failure{kFail, netlist_file + ": " + e.what()};
        }
        std::cout << stats_text(n);
      } else {
        std::cout << stats_text(circuit_by_name(name).build());
      }
      return kOk;
    }
    if (*vcd_cmd) return cmd_vcd(name, cycles, out, signals);
    if (*ctl_cmd) return cmd_control(action, arg);
    if (*serve_cmd) return cmd_serve(port, static_dir, host);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}

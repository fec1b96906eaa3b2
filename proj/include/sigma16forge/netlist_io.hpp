#pragma once

// Text interchange for netlists (`sigma16forge-netlist v1`) and VCD
// waveform output for simulation traces.

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sigma16forge/netlist.hpp"
#include "sigma16forge/simulator.hpp"

namespace sigma16forge {

inline constexpr std::string_view kNetlistHeader = "sigma16forge-netlist v1";

namespace detail {

inline std::string ref_text(NodeRef r) {
  if (!r.bound()) return "-";
  std::string s = std::to_string(r.id);
  if (r.lane) s += "." + std::to_string(r.lane);
  return s;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

/// One `comp` record per component in id order, then `in` and `out` tables. LF endings.
inline std::string export_netlist(const Netlist& n) {
  std::string out(kNetlistHeader);
  out += '\n';
  const auto& comps = n.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    out += "comp " + std::to_string(i) + ' ';
    if (c.kind == Kind::Constant)
      out += c.value ? "const1" : "const0";
    else
      out += kind_name(c.kind);
    for (const auto& op : c.operands) out += ' ' + detail::ref_text(op);
    out += '\n';
  }
  for (const auto& [name, r] : n.inputs()) out += "in " + name + ' ' + detail::ref_text(r) + '\n';
  for (const auto& [name, r] : n.outputs()) out += "out " + name + ' ' + detail::ref_text(r) + '\n';
  return out;
}

inline Netlist import_netlist(std::string_view text) {
  std::vector<Component> comps;
  std::vector<std::pair<std::string, std::uint32_t>> ins;
  std::vector<std::pair<std::string, std::pair<std::uint32_t, std::uint16_t>>> outs;

  std::size_t lineno = 0;
  bool header = false;
  auto fail = [&](const std::string& msg) -> NetlistError {
    return NetlistError("netlist line " + std::to_string(lineno) + ": " + msg);
  };
  auto parse_ref = [&](std::string_view s) -> NodeRef {
    if (s == "-") return NodeRef{};
    NodeRef r;
    auto dot = s.find('.');
    if (!detail::parse_uint(s.substr(0, dot), r.id)) throw fail("bad node id '" + std::string(s) + "'");
    if (dot != std::string_view::npos && !detail::parse_uint(s.substr(dot + 1), r.lane))
      throw fail("bad lane in '" + std::string(s) + "'");
    return r;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (!header) {
      if (line.substr(0, kNetlistHeader.size()) != kNetlistHeader) throw fail("missing header");
      header = true;
      continue;
    }
    if (tok[0] == "comp") {
      std::uint32_t id;
      if (tok.size() < 3 || !detail::parse_uint(tok[1], id)) throw fail("malformed comp record");
      if (id != comps.size()) throw fail("comp ids must be consecutive from 0");
      Component c;
      if (tok[2] == "const0" || tok[2] == "const1") {
        c.kind = Kind::Constant;
        c.value = tok[2] == "const1";
      } else {
        auto k = kind_from_name(tok[2]);
        if (!k || *k == Kind::Constant) throw fail("unknown kind '" + std::string(tok[2]) + "'");
        c.kind = *k;
      }
      for (std::size_t i = 3; i < tok.size(); ++i) c.operands.push_back(parse_ref(tok[i]));
      comps.push_back(std::move(c));
    } else if (tok[0] == "in" && tok.size() == 3) {
      auto r = parse_ref(tok[2]);
      ins.emplace_back(std::string(tok[1]), r.id);
    } else if (tok[0] == "out" && tok.size() == 3) {
      auto r = parse_ref(tok[2]);
      outs.push_back({std::string(tok[1]), {r.id, r.lane}});
    } else {
      throw fail("unrecognised record");
    }
  }
  if (!header) throw NetlistError("netlist text: missing header");
  return Netlist::restore(std::move(comps), ins, outs);
}

// ---------------------------------------------------------------------------

class VcdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string vcd_id(std::size_t i) {
  std::string s;
  do {
    s += static_cast<char>('!' + i % 94);
    i /= 94;
  } while (i);
  return s;
}
}  // namespace detail

/// Value change dump of the selected signals (all of them when `selection`
/// is empty); one time step per clock cycle, changes only.
inline std::string export_vcd(const SimTrace& t, const std::vector<std::string>& selection = {}) {
  std::vector<const std::pair<std::string, BitStream>*> chosen;
  if (selection.empty()) {
    for (const auto& s : t.signals) chosen.push_back(&s);
  } else {
    for (const auto& name : selection) {
      const std::pair<std::string, BitStream>* found = nullptr;
      for (const auto& s : t.signals)
        if (s.first == name) found = &s;
      if (!found) throw VcdError("unknown signal: " + name);
      chosen.push_back(found);
    }
  }
  std::ostringstream o;
  o << "$version sigma16forge $end\n";
  o << "$timescale 1 ns $end\n";
  o << "$scope module top $end\n";
  for (std::size_t i = 0; i < chosen.size(); ++i) o << "$var wire 1 " << detail::vcd_id(i) << ' ' << chosen[i]->first << " $end\n";
  o << "$upscope $end\n";
  o << "$enddefinitions $end\n";
  for (std::size_t c = 0; c < t.ncycles; ++c) {
    std::string changes;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto& s = chosen[i]->second;
      const bool v = s.at(c);
      if (c == 0 || v != s.at(c - 1)) changes += (v ? '1' : '0') + detail::vcd_id(i) + '\n';
    }
    if (!changes.empty()) o << '#' << c << '\n' << changes;
  }
  o << '#' << t.ncycles << '\n';
  return o.str();
}

}  // namespace sigma16forge

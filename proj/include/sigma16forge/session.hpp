#pragma once

// Interactive sessions over the emulator or the M1 circuit, addressed by a
// small JSON request/response API. The transport (HTTP in the CLI) only maps
// method and path onto SessionManager::handle().
//
// All 16-bit values travel as 4-digit lowercase hex strings. Every session
// response carries "counter": instructions executed (emulator) or
// processor cycles simulated (m1) since the last reset.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigma16forge/assembler.hpp"
#include "sigma16forge/emulator.hpp"
#include "sigma16forge/m1.hpp"
#include "sigma16forge/testbench.hpp"

namespace sigma16forge {

using Json = nlohmann::ordered_json;

struct ApiResponse {
  int status = 200;
  Json body;
};

class ApiError : public std::runtime_error {
 public:
  ApiError(int status, const std::string& msg) : std::runtime_error(msg), status_(status) {}
  [[nodiscard]] int status() const { return status_; }

 private:
  int status_;
};

class Session {
 public:
  enum class Mode { Emulator, M1 };

  Session(Mode mode, ObjectImage img, bool loadxi) : mode_(mode), image_(std::move(img)), loadxi_(loadxi) { reset(); }

  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }
  [[nodiscard]] bool halted() const { return halted_; }
  std::mutex& mutex() { return mu_; }

  void reset() {
    counter_ = 0;
    halted_ = false;
    if (mode_ == Mode::Emulator) {
      emu_.load(image_);
    } else {
      if (!m1_) m1_ = std::make_unique<M1Machine>(M1Options{loadxi_, std::nullopt});
      m1_->boot(image_);
      driver_ = std::make_unique<Driver>(m1_->circuit().algorithm);
      last_.reset();
    }
  }

  /// n instructions or n cycles.
  Json step(std::uint64_t n) {
    if (halted_) throw ApiError(409, "session has halted; reset it to continue");
    Json events = Json::array();
    for (std::uint64_t i = 0; i < n && !halted_; ++i) advance(events);
    return events;
  }

  /// Runs until halt, a breakpoint (checked before each instruction fetch
  /// except the first), or the budget is used.
  std::string run(std::uint64_t budget, Json& events) {
    if (halted_) throw ApiError(409, "session has halted; reset it to continue");
    for (std::uint64_t i = 0; i < budget; ++i) {
      if (i > 0 && at_breakpoint()) return "breakpoint";
      advance(events);
      if (halted_) return "halted";
    }
    return "budget";
  }

  void set_breakpoint(Word16 a) { breakpoints_.insert(a); }
  void clear_breakpoint(Word16 a) { breakpoints_.erase(a); }
  [[nodiscard]] const std::set<Word16>& breakpoints() const { return breakpoints_; }

  Json registers() {
    Json j;
    Json regs = Json::array();
    if (mode_ == Mode::Emulator) {
      const auto& s = emu_.state();
      j["pc"] = hex4(s.pc);
      j["ir"] = hex4(s.ir);
      j["ad"] = hex4(s.adr);
      for (auto r : s.regs) regs.push_back(hex4(r));
    } else {
      const MachineView v = m1_->view();
      j["pc"] = hex4(v.pc);
      j["ir"] = hex4(v.ir);
      j["ad"] = hex4(v.ad);
      for (auto r : v.regs) regs.push_back(hex4(r));
    }
    j["registers"] = regs;
    return j;
  }

  Json memory(Word16 start, std::size_t count) {
    Json words = Json::array();
    for (std::size_t i = 0; i < count; ++i) words.push_back(hex4(read(static_cast<Word16>(start + i))));
    return words;
  }

  void poke(Word16 a, Word16 v) {
    if (mode_ == Mode::Emulator)
      emu_.state().mem[a] = v;
    else
      m1_->poke_memory(a, v);
  }

  /// The most recent cycle (m1 only): the one about to be executed if none
  /// has run yet.
  Json cycle_record() {
    if (mode_ != Mode::M1) throw ApiError(400, "cycle records exist only in m1 mode");
    const CycleRecord rec = last_ ? *last_ : m1_->sample();
    Json j;
    j["cycle"] = rec.cycle;
    j["state"] = rec.state().value_or("");
    Json taps = Json::object();
    for (const auto& [k, v] : rec.taps) taps[k] = hex4(v);
    j["taps"] = taps;
    j["text"] = format_cycle(rec, driver_->script());
    return j;
  }

 private:
  [[nodiscard]] Word16 read(Word16 a) const { return mode_ == Mode::Emulator ? emu_.mem(a) : m1_->read_memory(a); }

  bool at_breakpoint() {
    if (breakpoints_.empty()) return false;
    if (mode_ == Mode::Emulator) return breakpoints_.count(emu_.state().pc) > 0;
    const CycleRecord next = m1_->sample();
    return next.bit(m1_->circuit().algorithm.initial) && breakpoints_.count(next.at("pc")) > 0;
  }

  void advance(Json& events) {
    if (mode_ == Mode::Emulator) {
      for (const auto& e : emu_.step()) {
        std::istringstream lines(trace_lines(e));
        for (std::string line; std::getline(lines, line);) events.push_back(line);
      }
      halted_ = emu_.halted();
    } else {
      const CycleRecord rec = m1_->step();
      for (const auto& m : driver_->watch(rec)) events.push_back(m);
      halted_ = rec.bit("halted");
      last_ = rec;
    }
    ++counter_;
  }

  Mode mode_;
  ObjectImage image_;
  bool loadxi_;
  Emulator emu_;
  std::unique_ptr<M1Machine> m1_;
  std::unique_ptr<Driver> driver_;
  std::optional<CycleRecord> last_;
  std::set<Word16> breakpoints_;
  std::uint64_t counter_ = 0;
  bool halted_ = false;
  std::mutex mu_;
};

class SessionManager {
 public:
  /// method: GET POST PUT DELETE; path like /api/sessions/3/step; body JSON
  /// (may be null); query parameters for GET.
  ApiResponse handle(const std::string& method, const std::string& path, const Json& body = nullptr,
                     const std::map<std::string, std::string>& query = {}) {
    try {
      return route(method, split(path), body, query);
    } catch (const ApiError& e) {
      return {e.status(), Json{{"error", e.what()}}};
    } catch (const Json::exception& e) {
      return {400, Json{{"error", std::string("bad request body: ") + e.what()}}};
    } catch (const std::exception& e) {
      return {400, Json{{"error", e.what()}}};
    }
  }

  [[nodiscard]] std::size_t size() {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
      if (c == '/') {
        if (!cur.empty()) parts.push_back(cur);
        cur.clear();
      } else if (c == '?') {
        break;
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
  }

  static Word16 word_arg(const std::string& s, const char* what) {
    const auto v = s.size() <= 4 ? parse_hex(s) : std::nullopt;
    if (!v) throw ApiError(400, std::string("bad ") + what + " '" + s + "' (expected up to 4 hex digits)");
    return static_cast<Word16>(*v);
  }
  static Word16 word_field(const Json& body, const char* key) {
    if (!body.is_object() || !body.contains(key)) throw ApiError(400, std::string("missing field '") + key + "'");
    const Json& v = body[key];
    if (v.is_string()) return word_arg(v.get<std::string>(), key);
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0 && v.get<std::int64_t>() < 65536)
      return static_cast<Word16>(v.get<std::int64_t>());
    throw ApiError(400, std::string("bad field '") + key + "'");
  }
  static std::uint64_t count_field(const Json& body, const char* key, std::uint64_t dflt) {
    if (!body.is_object() || !body.contains(key)) return dflt;
    const Json& v = body[key];
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
      throw ApiError(400, std::string("'") + key + "' must be a positive integer");
    return v.get<std::uint64_t>();
  }

  static Json assemble_json(const std::string& source) {
    const ObjectModule m = assemble(source);
    Json diags = Json::array();
    for (const auto& d : m.diagnostics) diags.push_back({{"line", d.line}, {"message", d.message}});
    Json j{{"ok", m.ok()}, {"diagnostics", diags}};
    if (m.ok()) {
      j["object"] = write_object(m);
      j["listing"] = listing_text(m);
    }
    return j;
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "no session '" + id + "'");
    return it->second;
  }

  static Json with_counter(Session& s, Json j) {
    j["counter"] = s.counter();
    j["halted"] = s.halted();
    return j;
  }

  ApiResponse route(const std::string& method, const std::vector<std::string>& p, const Json& body,
                    const std::map<std::string, std::string>& query) {
    if (p.size() < 2 || p[0] != "api") throw ApiError(404, "unknown endpoint");
    if (p[1] == "assemble" && p.size() == 2 && method == "POST") {
      if (!body.is_object() || !body.contains("source") || !body["source"].is_string())
        throw ApiError(400, "missing field 'source'");
      return {200, assemble_json(body["source"].get<std::string>())};
    }
    if (p[1] != "sessions") throw ApiError(404, "unknown endpoint");
    if (p.size() == 2) {
      if (method == "GET") {
        std::lock_guard lock(mu_);
        Json ids = Json::array();
        for (const auto& [id, s] : sessions_) ids.push_back(id);
        return {200, Json{{"sessions", ids}}};
      }
      if (method == "POST") return create(body);
      throw ApiError(405, "method not allowed");
    }
    const std::string& id = p[2];
    if (p.size() == 3 && method == "DELETE") {
      std::lock_guard lock(mu_);
      if (!sessions_.erase(id)) throw ApiError(404, "no session '" + id + "'");
      return {200, Json{{"deleted", id}}};
    }
    auto s = find(id);
    std::lock_guard lock(s->mutex());
    const std::string action = p.size() > 3 ? p[3] : "";
    if (p.size() == 3 && method == "GET") return {200, summary(id, *s)};
    if (action == "step" && method == "POST" && p.size() == 4) {
      Json ev = s->step(count_field(body, "n", 1));
      return {200, with_counter(*s, Json{{"events", ev}})};
    }
    if (action == "run" && method == "POST" && p.size() == 4) {
      Json ev = Json::array();
      const std::string why = s->run(count_field(body, "budget", 100000), ev);
      return {200, with_counter(*s, Json{{"stopped", why}, {"events", ev}})};
    }
    if (action == "breakpoints" && p.size() == 5 && (method == "PUT" || method == "DELETE")) {
      const Word16 a = word_arg(p[4], "address");
      if (method == "PUT")
        s->set_breakpoint(a);
      else
        s->clear_breakpoint(a);
      return {200, with_counter(*s, Json{{"breakpoints", breakpoint_list(*s)}})};
    }
    if (action == "breakpoints" && p.size() == 4 && method == "GET")
      return {200, with_counter(*s, Json{{"breakpoints", breakpoint_list(*s)}})};
    if (action == "registers" && method == "GET" && p.size() == 4) return {200, with_counter(*s, s->registers())};
    if (action == "memory" && method == "GET" && p.size() == 4) {
      const Word16 start = query.count("start") ? word_arg(query.at("start"), "start") : 0;
      std::size_t count = 16;
      if (query.count("count")) {
        try {
          count = std::stoul(query.at("count"));
        } catch (const std::exception&) {
          throw ApiError(400, "bad count");
        }
      }
      if (count == 0 || count > 4096) throw ApiError(400, "count must be 1..4096");
      return {200, with_counter(*s, Json{{"start", hex4(start)}, {"words", s->memory(start, count)}})};
    }
    if (action == "cycle" && method == "GET" && p.size() == 4) return {200, with_counter(*s, s->cycle_record())};
    if (action == "poke" && method == "POST" && p.size() == 4) {
      const Word16 a = word_field(body, "address"), v = word_field(body, "value");
      s->poke(a, v);
      return {200, with_counter(*s, Json{{"address", hex4(a)}, {"value", hex4(v)}})};
    }
    if (action == "reset" && method == "POST" && p.size() == 4) {
      s->reset();
      return {200, with_counter(*s, Json::object())};
    }
    throw ApiError(404, "unknown endpoint");
  }

  static Json breakpoint_list(Session& s) {
    Json b = Json::array();
    for (auto a : s.breakpoints()) b.push_back(hex4(a));
    return b;
  }

  static Json summary(const std::string& id, Session& s) {
    return with_counter(s, Json{{"id", id}, {"mode", s.mode() == Session::Mode::Emulator ? "emulator" : "m1"}});
  }

  ApiResponse create(const Json& body) {
    if (!body.is_object()) throw ApiError(400, "expected a JSON object");
    const std::string mode = body.value("mode", "emulator");
    Session::Mode m;
    if (mode == "emulator")
      m = Session::Mode::Emulator;
    else if (mode == "m1")
      m = Session::Mode::M1;
    else
      throw ApiError(400, "mode must be 'emulator' or 'm1'");
    ObjectImage img;
    if (body.contains("object")) {
      try {
        img = read_object(body["object"].get<std::string>());
      } catch (const ObjectError& e) {
        throw ApiError(400, e.what());
      }
    } else if (body.contains("source")) {
      const ObjectModule om = assemble(body["source"].get<std::string>());
      if (!om.ok()) {
        Json diags = Json::array();
        for (const auto& d : om.diagnostics) diags.push_back({{"line", d.line}, {"message", d.message}});
        return {400, Json{{"error", "source has diagnostics"}, {"diagnostics", diags}}};
      }
      img = image_of(om);
    } else {
      throw ApiError(400, "need 'object' or 'source'");
    }
    const bool loadxi = body.value("variant", std::string("base")) == "loadxi";
    auto s = std::make_shared<Session>(m, std::move(img), loadxi);
    std::string id;
    {
      std::lock_guard lock(mu_);
      id = std::to_string(++next_id_);
      sessions_[id] = s;
    }
    std::lock_guard lock(s->mutex());
    return {201, summary(id, *s)};
  }

  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 0;
};

}  // namespace sigma16forge

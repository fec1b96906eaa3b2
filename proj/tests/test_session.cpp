#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "sigma16forge/session.hpp"

using namespace sigma16forge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string source(const std::string& name) { return slurp(std::string(SIGMA16_PROGRAMS) + "/" + name + ".asm.txt"); }

std::string create(SessionManager& sm, const std::string& mode, const std::string& src) {
  const auto r = sm.handle("POST", "/api/sessions", Json{{"mode", mode}, {"source", src}});
  REQUIRE(r.status == 201);
  return r.body["id"].get<std::string>();
}

}  // namespace

TEST_CASE("assemble endpoint") {
  SessionManager sm;
  auto r = sm.handle("POST", "/api/assemble", Json{{"source", "  lea R1,1[R0]\n  trap R0,R0,R0\n"}});
  REQUIRE(r.status == 200);
  CHECK(r.body["ok"] == true);
  CHECK(r.body["object"].get<std::string>().find("code 0000 f100") != std::string::npos);
  r = sm.handle("POST", "/api/assemble", Json{{"source", "  bogus\n"}});
  CHECK(r.status == 200);
  CHECK(r.body["ok"] == false);
  CHECK(r.body["diagnostics"][0]["line"] == 1);
  CHECK(sm.handle("POST", "/api/assemble", Json::object()).status == 400);
}

TEST_CASE("emulator session lifecycle") {
  SessionManager sm;
  const std::string id = create(sm, "emulator", source("arraymax"));
  const std::string base = "/api/sessions/" + id;
  auto r = sm.handle("GET", base);
  CHECK(r.body["mode"] == "emulator");
  CHECK(r.body["counter"] == 0);

  r = sm.handle("POST", base + "/step", Json{{"n", 2}});
  REQUIRE(r.status == 200);
  CHECK(r.body["counter"] == 2);
  CHECK(r.body["events"][0].get<std::string>().rfind("EXEC\t0000\tlea", 0) == 0);

  r = sm.handle("GET", base + "/registers");
  CHECK(r.body["registers"][1] == "0001");
  CHECK(r.body["registers"][2] == "0006");
  CHECK(r.body["pc"] == "0004");

  CHECK(sm.handle("PUT", base + "/breakpoints/000d").status == 200);
  r = sm.handle("POST", base + "/run", Json::object());
  CHECK(r.body["stopped"] == "breakpoint");
  CHECK(sm.handle("GET", base + "/registers").body["pc"] == "000d");
  r = sm.handle("GET", base + "/breakpoints");
  CHECK(r.body["breakpoints"] == Json::array({"000d"}));
  sm.handle("DELETE", base + "/breakpoints/000d");

  r = sm.handle("POST", base + "/run", Json{{"budget", 3}});
  CHECK(r.body["stopped"] == "budget");
  r = sm.handle("POST", base + "/run", Json::object());
  CHECK(r.body["stopped"] == "halted");
  CHECK(r.body["halted"] == true);
  CHECK(sm.handle("POST", base + "/step", nullptr).status == 409);

  r = sm.handle("GET", base + "/memory", nullptr, {{"start", "17"}, {"count", "2"}});
  REQUIRE(r.status == 200);
  CHECK(r.body["words"] == Json::array({"0006", "0028"}));

  CHECK(sm.handle("POST", base + "/reset", Json::object()).body["counter"] == 0);
  CHECK(sm.handle("GET", base + "/memory", nullptr, {{"start", "18"}, {"count", "1"}}).body["words"][0] == "0000");
  CHECK(sm.handle("POST", base + "/poke", Json{{"address", "001a"}, {"value", 99}}).status == 200);
  sm.handle("POST", base + "/run", Json::object());
  CHECK(sm.handle("GET", base + "/memory", nullptr, {{"start", "0018"}, {"count", "1"}}).body["words"][0] == "0063");

  CHECK(sm.handle("GET", base + "/cycle").status == 400);
  CHECK(sm.handle("DELETE", base).status == 200);
  CHECK(sm.handle("GET", base).status == 404);
  CHECK(sm.size() == 0);
}

TEST_CASE("m1 session") {
  SessionManager sm;
  const std::string id = create(sm, "m1", source("jumpf_demo"));
  const std::string base = "/api/sessions/" + id;
  auto r = sm.handle("GET", base + "/cycle");
  REQUIRE(r.status == 200);
  CHECK(r.body["state"] == "st_instr_fet");
  CHECK(r.body["cycle"] == 26);

  r = sm.handle("POST", base + "/step", Json{{"n", 41}});
  CHECK(r.body["counter"] == 41);
  r = sm.handle("GET", base + "/cycle");
  CHECK(r.body["cycle"] == 66);
  r = sm.handle("POST", base + "/step", Json::object());
  r = sm.handle("GET", base + "/cycle");
  CHECK(r.body["cycle"] == 67);
  CHECK(r.body["state"] == "st_jumpf1");
  CHECK(r.body["taps"]["p"] == "0331");
  CHECK(r.body["text"].get<std::string>().rfind("Clock cycle 67", 0) == 0);

  sm.handle("PUT", base + "/breakpoints/0012");
  r = sm.handle("POST", base + "/run", Json::object());
  CHECK(r.body["stopped"] == "breakpoint");
  CHECK(sm.handle("GET", base + "/registers").body["pc"] == "0012");
  r = sm.handle("POST", base + "/run", Json::object());
  CHECK(r.body["stopped"] == "halted");
  bool saw_exec = false;
  for (const auto& e : r.body["events"]) saw_exec = saw_exec || e.get<std::string>().find("Executed instruction") == 0;
  CHECK(saw_exec);
  r = sm.handle("GET", base + "/registers");
  CHECK(r.body["registers"][3] == "001b");
}

TEST_CASE("request errors") {
  SessionManager sm;
  CHECK(sm.handle("GET", "/api/nothing").status == 404);
  CHECK(sm.handle("GET", "/other").status == 404);
  CHECK(sm.handle("PUT", "/api/sessions").status == 405);
  CHECK(sm.handle("POST", "/api/sessions", Json{{"mode", "fpga"}, {"source", ""}}).status == 400);
  CHECK(sm.handle("POST", "/api/sessions", Json{{"mode", "m1"}}).status == 400);
  CHECK(sm.handle("POST", "/api/sessions", Json{{"object", "not an object"}}).status == 400);
  const auto bad = sm.handle("POST", "/api/sessions", Json{{"source", " bogus R1\n"}});
  CHECK(bad.status == 400);
  CHECK(bad.body["diagnostics"].size() == 1);
  CHECK(sm.handle("GET", "/api/sessions/42/registers").status == 404);
  const std::string id = create(sm, "emulator", "  trap R0,R0,R0\n");
  const std::string base = "/api/sessions/" + id;
  CHECK(sm.handle("POST", base + "/step", Json{{"n", 0}}).status == 400);
  CHECK(sm.handle("POST", base + "/step", Json{{"n", "x"}}).status == 400);
  CHECK(sm.handle("POST", base + "/poke", Json{{"address", "12345"}, {"value", 1}}).status == 400);
  CHECK(sm.handle("POST", base + "/poke", Json{{"address", 1}, {"value", 70000}}).status == 400);
  CHECK(sm.handle("POST", base + "/poke", Json{{"value", 1}}).status == 400);
  CHECK(sm.handle("PUT", base + "/breakpoints/xyz").status == 400);
  CHECK(sm.handle("GET", base + "/memory", nullptr, {{"count", "0"}}).status == 400);
  CHECK(sm.handle("GET", base + "/frobnicate").status == 404);
  CHECK(sm.handle("GET", "/api/sessions").body["sessions"] == Json::array({id}));
}

TEST_CASE("sessions are independent") {
  SessionManager sm;
  const std::string a = create(sm, "emulator", source("arraymax"));
  const std::string b = create(sm, "emulator", source("arraymax"));
  CHECK(a != b);
  sm.handle("POST", "/api/sessions/" + a + "/step", Json{{"n", 5}});
  CHECK(sm.handle("GET", "/api/sessions/" + b).body["counter"] == 0);
}

TEST_CASE("the API answers over HTTP") {
  SessionManager sm;
  httplib::Server server;
  auto bridge = [&](const httplib::Request& req, httplib::Response& res) {
    Json body = nullptr;
    if (!req.body.empty()) body = Json::parse(req.body, nullptr, false);
    std::map<std::string, std::string> q;
    for (const auto& [k, v] : req.params) q[k] = v;
    const ApiResponse r = sm.handle(req.method, req.path, body, q);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get("/api/.*", bridge);
  server.Post("/api/.*", bridge);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Post("/api/sessions", Json{{"mode", "emulator"}, {"source", "  lea R1,5[R0]\n  trap R0,R0,R0\n"}}.dump(),
                      "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  const std::string id = Json::parse(res->body)["id"];
  res = cli.Post(("/api/sessions/" + id + "/run").c_str(), "{}", "application/json");
  REQUIRE(res);
  CHECK(Json::parse(res->body)["stopped"] == "halted");
  res = cli.Get(("/api/sessions/" + id + "/memory?start=0000&count=2").c_str());
  REQUIRE(res);
  CHECK(Json::parse(res->body)["words"] == Json::array({"f100", "0005"}));
  res = cli.Get("/api/missing");
  REQUIRE(res);
  CHECK(res->status == 404);

  server.stop();
  t.join();
}

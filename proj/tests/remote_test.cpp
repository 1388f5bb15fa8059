#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "helpers.hpp"
#include "triage/adjudicator.hpp"
#include "triage/errors.hpp"
#include "triage/remote.hpp"

using namespace triage;
using json = nlohmann::json;
using triage::testing::make_test_bundle;

namespace {

// Minimal chat-completions stub. Each incoming request pops the next scripted
// response; tool-call responses are synthesized on demand.
class ChatStub {
 public:
  using Responder = std::function<json(const json& request)>;

  explicit ChatStub(Responder responder) : responder_(std::move(responder)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   ++requests_;
                   json body = json::parse(req.body, nullptr, false);
                   json reply = responder_(body);
                   res.set_content(reply.dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~ChatStub() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  RemoteEndpointConfig config() const {
    RemoteEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    cfg.model = "stub-model";
    cfg.timeout_s = 5;
    cfg.max_tool_calls = 3;
    cfg.usd_per_1k_prompt_tokens = 1.0;
    cfg.usd_per_1k_completion_tokens = 2.0;
    return cfg;
  }

  int requests() const { return requests_.load(); }

 private:
  httplib::Server server_;
  Responder responder_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
};

json completion_text(const std::string& content) {
  return json{{"choices", json::array({json{{"message", json{{"role", "assistant"},
                                                             {"content", content}}}}})},
              {"usage", json{{"prompt_tokens", 100}, {"completion_tokens", 50}}}};
}

json completion_tool_call(const std::string& id, const std::string& fn, const json& args) {
  json call{{"id", id},
            {"type", "function"},
            {"function", json{{"name", fn}, {"arguments", args.dump()}}}};
  return json{{"choices",
               json::array({json{{"message", json{{"role", "assistant"},
                                                   {"content", nullptr},
                                                   {"tool_calls", json::array({call})}}}}})},
              {"usage", json{{"prompt_tokens", 80}, {"completion_tokens", 10}}}};
}

TechniqueBrief brief_for(const char* id) {
  TechniqueBrief b;
  b.system_prompt = std::string(kAuditorSystemPrompt);
  b.technique_id = id;
  b.technique_name = "Exfiltration Over C2 Channel";
  b.guidance = "Check request bodies.";
  return b;
}

}  // namespace

TEST_CASE("remote backend returns a canned verdict and accounts tokens") {
  ChatStub stub([](const json&) {
    return completion_text(
        R"({"status":"confirmed","confidence":"high","evidence":[
            {"source":"net:2","observation":"secret in body","relevance":"exfil"}]})");
  });
  RemoteBackend backend(stub.config());
  int tool_calls = 0;
  auto reply = backend.adjudicate(brief_for("T1041"), [&](const json&) {
    ++tool_calls;
    return json::object();
  });
  CHECK(tool_calls == 0);
  CHECK(reply.prompt_tokens == 100);
  CHECK(reply.completion_tokens == 50);
  CHECK(reply.usd == doctest::Approx(100.0 / 1000 * 1.0 + 50.0 / 1000 * 2.0));
  CHECK(reply.raw_output.find("confirmed") != std::string::npos);
}

TEST_CASE("remote backend brokers tool calls to the evidence handler") {
  auto bundle = make_test_bundle();
  seal(bundle);
  EvidenceApi api(bundle);

  std::atomic<int> round{0};
  ChatStub stub([&](const json& request) {
    int r = round++;
    if (r == 0)
      return completion_tool_call("c1", "get_session", json{{"filter", "method:POST"}});
    // After the tool result arrives, the conversation must contain it.
    bool saw_tool_message = false;
    for (const auto& m : request["messages"]) {
      if (m.value("role", "") == "tool" &&
          m.value("content", "").find("sink.collector-z.cc") != std::string::npos)
        saw_tool_message = true;
    }
    CHECK(saw_tool_message);
    return completion_text(
        R"({"status":"confirmed","confidence":"high","evidence":[
            {"source":"net:2","observation":"POST carries the persona secret",
             "relevance":"exfiltration"}]})");
  });

  RemoteBackend backend(stub.config());
  auto reply = backend.adjudicate(brief_for("T1041"),
                                  [&](const json& req) { return api.handle(req); });
  CHECK(stub.requests() == 2);
  auto parsed = extract_json_object(reply.raw_output);
  REQUIRE(parsed.has_value());
  CHECK(validate_verdict(*parsed, bundle).accepted);
}

TEST_CASE("tool budget exhaustion forces a final answer") {
  std::atomic<int> round{0};
  ChatStub stub([&](const json& request) {
    int r = round++;
    if (r < 5)
      return completion_tool_call("c" + std::to_string(r), "get_session", json::object());
    // The forced-answer nudge must be present once the budget is gone.
    bool nudged = false;
    for (const auto& m : request["messages"]) {
      if (m.value("role", "") == "user" &&
          m.value("content", "").find("Tool budget exhausted") != std::string::npos)
        nudged = true;
    }
    CHECK(nudged);
    return completion_text(R"({"status":"not_observed","confidence":"low","evidence":[]})");
  });

  RemoteBackend backend(stub.config());  // budget 3
  int brokered = 0;
  auto reply = backend.adjudicate(brief_for("T1041"), [&](const json& req) {
    ++brokered;
    return json{{"request_id", req.value("request_id", json(nullptr))},
                {"result", json::object()}};
  });
  CHECK(brokered == 3);  // budget enforced
  CHECK(reply.raw_output.find("not_observed") != std::string::npos);
}

TEST_CASE("transport failures surface as BackendError") {
  RemoteEndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:1/v1";  // nothing listens there
  cfg.timeout_s = 1;
  RemoteBackend backend(cfg);
  CHECK_THROWS_AS(backend.adjudicate(brief_for("T1041"), [](const json&) {
    return json::object();
  }),
                  BackendError);

  ChatStub bad([](const json&) { return json{{"oops", true}}; });
  RemoteBackend backend2(bad.config());
  CHECK_THROWS_AS(backend2.adjudicate(brief_for("T1041"),
                                      [](const json&) { return json::object(); }),
                  BackendError);
}

TEST_CASE("remote end to end: invalid replies retry, then degrade") {
  auto bundle = make_test_bundle();
  seal(bundle);
  EvidenceApi api(bundle);
  auto catalog = TechniqueCatalog::builtin();
  const TechniqueDef* def = catalog.find("T1041");
  REQUIRE(def != nullptr);

  // Always replies with prose, never a valid verdict.
  ChatStub stub([](const json&) { return completion_text("I think it looks fine."); });
  RemoteBackend backend(stub.config());
  auto v = adjudicate_technique(api, *def, backend, 1);
  CHECK(v.degraded);
  CHECK(v.status == VerdictStatus::not_observed);
  CHECK(stub.requests() == 2);  // initial + one retry
}

TEST_CASE("remote completion helper for the report writer") {
  ChatStub stub([](const json& request) {
    CHECK(request["messages"][0]["role"] == "system");
    return completion_text("## Executive Summary\nAll clear.");
  });
  auto result = remote_complete(stub.config(), "system prompt", "user prompt");
  CHECK(result.content.find("Executive Summary") != std::string::npos);
  CHECK(result.prompt_tokens == 100);
}

#include <doctest.h>

#include <sstream>
#include <thread>

#include "helpers.hpp"
#include "triage/errors.hpp"
#include "triage/evidence_api.hpp"

using namespace triage;
using json = nlohmann::json;
using triage::testing::make_test_bundle;

namespace {

EvidenceBundle sealed_bundle() {
  auto b = make_test_bundle();
  seal(b);
  return b;
}

}  // namespace

TEST_CASE("filter grammar: keys, status classes, rejection") {
  auto f = FilterExpr::parse("host:evil.example status:4xx method:POST");
  CHECK(f.clauses.size() == 3);
  CHECK_THROWS_AS(FilterExpr::parse("rank:5"), FilterParseError);
  CHECK_THROWS_AS(FilterExpr::parse("host"), FilterParseError);
  CHECK_THROWS_AS(FilterExpr::parse("status:4y"), FilterParseError);
  try {
    FilterExpr::parse("host:x rank:5");
    FAIL("expected FilterParseError");
  } catch (const FilterParseError& e) {
    CHECK(e.clause == "rank:5");
  }

  NetworkRecord r;
  r.host = "sub.evil.example";
  r.url = "https://sub.evil.example/p?q=1";
  r.method = "post";
  r.status = 403;
  r.mime_type = "text/html";
  CHECK(FilterExpr::parse("host:evil.example").matches(r));
  CHECK(FilterExpr::parse("status:4xx").matches(r));
  CHECK(FilterExpr::parse("status:403").matches(r));
  CHECK_FALSE(FilterExpr::parse("status:404").matches(r));
  CHECK(FilterExpr::parse("method:POST").matches(r));
  CHECK(FilterExpr::parse("url:q=1").matches(r));
  CHECK(FilterExpr::parse("mime:html").matches(r));
  CHECK_FALSE(FilterExpr::parse("host:benign.example").matches(r));
}

TEST_CASE("get_session: windowing, filtering, totals") {
  auto bundle = sealed_bundle();
  EvidenceApi api(bundle);

  // No time, no filter: everything, untruncated.
  json all = api.get_session(std::nullopt, std::nullopt);
  CHECK(all["records"].size() == 3);
  CHECK(all["total_matched"] == 3);
  CHECK(all["truncated"] == false);

  // Window around t=0.2 keeps the records at rel 0.0 and 0.4.
  json windowed = api.get_session(RelTime::from_seconds(0.2), std::nullopt);
  CHECK(windowed["records"].size() == 2);
  CHECK(windowed.contains("window"));

  // Conjunctive filter on host.
  json filtered =
      api.get_session(std::nullopt, FilterExpr::parse("host:sink.collector-z.cc"));
  REQUIRE(filtered["records"].size() == 1);
  CHECK(filtered["records"][0]["seq"] == 2);

  // The exfil record body carries a persona secret: flagged, not redacted.
  CHECK(filtered["records"][0]["secret_match"] == true);
  CHECK(filtered["records"][0]["request_body"].get<std::string>().find("ZK29YcCITMb!") !=
        std::string::npos);

  // Windowed + filtered, brute-force cross-check.
  json both = api.get_session(RelTime::from_seconds(0.2), FilterExpr::parse("url:app.js"));
  REQUIRE(both["records"].size() == 1);
  CHECK(both["records"][0]["seq"] == 1);

  CHECK_THROWS_AS(api.get_session(RelTime::from_seconds(99.0), std::nullopt),
                  OutOfSessionError);
}

TEST_CASE("get_session pagination: concatenated pages equal the oracle") {
  auto b = make_test_bundle();
  b.network.clear();
  for (int i = 0; i < 137; ++i) {
    NetworkRecord r;
    r.seq = static_cast<std::uint64_t>(i);
    r.started_at = b.epoch_t0 + 0.01 * i;
    r.method = "GET";
    r.url = "https://bulk.example/" + std::to_string(i);
    r.host = "bulk.example";
    r.status = 200;
    b.network.push_back(std::move(r));
  }
  seal(b);
  EvidenceApi api(b);

  std::vector<std::uint64_t> seen;
  std::size_t offset = 0;
  while (true) {
    json page = api.get_session(std::nullopt, std::nullopt, offset);
    for (const auto& r : page["records"]) seen.push_back(r["seq"].get<std::uint64_t>());
    CHECK(page["records"].size() <= kSessionPageCap);
    if (!page["truncated"].get<bool>()) break;
    offset += page["records"].size();
  }
  REQUIRE(seen.size() == 137);
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
}

TEST_CASE("get_screenshot follows the at-or-before rule") {
  auto bundle = sealed_bundle();
  EvidenceApi api(bundle);
  json shot = api.get_screenshot(RelTime::from_seconds(0.7));
  CHECK(shot["frame_no"] == 1);
  CHECK(shot["image_ref"] == "frm-1");
  CHECK_THROWS_AS(api.get_screenshot(RelTime::from_seconds(99.0)), OutOfSessionError);

  auto late = make_test_bundle();
  late.frames.erase(late.frames.begin());  // first frame now at 0.5
  seal(late);
  EvidenceApi api2(late);
  CHECK_THROWS_AS(api2.get_screenshot(RelTime::from_seconds(0.2)), NoFrameError);
}

TEST_CASE("retrieve_resource prefix semantics and caps") {
  auto bundle = sealed_bundle();
  EvidenceApi api(bundle);

  json r = api.retrieve_resource("res-00");
  REQUIRE(r["resources"].size() == 2);
  CHECK(r["resources"][0]["resource_id"] == "res-001-landing.html");
  CHECK(r["resources"][1]["resource_id"] == "res-002-app.js");

  CHECK(api.retrieve_resource("zzz")["resources"].empty());
  CHECK_THROWS_AS(api.retrieve_resource(""), BadPrefixError);

  // Content over the per-entry cap is truncated with the flag set.
  auto big = make_test_bundle();
  big.resources.put_text("res-003-big.js", ResourceKind::script,
                         std::string(3 * kResourceContentCap, 'x'));
  seal(big);
  EvidenceApi api3(big);
  json got = api3.retrieve_resource("res-003");
  REQUIRE(got["resources"].size() == 1);
  CHECK(got["resources"][0]["content_truncated"] == true);
  CHECK(got["resources"][0]["content"].get<std::string>().size() == kResourceContentCap);
  CHECK(got["resources"][0]["size"] == 3 * kResourceContentCap);
}

TEST_CASE("protocol dispatch: request ids, error codes") {
  auto bundle = sealed_bundle();
  EvidenceApi api(bundle);

  json ok = api.handle(json{{"request_id", "r-1"},
                            {"method", "get_screenshot"},
                            {"params", json{{"time", 0.7}}}});
  CHECK(ok["request_id"] == "r-1");
  CHECK(ok["result"]["frame_no"] == 1);

  json unknown = api.handle(json{{"request_id", 7}, {"method", "delete_resource"}});
  CHECK(unknown["error"]["code"] == 1);  // MethodNotFound

  json bad = api.handle(json{{"request_id", 8},
                             {"method", "get_session"},
                             {"params", json{{"filter", "rank:5"}}}});
  CHECK(bad["error"]["code"] == 5);  // FilterParse

  json oos = api.handle(json{{"request_id", 9},
                             {"method", "get_screenshot"},
                             {"params", json{{"time", 500.0}}}});
  CHECK(oos["error"]["code"] == 3);  // OutOfSession

  json noframe = api.handle(json{{"request_id", 10},
                                 {"method", "retrieve_resource"},
                                 {"params", json::object()}});
  CHECK(noframe["error"]["code"] == 2);  // BadParams
}

TEST_CASE("stream transport is transparent against in-process calls") {
  auto bundle = sealed_bundle();
  EvidenceApi api(bundle);

  json request{{"request_id", "t-1"},
               {"method", "get_session"},
               {"params", json{{"filter", "method:POST"}}}};
  std::stringstream in, out;
  write_frame(in, request.dump());
  serve_stream(api, in, out);
  auto frame = read_frame(out);
  REQUIRE(frame.has_value());
  CHECK(json::parse(*frame).dump() == api.handle(request).dump());
}

TEST_CASE("tcp transport answers concurrent storms read-only") {
  auto bundle = sealed_bundle();
  Digest digest = *bundle.manifest_hash;
  EvidenceApi api(bundle);
  ToolServer server(api, "127.0.0.1", 0);

  std::atomic<int> failures{0};
  std::vector<std::thread> clients;
  for (int c = 0; c < 10; ++c) {
    clients.emplace_back([&, c] {
      for (int i = 0; i < 10; ++i) {
        json request{{"request_id", c * 100 + i},
                     {"method", i % 2 ? "get_screenshot" : "get_session"},
                     {"params", i % 2 ? json{{"time", 0.5}} : json::object()}};
        try {
          json response = tool_roundtrip_tcp("127.0.0.1", server.port(), request);
          if (response["request_id"] != c * 100 + i || !response.contains("result"))
            ++failures;
        } catch (...) {
          ++failures;
        }
      }
    });
  }
  for (auto& t : clients) t.join();
  server.stop();
  CHECK(failures == 0);
  CHECK(verify(bundle, digest));  // the storm never wrote anything
}

#pragma once

// Shared fixtures for the suites: a handmade bundle with known contents and
// a member-level single-byte mutation fuzzer used by the immutability tests.

#include <random>
#include <string>
#include <vector>

#include "triage/bundle.hpp"

namespace triage::testing {

// Three network records, three frames, a couple of actions, two resources.
// Times are chosen so every boundary case in the suites is representable.
inline EvidenceBundle make_test_bundle() {
  EvidenceBundle b;
  b.bundle_id = "test-bundle-001";
  b.epoch_t0 = 1700000100.0;
  b.context.lure_subject = "Action Required: Update your billing information";
  b.context.lure_from = "support@streaming-service.com";
  b.context.lure_body_text = "Dear Customer, we could not process your latest payment...";
  b.context.target_url = "https://portal.example-landing.com/login";
  b.context.persona = Persona::default_persona();

  b.resources.put_text("res-001-landing.html", ResourceKind::html,
                       "<html><body><form><input type=\"password\"/></form></body></html>");
  b.resources.put_text("res-002-app.js", ResourceKind::script, "var a = 1;\n");
  b.resources.put_text("frm-0", ResourceKind::image, "frame zero");
  b.resources.put_text("frm-1", ResourceKind::image, "frame one");
  b.resources.put_text("frm-2", ResourceKind::image, "frame two");

  auto rec = [&](std::uint64_t seq, double rel, const char* method, const char* url,
                 int status, const char* body, const char* ref) {
    NetworkRecord r;
    r.seq = seq;
    r.started_at = b.epoch_t0 + rel;
    r.duration_ms = 35.0;
    r.method = method;
    r.url = url;
    r.host = host_of_url(url);
    r.status = status;
    r.request_headers = {{"Host", r.host}};
    r.request_body = body;
    r.response_body_ref = ref;
    r.mime_type = status ? "text/html" : "";
    return r;
  };
  b.network.push_back(rec(0, 0.0, "GET", "https://portal.example-landing.com/login", 200,
                          "", "res-001-landing.html"));
  b.network.push_back(
      rec(1, 0.4, "GET", "https://portal.example-landing.com/app.js", 200, "", "res-002-app.js"));
  b.network.push_back(rec(2, 7.5, "POST", "https://sink.collector-z.cc/c", 200,
                          "user=randombob&pass=ZK29YcCITMb!", ""));

  b.frames = {FrameRecord{0, RelTime::from_micros(0), "frm-0"},
              FrameRecord{1, RelTime::from_micros(500000), "frm-1"},
              FrameRecord{2, RelTime::from_micros(1000000), "frm-2"}};

  b.actions.push_back(ActionEvent{RelTime::from_micros(200000), ActionKind::navigate,
                                  NavigatePayload{"https://portal.example-landing.com/login"},
                                  "opened the landing page"});
  b.actions.push_back(ActionEvent{RelTime::from_micros(5000000), ActionKind::type,
                                  TypePayload{"Password", "ZK29YcCITMb!"},
                                  "entered the persona password"});
  b.actions.push_back(ActionEvent{RelTime::from_micros(7000000), ActionKind::click,
                                  ClickPayload{412, 288}, "submitted the form"});

  b.session_end = RelTime::from_micros(10000000);
  return b;
}

// Applies one single-byte mutation to one randomly chosen string/byte member
// of the bundle copy. The flipped byte always differs from the original.
inline void mutate_one_member(EvidenceBundle& b, std::mt19937_64& rng) {
  std::vector<std::string*> strings;
  for (auto& r : b.network) {
    strings.push_back(&r.method);
    strings.push_back(&r.url);
    strings.push_back(&r.host);
    strings.push_back(&r.request_body);
    strings.push_back(&r.mime_type);
    for (auto& h : r.request_headers) {
      strings.push_back(&h.name);
      strings.push_back(&h.value);
    }
  }
  for (auto& a : b.actions) strings.push_back(&a.annotation);
  strings.push_back(&b.bundle_id);
  strings.push_back(&b.context.lure_subject);
  strings.push_back(&b.context.lure_from);
  strings.push_back(&b.context.target_url);
  strings.push_back(&b.context.persona.password);

  std::vector<std::vector<unsigned char>*> blobs;
  for (auto& [id, res] : b.resources.mutable_entries()) blobs.push_back(&res.content);

  std::size_t total = strings.size() + blobs.size();
  std::size_t pick = rng() % total;
  if (pick < strings.size()) {
    std::string& s = *strings[pick];
    if (s.empty()) s = "x";
    std::size_t at = rng() % s.size();
    unsigned char old = static_cast<unsigned char>(s[at]);
    unsigned char sub = static_cast<unsigned char>(rng() & 0xff);
    if (sub == old) sub ^= 0x01;
    s[at] = static_cast<char>(sub);
  } else {
    auto& blob = *blobs[pick - strings.size()];
    if (blob.empty()) blob.push_back('x');
    std::size_t at = rng() % blob.size();
    unsigned char sub = static_cast<unsigned char>(rng() & 0xff);
    if (sub == blob[at]) sub ^= 0x01;
    blob[at] = sub;
  }
}

}  // namespace triage::testing

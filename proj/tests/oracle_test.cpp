#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "helpers.hpp"
#include "triage/errors.hpp"
#include "triage/oracle.hpp"
#include "triage/simulator.hpp"

using namespace triage;
using triage::testing::make_test_bundle;

namespace {

// Independent entropy oracle: map-based tally, natural log converted to
// bits. Shares no code path with the library's histogram version.
double entropy_oracle(const std::string& text) {
  std::map<char, long> counts;
  for (char c : text) counts[c]++;
  double h = 0.0;
  for (const auto& [c, n] : counts) {
    double p = static_cast<double>(n) / static_cast<double>(text.size());
    h -= p * std::log(p);
  }
  return h / std::log(2.0);
}

std::string random_base64(std::size_t bytes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<unsigned char> blob(bytes);
  for (auto& b : blob) b = static_cast<unsigned char>(rng() & 0xff);
  return base64_encode(std::span<const unsigned char>(blob.data(), blob.size()));
}

EvidenceBundle bundle_with_script(const std::string& script_text) {
  auto b = make_test_bundle();
  b.resources.put_text("res-009-extra.js", ResourceKind::script, script_text);
  seal(b);
  return b;
}

}  // namespace

TEST_CASE("shannon_entropy matches the independent counter") {
  for (const std::string& sample :
       {std::string("var a = 1;"), std::string(400, 'a'), random_base64(512, 5),
        std::string("eval(atob('aGk='))")}) {
    CHECK(shannon_entropy(sample) == doctest::Approx(entropy_oracle(sample)).epsilon(1e-9));
  }
}

TEST_CASE("entropy threshold separates packed payloads from source text") {
  std::string packed = random_base64(1536, 11);
  double h_packed = entropy_oracle(packed);
  CHECK(h_packed > 5.8);  // uniform base64 sits near log2(64) = 6

  std::string plain;
  for (int i = 0; i < 40; ++i) plain += "var a = 1;\n";
  CHECK(entropy_oracle(plain) < 4.5);
}

TEST_CASE("detect_obfuscation fires on entropy and on eval-decode patterns") {
  auto packed = bundle_with_script("var p=\"" + random_base64(1536, 23) + "\";");
  auto v = detect_obfuscation(packed);
  REQUIRE(v.has_value());
  CHECK(v->technique_id == "T1027");
  CHECK(v->status == VerdictStatus::suspicious);
  CHECK(v->evidence.at(0).source == "resource:res-009-extra.js");
  CHECK(validate_verdict(*v, packed).accepted);

  auto eval_bundle = bundle_with_script("eval(atob(payload));");
  CHECK(detect_obfuscation(eval_bundle).has_value());

  std::string plain;
  for (int i = 0; i < 40; ++i) plain += "var a = 1;\n";
  auto plain_bundle = bundle_with_script(plain);
  CHECK_FALSE(detect_obfuscation(plain_bundle).has_value());

  auto empty = make_test_bundle();
  empty.resources = ResourceStore{};
  empty.network.clear();
  empty.frames.clear();
  empty.actions.clear();
  seal(empty);
  CHECK_FALSE(detect_obfuscation(empty).has_value());
}

TEST_CASE("registrable domain uses the embedded suffix snapshot") {
  CHECK(registrable_domain("billing.streaming-service.com") == "streaming-service.com");
  CHECK(registrable_domain("www.portal.co.uk") == "portal.co.uk");
  CHECK(registrable_domain("a.b.hosted-docs.example") == "hosted-docs.example");
  CHECK(registrable_domain("assets.r2-static-cdn.cc") == "r2-static-cdn.cc");
  CHECK(registrable_domain("localhost") == "localhost");
  CHECK(registrable_domain("10.1.2.3") == "10.1.2.3");
  CHECK(registrable_domain("deep.sub.weirdtld") == "sub.weirdtld");
}

TEST_CASE("detect_input_capture: secret vs identifier branches") {
  // The shared fixture types the persona password: confirmed/high, cited at
  // the typing instant.
  auto secret = make_test_bundle();
  seal(secret);
  auto v = detect_input_capture(secret);
  REQUIRE(v.has_value());
  CHECK(v->status == VerdictStatus::confirmed);
  CHECK(v->confidence == Confidence::high);
  CHECK(v->evidence.at(0).source == "frame:5");
  CHECK(validate_verdict(*v, secret).accepted);
  // The form markup is co-cited.
  REQUIRE(v->evidence.size() == 2);
  CHECK(v->evidence.at(1).source == "resource:res-001-landing.html");

  // Username only: suspicious/medium.
  auto ident = make_test_bundle();
  ident.actions[1].payload = TypePayload{"Username", "randombob"};
  seal(ident);
  auto v2 = detect_input_capture(ident);
  REQUIRE(v2.has_value());
  CHECK(v2->status == VerdictStatus::suspicious);
  CHECK(v2->confidence == Confidence::medium);

  // No type events at all.
  auto none = make_test_bundle();
  none.actions.erase(none.actions.begin() + 1);
  seal(none);
  CHECK_FALSE(detect_input_capture(none).has_value());
}

TEST_CASE("detect_exfiltration: cross-origin vs landing host") {
  auto cross = make_test_bundle();
  seal(cross);
  auto v = detect_exfiltration(cross);
  REQUIRE(v.has_value());
  CHECK(v->status == VerdictStatus::confirmed);
  CHECK(v->confidence == Confidence::high);
  CHECK(v->evidence.at(0).source == "net:2");
  CHECK(validate_verdict(*v, cross).accepted);

  // Same POST aimed at the landing host itself: suspicious/medium.
  auto same = make_test_bundle();
  same.network[2].url = "https://portal.example-landing.com/submit";
  same.network[2].host = "portal.example-landing.com";
  seal(same);
  auto v2 = detect_exfiltration(same);
  REQUIRE(v2.has_value());
  CHECK(v2->status == VerdictStatus::suspicious);
  CHECK(v2->confidence == Confidence::medium);

  // No secrets anywhere.
  auto clean = make_test_bundle();
  clean.network[2].request_body = "user=nobody&pass=nothing";
  clean.actions[1].payload = TypePayload{"Search", "weather"};
  seal(clean);
  CHECK_FALSE(detect_exfiltration(clean).has_value());
}

TEST_CASE("detect_phishing_link combines domain mismatch with form interaction") {
  // Fixture: lure streaming-service.com vs landing example-landing.com, and
  // the persona password is typed: confirmed.
  auto b = make_test_bundle();
  seal(b);
  auto v = detect_phishing_link(b);
  REQUIRE(v.has_value());
  CHECK(v->status == VerdictStatus::confirmed);
  CHECK(validate_verdict(*v, b).accepted);

  // Mismatch without any form interaction: suspicious.
  auto no_form = make_test_bundle();
  no_form.actions.erase(no_form.actions.begin() + 1);
  no_form.network[2].request_body.clear();
  seal(no_form);
  auto v2 = detect_phishing_link(no_form);
  REQUIRE(v2.has_value());
  CHECK(v2->status == VerdictStatus::suspicious);

  // Same registrable domain: absent.
  auto same = make_test_bundle();
  same.context.lure_from = "support@example-landing.com";
  seal(same);
  CHECK_FALSE(detect_phishing_link(same).has_value());
}

TEST_CASE("detect_link_execution needs a click immediately followed by navigation") {
  auto b = make_test_bundle();
  b.actions.push_back(ActionEvent{RelTime::from_micros(8000000), ActionKind::navigate,
                                  NavigatePayload{"https://next.example/"}, "page changed"});
  seal(b);
  auto v = detect_link_execution(b);
  REQUIRE(v.has_value());
  CHECK(v->technique_id == "T1204.001");
  CHECK(validate_verdict(*v, b).accepted);

  auto plain = make_test_bundle();  // click is the last action
  seal(plain);
  CHECK_FALSE(detect_link_execution(plain).has_value());
}

TEST_CASE("detect_driveby keys on executable mime types") {
  auto b = make_test_bundle();
  b.network[1].mime_type = "application/x-msdownload";
  seal(b);
  auto v = detect_driveby(b);
  REQUIRE(v.has_value());
  CHECK(v->technique_id == "T1189");
  CHECK(v->evidence.at(0).source == "net:1");

  auto clean = make_test_bundle();
  seal(clean);
  CHECK_FALSE(detect_driveby(clean).has_value());
}

TEST_CASE("dispatch routes and declares the no-detector techniques") {
  auto b = make_test_bundle();
  seal(b);
  CHECK(dispatch("T1133", b).status == VerdictStatus::not_observed);
  CHECK(dispatch("T1078", b).status == VerdictStatus::not_observed);
  CHECK(dispatch("T1110.003", b).status == VerdictStatus::not_observed);
  CHECK(dispatch("T1056.002", b).status == VerdictStatus::confirmed);
  CHECK_THROWS_AS(dispatch("T9999", b), UnknownTechniqueError);
}

TEST_CASE("oracle verdicts self-validate across the simulator corpus") {
  CorpusSpec spec;
  spec.seed = 31337;
  for (ScenarioKind k : kAllScenarioKinds) spec.counts.emplace_back(k, 2);
  auto corpus = build_corpus(spec);
  auto profile = resolve_profile("comprehensive");
  for (const auto& [bundle, truth] : corpus) {
    for (const auto& id : profile.technique_ids) {
      TechniqueVerdict v = dispatch(id, bundle);
      CHECK(validate_verdict(v, bundle).accepted);
    }
  }
}

TEST_CASE("oracle determinism: identical bundles, identical verdict sets") {
  auto script = ScenarioScript::for_kind(ScenarioKind::brand_impersonation, 5);
  auto [b1, t1] = run_scenario(script, Persona::default_persona());
  auto [b2, t2] = run_scenario(script, Persona::default_persona());
  auto profile = resolve_profile("comprehensive");
  for (const auto& id : profile.technique_ids) {
    CHECK(verdict_to_json(dispatch(id, b1)).dump() ==
          verdict_to_json(dispatch(id, b2)).dump());
  }
}

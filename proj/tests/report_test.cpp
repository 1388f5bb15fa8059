#include <doctest.h>

#include <httplib.h>

#include <fstream>
#include <thread>

#include "triage/errors.hpp"
#include "triage/oracle.hpp"
#include "triage/report.hpp"
#include "triage/simulator.hpp"

using namespace triage;
using json = nlohmann::json;

namespace {

struct RunFixture {
  EvidenceBundle bundle;
  GroundTruth truth;
  AdjudicationRun run;
};

RunFixture adjudicated(ScenarioKind kind, std::uint64_t seed) {
  auto script = ScenarioScript::for_kind(kind, seed);
  auto [bundle, truth] = run_scenario(script, Persona::default_persona());
  OracleBackend backend(bundle);
  auto run = run_checklist(bundle, resolve_profile("comprehensive"), backend,
                           resolve_policy("any-confirmed"), TechniqueCatalog::builtin());
  return RunFixture{std::move(bundle), std::move(truth), std::move(run)};
}

}  // namespace

TEST_CASE("extract_iocs: hosts, urls and hashes from cited artifacts") {
  auto fx = adjudicated(ScenarioKind::logoless_harvester, 50);
  auto iocs = extract_iocs(fx.run, fx.bundle);
  REQUIRE(!iocs.empty());

  bool has_exfil_domain = false, has_url = false, has_hash = false;
  for (const auto& ioc : iocs) {
    if (ioc.type == IOC::Type::domain && ioc.value == "collect.r2-static-cdn.cc")
      has_exfil_domain = true;
    if (ioc.type == IOC::Type::url) has_url = true;
    if (ioc.type == IOC::Type::hash) has_hash = true;
    CHECK(!ioc.citations.empty());
    // Secrets never appear inside IOC values.
    CHECK(ioc.value.find("ZK29YcCITMb!") == std::string::npos);
  }
  CHECK(has_exfil_domain);
  CHECK(has_url);
  CHECK(has_hash);  // the co-cited form resource hash

  // De-duplication: no (type, value) pair twice; citations accumulate.
  for (std::size_t i = 0; i < iocs.size(); ++i)
    for (std::size_t j = i + 1; j < iocs.size(); ++j)
      CHECK((iocs[i].type != iocs[j].type || iocs[i].value != iocs[j].value));
}

TEST_CASE("benign runs produce no IOCs and a no-action report") {
  auto fx = adjudicated(ScenarioKind::benign, 51);
  auto iocs = extract_iocs(fx.run, fx.bundle);
  CHECK(iocs.empty());

  IncidentReport rep = synthesize(fx.run, fx.bundle);
  CHECK(rep.executive_summary.verdict == "Safe");
  CHECK(rep.executive_summary.confidence == "high");  // full coverage, no degradation
  REQUIRE(rep.recommendations.size() == 1);
  CHECK(rep.recommendations[0].find("No action required") != std::string::npos);

  std::string doc = render(rep);
  CHECK(check_report_structure(doc).empty());
  CHECK(check_report_grounding(doc, fx.run, fx.bundle).empty());
}

TEST_CASE("phishing report: verdict, drivers, timeline ascending") {
  auto fx = adjudicated(ScenarioKind::logoless_harvester, 52);
  IncidentReport rep = synthesize(fx.run, fx.bundle);
  CHECK(rep.executive_summary.verdict == "Phishing");
  CHECK(rep.executive_summary.confidence == "high");  // driven by confirmed/high
  CHECK(rep.executive_summary.rationale.find("T1041") != std::string::npos);

  REQUIRE(!rep.timeline.empty());
  for (std::size_t i = 1; i < rep.timeline.size(); ++i)
    CHECK(rep.timeline[i - 1].t <= rep.timeline[i].t);
  for (const auto& e : rep.timeline) CHECK(!e.citation.empty());

  // Appendices carry one cross-reference row per adjudicated technique.
  CHECK(rep.evidence_cross_reference.size() == fx.run.verdicts.size());
  CHECK(rep.attack_mapping.size() == fx.run.verdicts.size());
}

TEST_CASE("render is deterministic and passes its own checks") {
  auto fx = adjudicated(ScenarioKind::brand_impersonation, 53);
  std::string a = render(synthesize(fx.run, fx.bundle));
  std::string b = render(synthesize(fx.run, fx.bundle));
  CHECK(a == b);

  CHECK(check_report_structure(a).empty());
  CHECK(check_report_grounding(a, fx.run, fx.bundle).empty());
  CHECK(check_secret_hygiene(a, fx.bundle.context.persona).empty());
  CHECK(check_no_repetition(a, extract_iocs(fx.run, fx.bundle)).empty());

  // Three IOC lines minimum: landing domain, exfil domain, script hash.
  auto iocs = extract_iocs(fx.run, fx.bundle);
  CHECK(iocs.size() >= 3);
}

TEST_CASE("structure check spots missing and reordered sections") {
  auto fx = adjudicated(ScenarioKind::benign, 54);
  std::string doc = render(synthesize(fx.run, fx.bundle));

  std::string missing = doc;
  auto pos = missing.find("## IOCs");
  missing.replace(pos, 7, "## IOC!");
  CHECK(!check_report_structure(missing).empty());

  std::string duplicated = doc + "\n## Executive Summary\n";
  CHECK(!check_report_structure(duplicated).empty());
}

TEST_CASE("grounding check rejects invented facts") {
  auto fx = adjudicated(ScenarioKind::logoless_harvester, 55);
  std::string doc = render(synthesize(fx.run, fx.bundle));

  CHECK(!check_report_grounding(doc + "\nSee also never-seen.example for details.\n",
                                fx.run, fx.bundle)
             .empty());
  CHECK(!check_report_grounding(doc + "\nKey event at T+123.456s.\n", fx.run, fx.bundle)
             .empty());
  CHECK(!check_report_grounding(doc + "\nMapped to T1486.\n", fx.run, fx.bundle).empty());
  std::string fake_hash(64, 'a');
  CHECK(!check_report_grounding(doc + "\nhash " + fake_hash + "\n", fx.run, fx.bundle)
             .empty());
}

TEST_CASE("secret hygiene and repetition checks") {
  auto fx = adjudicated(ScenarioKind::progressive_chat, 56);
  std::string doc = render(synthesize(fx.run, fx.bundle));
  CHECK(check_secret_hygiene(doc, fx.bundle.context.persona).empty());
  CHECK(check_secret_hygiene(doc + "\ncard 1234 5678 9012 3456\n",
                             fx.bundle.context.persona)
            .size() == 1);

  auto iocs = extract_iocs(fx.run, fx.bundle);
  REQUIRE(!iocs.empty());
  std::string repeated = doc;
  auto appendix = repeated.find("## Appendices");
  repeated.insert(appendix, "Also note " + iocs[0].value + " and " + iocs[0].value + ".\n");
  CHECK(!check_no_repetition(repeated, iocs).empty());
}

TEST_CASE("recommendations.v1 is editable shipped data") {
  auto builtin = RecommendationRules::builtin();
  auto reloaded = RecommendationRules::load(builtin.to_document());
  REQUIRE(reloaded.rules().size() == builtin.rules().size());
  CHECK(reloaded.rules()[0].technique_id == builtin.rules()[0].technique_id);

  CHECK_THROWS_AS(RecommendationRules::load("{}"), SchemaError);
  CHECK_THROWS_AS(RecommendationRules::load(
                      R"({"version":"recommendations.v1","rules":[{"technique_id":"nope",
                          "action":"x"}]})"),
                  SchemaError);

  // Swapping the table changes the rendered recommendations without code.
  auto fx = adjudicated(ScenarioKind::logoless_harvester, 58);
  auto custom = RecommendationRules::load(
      R"({"version":"recommendations.v1","rules":[
          {"technique_id":"T1041","action":"Pull the exfiltration endpoint offline."}]})");
  IncidentReport rep = synthesize(fx.run, fx.bundle, custom);
  REQUIRE(!rep.recommendations.empty());
  CHECK(rep.recommendations[0] == "Pull the exfiltration endpoint offline.");

#ifdef TRIAGE_SOURCE_DIR
  std::ifstream in(std::string(TRIAGE_SOURCE_DIR) + "/core/data/recommendations.v1",
                   std::ios::binary);
  REQUIRE(in.good());
  std::string shipped((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(shipped == builtin.to_document());
#endif
}

namespace {

class WriterStub {
 public:
  explicit WriterStub(std::string reply) : reply_(std::move(reply)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request&, httplib::Response& res) {
                   json msg{{"choices",
                             json::array({json{{"message", json{{"role", "assistant"},
                                                                {"content", reply_}}}}})}};
                   res.set_content(msg.dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~WriterStub() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  RemoteEndpointConfig config() const {
    RemoteEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    cfg.model = "writer";
    cfg.timeout_s = 5;
    return cfg;
  }

 private:
  httplib::Server server_;
  std::string reply_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("remote writer: grounded replies pass, inventions fall back") {
  auto fx = adjudicated(ScenarioKind::logoless_harvester, 57);
  std::string grounded = render(synthesize(fx.run, fx.bundle));

  {
    WriterStub stub(grounded);  // echoes a fully grounded document
    std::string doc = synthesize_remote(fx.run, fx.bundle, stub.config());
    CHECK(doc == grounded);
  }
  {
    // Same structure, but inventing a domain: rejected, template fallback.
    std::string invented = grounded + "\nAttribution: never-seen.example.\n";
    WriterStub stub(invented);
    std::string doc = synthesize_remote(fx.run, fx.bundle, stub.config());
    CHECK(doc.find("never-seen.example") == std::string::npos);
    CHECK(doc.find("remote writer bypassed") != std::string::npos);
  }
  {
    // Unreachable endpoint: template fallback with a degradation note.
    RemoteEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:1/v1";
    cfg.timeout_s = 1;
    std::string doc = synthesize_remote(fx.run, fx.bundle, cfg);
    CHECK(check_report_structure(doc).empty());
    CHECK(doc.find("remote writer bypassed") != std::string::npos);
  }
}

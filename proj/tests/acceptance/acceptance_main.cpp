// Acceptance suite: nine pinned criteria, one pass/fail line each. Exits
// nonzero if any criterion fails. `--write-golden` regenerates the golden
// harvester report after a reviewed change.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "triage/adjudicator.hpp"
#include "triage/bundle_io.hpp"
#include "triage/checklist.hpp"
#include "triage/evidence_api.hpp"
#include "triage/harness.hpp"
#include "triage/oracle.hpp"
#include "triage/report.hpp"
#include "triage/simulator.hpp"
#include "triage/timeline.hpp"

using namespace triage;
using json = nlohmann::json;

namespace {

struct Criterion {
  std::string name;
  std::function<void(std::string& detail)> body;  // throws on failure
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

void require_close(double got, double want, double tol, const std::string& what) {
  if (std::fabs(got - want) > tol)
    throw Failure(what + ": got " + std::to_string(got) + ", want " +
                  std::to_string(want) + " +/- " + std::to_string(tol));
}

// ---- shared fixtures ----

CorpusSpec acceptance_corpus_spec() {
  CorpusSpec spec;
  spec.seed = 20250810;
  spec.counts = {
      {ScenarioKind::benign, 20},          {ScenarioKind::brand_impersonation, 8},
      {ScenarioKind::logoless_harvester, 8}, {ScenarioKind::noncrp_crypto, 6},
      {ScenarioKind::gated_arith, 6},      {ScenarioKind::gated_slider_loop, 4},
      {ScenarioKind::progressive_chat, 4}, {ScenarioKind::legit_service_abuse, 4},
  };
  return spec;
}

struct CorpusRun {
  EvidenceBundle bundle;
  GroundTruth truth;
  AdjudicationRun run;
};

const std::vector<CorpusRun>& adjudicated_corpus() {
  static std::vector<CorpusRun> runs = [] {
    auto corpus = build_corpus(acceptance_corpus_spec());
    auto profile = resolve_profile("comprehensive");
    auto policy = resolve_policy("any-confirmed");
    auto catalog = TechniqueCatalog::builtin();
    std::vector<CorpusRun> out;
    out.reserve(corpus.size());
    for (auto& [bundle, truth] : corpus) {
      OracleBackend backend(bundle);
      auto run = run_checklist(bundle, profile, backend, policy, catalog);
      out.push_back(CorpusRun{std::move(bundle), std::move(truth), std::move(run)});
    }
    return out;
  }();
  return runs;
}

// ---- criterion bodies ----

void criterion_metrics(std::string& detail) {
  auto f1 = prf_from_rates(0.94, 0.7769).f1;
  require(f1.has_value(), "F1 undefined");
  require_close(*f1, 0.8507, 1e-4, "headline F1");

  struct Row {
    double p, r, f1;
  };
  const Row rows[] = {
      {1.0000, 0.6765, 0.8070}, {0.9375, 0.6522, 0.7692}, {1.0000, 0.1471, 0.2564},
      {1.0000, 0.0882, 0.1622}, {0.8000, 0.1176, 0.2051}, {0.4545, 0.1087, 0.1754},
      {0.3333, 0.0652, 0.1091}, {0.3636, 0.0870, 0.1404},
  };
  for (const auto& row : rows) {
    auto m = prf_from_rates(row.p, row.r).f1;
    require(m.has_value(), "row F1 undefined");
    require_close(*m, row.f1, 1e-4, "pilot-table F1 row");
  }
  detail = "headline + 8 table rows within 1e-4";
}

void criterion_prior_shift(std::string& detail) {
  const double tpr = 0.7769;
  const double fpr = 12.0 / 467.0;  // FP=12 over 467 negatives
  auto point = prior_shift(tpr, fpr, 241.0 / 708.0);
  require_close(point.precision, 0.94, 0.01, "projected precision at the study prevalence");
  require_close(point.f1, 0.8507, 0.002, "projected F1 at the study prevalence");

  double prev = -1.0;
  int points = 0;
  for (int i = 1; i <= 99; ++i) {
    double pi = 0.01 * i;
    double precision = prior_shift(tpr, fpr, pi).precision;
    require(precision > prev, "precision not monotone in prevalence");
    prev = precision;
    ++points;
  }
  require(points == 99, "grid size");
  detail = "fixed point reproduced; precision monotone over 99 grid points";
}

void criterion_temporal(std::string& detail) {
  std::mt19937_64 rng(777);

  auto frame_oracle = [](const std::vector<FrameRecord>& frames,
                         RelTime t) -> const FrameRecord* {
    const FrameRecord* best = nullptr;
    for (const auto& f : frames)
      if (f.t_rel <= t) best = &f;
    return best;
  };
  auto window_oracle = [](const std::vector<NetworkRecord>& net, double epoch, RelTime c) {
    std::vector<std::uint64_t> out;
    for (const auto& r : net) {
      std::int64_t rel = std::llround((r.started_at - epoch) * 1e6);
      std::int64_t lo = c.micros - 500000 < 0 ? 0 : c.micros - 500000;
      if (rel >= lo && rel <= c.micros + 500000) out.push_back(r.seq);
    }
    return out;
  };

  auto random_session = [&](double epoch) {
    EvidenceBundle b;
    b.bundle_id = "session";
    b.epoch_t0 = epoch;
    b.context.persona = Persona::default_persona();
    b.context.lure_from = "a@b.example";
    b.context.target_url = "https://b.example/";
    std::size_t n = 1 + rng() % 32;
    std::vector<double> rels;
    for (std::size_t i = 0; i < n; ++i)
      rels.push_back(static_cast<double>(rng() % 20000000) / 1e6);
    std::sort(rels.begin(), rels.end());
    for (std::size_t i = 0; i < n; ++i) {
      NetworkRecord r;
      r.seq = i;
      r.started_at = epoch + rels[i];
      r.method = "GET";
      r.url = "https://b.example/" + std::to_string(i);
      r.host = "b.example";
      r.status = 200;
      b.network.push_back(std::move(r));
    }
    b.resources.put_text("f", ResourceKind::image, "frame");
    std::size_t nf = 1 + rng() % 16;
    std::int64_t t = static_cast<std::int64_t>(rng() % 500000);
    for (std::size_t i = 0; i < nf; ++i) {
      b.frames.push_back(FrameRecord{i, RelTime::from_micros(t), "f"});
      t += 1 + static_cast<std::int64_t>(rng() % 1500000);
    }
    b.session_end = RelTime::from_micros(25000000);
    seal(b);
    return b;
  };

  const int kSessions = 10000;
  for (int s = 0; s < kSessions; ++s) {
    double epoch = 1.6e9 + static_cast<double>(rng() % 100000000) / 100.0;
    EvidenceBundle b = random_session(epoch);
    for (int q = 0; q < 2; ++q) {
      RelTime t = RelTime::from_micros(static_cast<std::int64_t>(rng() % 25000000));
      DualSeekResult got = dual_seek(b, t);
      const FrameRecord* wf = frame_oracle(b.frames, t);
      if (wf == nullptr) {
        require(!got.frame.has_value(), "frame should be absent");
      } else {
        require(got.frame.has_value() && got.frame->frame_no == wf->frame_no,
                "frame selection mismatch");
      }
      auto ww = window_oracle(b.network, b.epoch_t0, t);
      require(got.network_burst.size() == ww.size(), "window size mismatch");
      for (std::size_t i = 0; i < ww.size(); ++i)
        require(got.network_burst[i].seq == ww[i], "window content mismatch");
    }
  }

  // Epoch-shift invariance over 10^3 random shifts of one session.
  EvidenceBundle base = random_session(1.7e9);
  for (int s = 0; s < 1000; ++s) {
    double shift = static_cast<double>(rng() % 200000000) / 100.0 - 1e6;
    EvidenceBundle shifted = base;
    shifted.epoch_t0 += shift;
    for (auto& r : shifted.network) r.started_at += shift;
    shifted.manifest_hash.reset();
    seal(shifted);
    RelTime t = RelTime::from_micros(static_cast<std::int64_t>(rng() % 25000000));
    DualSeekResult a = dual_seek(base, t);
    DualSeekResult b2 = dual_seek(shifted, t);
    require(a.frame.has_value() == b2.frame.has_value(), "shift changed frame presence");
    if (a.frame)
      require(a.frame->frame_no == b2.frame->frame_no, "shift changed frame choice");
    require(a.network_burst.size() == b2.network_burst.size(), "shift changed window");
    for (std::size_t i = 0; i < a.network_burst.size(); ++i)
      require(a.network_burst[i].seq == b2.network_burst[i].seq,
              "shift changed window content");
  }
  detail = "10^4 sessions componentwise equal; 10^3 epoch shifts invariant";
}

void criterion_citation(std::string& detail) {
  auto script = ScenarioScript::for_kind(ScenarioKind::logoless_harvester, 4242);
  auto [bundle, truth] = run_scenario(script, Persona::default_persona());

  std::mt19937_64 rng(99);
  auto base = [&]() {
    return json{{"technique_id", "T1041"},
                {"status", "confirmed"},
                {"confidence", "high"},
                {"evidence", json::array({json{{"source", "net:0"},
                                               {"observation", "seen"},
                                               {"relevance", "real"}}})}};
  };

  const int kFuzz = 10000;
  int rejected = 0;
  for (int i = 0; i < kFuzz; ++i) {
    json v = base();
    switch (rng() % 6) {
      case 0:
        v["evidence"][0]["source"] = "resource:ghost-" + std::to_string(rng());
        break;
      case 1:
        v["evidence"][0]["source"] = "net:" + std::to_string(10000 + rng() % 100000);
        break;
      case 2:
        v["evidence"][0]["source"] =
            "frame:" + std::to_string(1000 + rng() % 1000);  // beyond session_end
        break;
      case 3:
        v["evidence"] = json::array();  // confirmed with no evidence
        break;
      case 4:
        v["status"] = "status-" + std::to_string(rng() % 100);
        break;
      case 5:
        v["confidence"] = "conf-" + std::to_string(rng() % 100);
        break;
    }
    if (!validate_verdict(v, bundle).accepted) ++rejected;
  }
  require(rejected == kFuzz, "a malformed verdict was accepted");

  // Well-formed verdicts across all three citation schemes must all pass.
  int accepted = 0;
  int formed = 0;
  for (const auto& r : bundle.network) {
    json v = base();
    v["evidence"][0]["source"] = "net:" + std::to_string(r.seq);
    ++formed;
    if (validate_verdict(v, bundle).accepted) ++accepted;
  }
  for (const auto& [id, res] : bundle.resources.entries()) {
    json v = base();
    v["evidence"][0]["source"] = "resource:" + id;
    ++formed;
    if (validate_verdict(v, bundle).accepted) ++accepted;
  }
  for (const auto& f : bundle.frames) {
    json v = base();
    v["evidence"][0]["source"] = "frame:" + f.t_rel.str();
    ++formed;
    if (validate_verdict(v, bundle).accepted) ++accepted;
  }
  require(accepted == formed, "a well-formed cited verdict was rejected");
  detail = "10^4 fuzzed rejected; " + std::to_string(formed) + " well-formed accepted";
}

void criterion_end_to_end(std::string& detail) {
  const auto& runs = adjudicated_corpus();
  require(runs.size() == 60, "corpus size");

  std::set<ScenarioKind> kinds_seen;
  for (ScenarioKind k : kAllScenarioKinds) (void)k;

  std::vector<Outcome> predictions, labels;
  std::size_t blocked = 0;
  for (const auto& cr : runs) {
    if (cr.truth.blocked) {
      ++blocked;
      continue;  // reported separately, never fed into the matrix
    }
    predictions.push_back(!cr.run.errors.empty()        ? Outcome::error
                          : cr.run.final.label == Label::phishing ? Outcome::phishing
                                                                  : Outcome::benign);
    labels.push_back(cr.truth.label == Label::phishing ? Outcome::phishing
                                                       : Outcome::benign);
  }
  auto counts = evaluate(predictions, labels);
  counts.blocked = blocked;
  auto m = prf(counts);
  require(counts.errors == 0, "oracle runs must not error");
  require(m.precision.has_value() && m.recall.has_value(), "metrics undefined");
  require_close(*m.precision, 1.0, 0.0, "corpus precision");
  require_close(*m.recall, 1.0, 0.0, "corpus recall");
  require(blocked == 4, "expected exactly the slider-loop sessions blocked");

  // Blocked sessions were not misclassified: they never enter the matrix.
  require(counts.tp + counts.fp + counts.fn + counts.tn == 56, "matrix covers non-blocked");
  detail = "P=R=1.0 over 56 scored; 4 blocked reported separately";
}

void criterion_immutability(std::string& detail) {
  auto script = ScenarioScript::for_kind(ScenarioKind::brand_impersonation, 777);
  auto [bundle, truth] = run_scenario(script, Persona::default_persona());
  Digest digest = *bundle.manifest_hash;

  std::mt19937_64 rng(123);
  int detected = 0;
  for (int i = 0; i < 100; ++i) {
    auto [copy, t2] = run_scenario(script, Persona::default_persona());
    // One random single-byte member mutation.
    std::vector<std::string*> strings;
    for (auto& r : copy.network) {
      strings.push_back(&r.url);
      strings.push_back(&r.method);
      strings.push_back(&r.request_body);
    }
    for (auto& a : copy.actions) strings.push_back(&a.annotation);
    strings.push_back(&copy.bundle_id);
    strings.push_back(&copy.context.lure_subject);
    std::vector<std::vector<unsigned char>*> blobs;
    for (auto& [id, res] : copy.resources.mutable_entries()) blobs.push_back(&res.content);

    std::size_t pick = rng() % (strings.size() + blobs.size());
    if (pick < strings.size()) {
      std::string& s = *strings[pick];
      if (s.empty()) s = "x";
      std::size_t at = rng() % s.size();
      unsigned char sub = static_cast<unsigned char>(rng() & 0xff);
      if (sub == static_cast<unsigned char>(s[at])) sub ^= 0x01;
      s[at] = static_cast<char>(sub);
    } else {
      auto& blob = *blobs[pick - strings.size()];
      std::size_t at = rng() % blob.size();
      unsigned char sub = static_cast<unsigned char>(rng() & 0xff);
      if (sub == blob[at]) sub ^= 0x01;
      blob[at] = sub;
    }
    if (!verify(copy, digest)) ++detected;
  }
  require(detected == 100, "a mutation went undetected");

  // Request storm over the tool server leaves the digest unchanged.
  EvidenceApi api(bundle);
  ToolServer server(api, "127.0.0.1", 0);
  std::vector<std::thread> clients;
  std::atomic<int> failures{0};
  for (int c = 0; c < 8; ++c) {
    clients.emplace_back([&, c] {
      for (int i = 0; i < 25; ++i) {
        json req{{"request_id", c * 1000 + i},
                 {"method", i % 3 == 0   ? "get_screenshot"
                            : i % 3 == 1 ? "get_session"
                                         : "retrieve_resource"},
                 {"params", i % 3 == 0   ? json{{"time", 1.0}}
                            : i % 3 == 1 ? json{{"filter", "status:2xx"}}
                                         : json{{"prefix", "res-"}}}};
        try {
          json resp = tool_roundtrip_tcp("127.0.0.1", server.port(), req);
          if (!resp.contains("result")) ++failures;
        } catch (...) {
          ++failures;
        }
      }
    });
  }
  for (auto& t : clients) t.join();
  server.stop();
  require(failures == 0, "request storm dropped responses");
  require(verify(bundle, digest), "digest changed under the request storm");
  detail = "100/100 mutations detected; storm of 200 requests left the digest intact";
}

void criterion_gates(std::string& detail) {
  GateSpec fig_gate{GateKind::arithmetic, ArithmeticGate{8, 7, '+'}};
  auto ok = solve_gate(fig_gate, FailureMode::none);
  require(ok.answer == "15" && ok.solved, "8+7 must solve to 15");

  GateSpec sub_gate{GateKind::arithmetic, ArithmeticGate{5, 1, '-'}};
  auto symbol = solve_gate(sub_gate, FailureMode::symbol_hallucination);
  require(symbol.answer == "6" && !symbol.solved, "5-1 under symbol hallucination");

  GateSpec twin_gate{GateKind::arithmetic, ArithmeticGate{7, 7, '+'}};
  auto literal = solve_gate(twin_gate, FailureMode::literal_transcription);
  require(literal.answer == "77" && !literal.solved, "7+7 under literal transcription");

  auto script = ScenarioScript::for_kind(ScenarioKind::gated_arith, 31415);
  auto solved = run_scenario(script, Persona::default_persona(), FailureMode::none);
  require(!solved.second.blocked, "solved gate must not block");
  auto blocked_sym =
      run_scenario(script, Persona::default_persona(), FailureMode::symbol_hallucination);
  auto blocked_lit =
      run_scenario(script, Persona::default_persona(), FailureMode::literal_transcription);
  require(blocked_sym.second.blocked && blocked_lit.second.blocked,
          "failed gates must block");
  detail = "figure answers reproduced; solved vs blocked outcomes follow";
}

std::string golden_document() {
  auto script = ScenarioScript::for_kind(ScenarioKind::logoless_harvester, 42);
  auto [bundle, truth] = run_scenario(script, Persona::default_persona());
  OracleBackend backend(bundle);
  auto run = run_checklist(bundle, resolve_profile("comprehensive"), backend,
                           resolve_policy("any-confirmed"), TechniqueCatalog::builtin());
  return render(synthesize(run, bundle));
}

void criterion_reports(const std::string& golden_path, std::string& detail) {
  const auto& runs = adjudicated_corpus();
  for (const auto& cr : runs) {
    std::string doc = render(synthesize(cr.run, cr.bundle));
    auto structure = check_report_structure(doc);
    require(structure.empty(), "structure: " + (structure.empty() ? "" : structure[0]));
    auto grounding = check_report_grounding(doc, cr.run, cr.bundle);
    require(grounding.empty(), "grounding: " + (grounding.empty() ? "" : grounding[0]));
    auto hygiene = check_secret_hygiene(doc, cr.bundle.context.persona);
    require(hygiene.empty(), "hygiene: " + (hygiene.empty() ? "" : hygiene[0]));
    auto repetition = check_no_repetition(doc, extract_iocs(cr.run, cr.bundle));
    require(repetition.empty(), "repetition: " + (repetition.empty() ? "" : repetition[0]));
  }

  std::string golden = read_file(golden_path);
  require(golden_document() == golden, "harvester report differs from the golden file");
  detail = "60 reports pass all checks; harvester golden byte-identical";
}

void criterion_costs(std::string& detail) {
  std::vector<double> costs(99, 0.04);
  costs.push_back(1.53);
  auto record = cost_quantiles(costs);
  require(record.p50 == 0.04, "p50 must be exactly 0.04");
  require(record.p99 == 1.53, "p99 must be exactly 1.53");
  require(std::fabs(record.total_p50() - 0.24) < 1e-12, "median total per URL");
  detail = "p50=0.04, p99=1.53 exact; median total $0.24 with the fixed operator cost";
}

}  // namespace

int main(int argc, char** argv) {
  std::string golden_path;
  bool write_golden = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--golden") == 0 && i + 1 < argc) golden_path = argv[++i];
    if (std::strcmp(argv[i], "--write-golden") == 0) write_golden = true;
  }
  if (golden_path.empty()) {
    std::fprintf(stderr, "usage: acceptance --golden <path> [--write-golden]\n");
    return 2;
  }
  if (write_golden) {
    write_file(golden_path, golden_document());
    std::printf("golden file written to %s\n", golden_path.c_str());
    return 0;
  }

  std::vector<Criterion> criteria = {
      {"metric reproduction", criterion_metrics},
      {"prior-shift fixed point", criterion_prior_shift},
      {"temporal oracle equivalence", criterion_temporal},
      {"citation-protocol soundness", criterion_citation},
      {"end-to-end oracle run", criterion_end_to_end},
      {"immutability", criterion_immutability},
      {"gate semantics", criterion_gates},
      {"report grounding",
       [&](std::string& d) { criterion_reports(golden_path, d); }},
      {"cost accounting", criterion_costs},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    std::string why;
    try {
      criteria[i].body(detail);
    } catch (const std::exception& e) {
      ok = false;
      why = e.what();
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
    if (ok) {
      std::printf("[PASS] %zu. %s (%lld ms) - %s\n", i + 1, criteria[i].name.c_str(),
                  static_cast<long long>(ms), detail.c_str());
    } else {
      std::printf("[FAIL] %zu. %s (%lld ms) - %s\n", i + 1, criteria[i].name.c_str(),
                  static_cast<long long>(ms), why.c_str());
      ++failures;
    }
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

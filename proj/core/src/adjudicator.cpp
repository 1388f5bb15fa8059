#include "triage/adjudicator.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "triage/errors.hpp"

namespace triage {

using json = nlohmann::json;

const std::string_view kAuditorSystemPrompt =
    "You are TraceSleuth, a security investigation specialist focused on "
    "high-signal phishing detections from captured browser sessions.\n"
    "\n"
    "Protocol: Guided through one MITRE ATT&CK technique at a time; base "
    "conclusions strictly on artifacts pulled through tools; never speculate "
    "without a citation to a specific artifact; clearly map observations back "
    "to the requested technique.\n"
    "\n"
    "Available MCP Tools: get_session(time, filter) (HTTP traffic/headers); "
    "get_screenshot(time) (rendered frames); retrieve_resource(prefix) "
    "(persisted HTML/JS artifacts).\n"
    "\n"
    "Output Format (JSON):\n"
    "{\n"
    "  \"status\": \"confirmed\" | \"suspicious\" | \"not_observed\",\n"
    "  \"confidence\": \"high\" | \"medium\" | \"low\",\n"
    "  \"evidence\": [ { \"source\": \"...\", \"observation\": \"...\", "
    "\"relevance\": \"...\" } ]\n"
    "}\n";

AggregationPolicy resolve_policy(std::string_view name) {
  if (name == "any-confirmed") {
    AggregationPolicy p;
    p.name = "any-confirmed";
    p.rule = [](const std::vector<TechniqueVerdict>& verdicts) {
      FinalVerdict f;
      f.policy = "any-confirmed";
      std::vector<std::string> confirmed;
      std::vector<std::string> suspicious_strong;
      for (const auto& v : verdicts) {
        if (v.status == VerdictStatus::confirmed) {
          confirmed.push_back(v.technique_id);
        } else if (v.status == VerdictStatus::suspicious &&
                   (v.confidence == Confidence::high || v.confidence == Confidence::medium)) {
          suspicious_strong.push_back(v.technique_id);
        }
      }
      if (!confirmed.empty()) {
        f.label = Label::phishing;
        f.drivers = std::move(confirmed);
      } else if (suspicious_strong.size() >= 2) {
        f.label = Label::phishing;
        f.drivers = std::move(suspicious_strong);
      } else {
        f.label = Label::benign;
      }
      std::sort(f.drivers.begin(), f.drivers.end());
      return f;
    };
    return p;
  }
  throw UnknownPolicyError("unknown aggregation policy '" + std::string(name) + "'");
}

FinalVerdict aggregate(const std::vector<TechniqueVerdict>& verdicts,
                       const AggregationPolicy& policy) {
  return policy.rule(verdicts);
}

TechniqueVerdict adjudicate_technique(const EvidenceApi& api, const TechniqueDef& technique,
                                      AdjudicatorBackend& backend, int retry_limit,
                                      std::vector<ToolLogEntry>* log, RunCost* cost) {
  const EvidenceBundle& bundle = api.bundle();
  const int budget = backend.capabilities().max_tool_calls;

  TechniqueBrief brief;
  brief.system_prompt = std::string(kAuditorSystemPrompt);
  brief.technique_id = technique.technique_id;
  brief.technique_name = technique.name;
  brief.guidance = technique.guidance;

  for (int attempt = 0; attempt <= retry_limit; ++attempt) {
    int calls = 0;
    ToolCallFn tool = [&](const json& request) -> json {
      if (calls >= budget) {
        return json{{"request_id", request.value("request_id", json(nullptr))},
                    {"error", json{{"code", static_cast<int>(ToolErrorCode::bad_params)},
                                   {"message", "tool budget exhausted"}}}};
      }
      ++calls;
      json response = api.handle(request);
      if (log)
        log->push_back(
            ToolLogEntry{technique.technique_id, request, response.dump().size()});
      return response;
    };

    BackendReply reply;
    try {
      reply = backend.adjudicate(brief, tool);
    } catch (const BackendError&) {
      if (attempt == retry_limit) throw;
      brief.rejection_feedback.push_back("backend transport failure; try again");
      continue;
    }
    if (cost) {
      cost->prompt_tokens += reply.prompt_tokens;
      cost->completion_tokens += reply.completion_tokens;
      cost->usd += reply.usd;
    }

    auto raw = extract_json_object(reply.raw_output);
    std::vector<std::string> reasons;
    if (!raw) {
      reasons.push_back("MALFORMED: output does not contain a JSON object");
    } else {
      ValidationResult result = validate_verdict(*raw, bundle);
      if (result.accepted) {
        TechniqueVerdict v = std::move(*result.verdict);
        v.technique_id = technique.technique_id;  // brief's technique is authoritative
        return v;
      }
      for (const auto& rej : result.rejections)
        reasons.push_back(std::string(reject_reason_name(rej.reason)) + ": " + rej.detail);
    }
    brief.rejection_feedback.insert(brief.rejection_feedback.end(), reasons.begin(),
                                    reasons.end());
  }

  // Retries exhausted: degraded slot, counted as not_observed but flagged.
  TechniqueVerdict degraded;
  degraded.technique_id = technique.technique_id;
  degraded.status = VerdictStatus::not_observed;
  degraded.confidence = Confidence::low;
  degraded.degraded = true;
  return degraded;
}

AdjudicationRun run_checklist(const EvidenceBundle& bundle, const ChecklistProfile& profile,
                              AdjudicatorBackend& backend, const AggregationPolicy& policy,
                              const TechniqueCatalog& catalog,
                              const AdjudicateOptions& options) {
  EvidenceApi api(bundle);

  AdjudicationRun run;
  run.bundle_id = bundle.bundle_id;
  run.profile = profile.name;
  run.backend = backend.name();
  run.policy = policy.name;
  run.verdicts.resize(profile.technique_ids.size());

  struct SlotLog {
    std::vector<ToolLogEntry> entries;
    RunCost cost;
    std::optional<std::string> error;
  };
  std::vector<SlotLog> slots(profile.technique_ids.size());

  auto work = [&](std::size_t i) {
    const std::string& id = profile.technique_ids[i];
    const TechniqueDef* def = catalog.find(id);
    if (!def) {
      slots[i].error = "technique " + id + " missing from catalog";
      TechniqueVerdict v;
      v.technique_id = id;
      v.degraded = true;
      run.verdicts[i] = std::move(v);
      return;
    }
    try {
      run.verdicts[i] = adjudicate_technique(api, *def, backend, options.retry_limit,
                                             &slots[i].entries, &slots[i].cost);
    } catch (const BackendError& e) {
      slots[i].error = e.what();
      TechniqueVerdict v;  // error slot: excluded from aggregation drivers
      v.technique_id = id;
      v.degraded = true;
      run.verdicts[i] = std::move(v);
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < profile.technique_ids.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= profile.technique_ids.size()) break;
          work(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // The log records logical (profile) order, not wall-clock order.
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& s = slots[i];
    run.tool_call_log.insert(run.tool_call_log.end(), s.entries.begin(), s.entries.end());
    run.cost.prompt_tokens += s.cost.prompt_tokens;
    run.cost.completion_tokens += s.cost.completion_tokens;
    run.cost.usd += s.cost.usd;
    if (s.error) run.errors.push_back(profile.technique_ids[i]);
  }

  run.final = aggregate(run.verdicts, policy);
  return run;
}

json run_to_json(const AdjudicationRun& run) {
  json verdicts = json::array();
  for (const auto& v : run.verdicts) verdicts.push_back(verdict_to_json(v));

  json tool_log = json::array();
  for (const auto& e : run.tool_call_log) {
    tool_log.push_back(json{{"technique_id", e.technique_id},
                            {"request", e.request},
                            {"response_bytes", e.response_bytes}});
  }

  return json{{"version", "run.v1"},
              {"bundle_id", run.bundle_id},
              {"profile", run.profile},
              {"backend", run.backend},
              {"policy", run.policy},
              {"verdicts", verdicts},
              {"errors", run.errors},
              {"final", json{{"label", std::string(label_name(run.final.label))},
                             {"policy", run.final.policy},
                             {"drivers", run.final.drivers}}},
              {"tool_call_log", tool_log},
              {"cost", json{{"prompt_tokens", run.cost.prompt_tokens},
                            {"completion_tokens", run.cost.completion_tokens},
                            {"usd", run.cost.usd}}}};
}

AdjudicationRun run_from_json(const json& doc) {
  try {
    if (doc.value("version", "") != "run.v1") throw ParseError("run.v1: bad version field");
    AdjudicationRun run;
    run.bundle_id = doc.at("bundle_id").get<std::string>();
    run.profile = doc.at("profile").get<std::string>();
    run.backend = doc.at("backend").get<std::string>();
    run.policy = doc.at("policy").get<std::string>();
    for (const auto& vj : doc.at("verdicts")) {
      TechniqueVerdict v;
      v.technique_id = vj.at("technique_id").get<std::string>();
      auto s = verdict_status_from_name(vj.at("status").get<std::string>());
      auto c = confidence_from_name(vj.at("confidence").get<std::string>());
      if (!s || !c) throw ParseError("run.v1: bad verdict enums");
      v.status = *s;
      v.confidence = *c;
      v.degraded = vj.value("degraded", false);
      for (const auto& ej : vj.at("evidence")) {
        v.evidence.push_back(EvidenceItem{ej.at("source").get<std::string>(),
                                          ej.value("observation", ""),
                                          ej.value("relevance", "")});
      }
      run.verdicts.push_back(std::move(v));
    }
    if (doc.contains("errors"))
      run.errors = doc["errors"].get<std::vector<std::string>>();
    const json& f = doc.at("final");
    auto label = label_from_name(f.at("label").get<std::string>());
    if (!label) throw ParseError("run.v1: bad final label");
    run.final.label = *label;
    run.final.policy = f.value("policy", run.policy);
    run.final.drivers = f.at("drivers").get<std::vector<std::string>>();
    for (const auto& tj : doc.value("tool_call_log", json::array())) {
      run.tool_call_log.push_back(ToolLogEntry{tj.at("technique_id").get<std::string>(),
                                               tj.at("request"),
                                               tj.at("response_bytes").get<std::size_t>()});
    }
    if (doc.contains("cost")) {
      run.cost.prompt_tokens = doc["cost"].value("prompt_tokens", 0ULL);
      run.cost.completion_tokens = doc["cost"].value("completion_tokens", 0ULL);
      run.cost.usd = doc["cost"].value("usd", 0.0);
    }
    return run;
  } catch (const json::exception& e) {
    throw ParseError(std::string("run.v1: ") + e.what());
  }
}

}  // namespace triage

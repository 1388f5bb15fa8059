#pragma once

// Stateless-auditor orchestration: one technique at a time, fresh context per
// technique, schema validation with bounded retries, aggregation into a final
// binary verdict.

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "triage/bundle.hpp"
#include "triage/checklist.hpp"
#include "triage/evidence_api.hpp"

namespace triage {

// System framing sent to every adjudication backend, one technique at a time.
extern const std::string_view kAuditorSystemPrompt;

struct Capabilities {
  int max_tool_calls = 12;  // per technique
};

struct TechniqueBrief {
  std::string system_prompt;
  std::string technique_id;
  std::string technique_name;
  std::string guidance;
  // Rejection reasons from prior attempts of this technique (oldest first);
  // empty on the first attempt. No other context carries over.
  std::vector<std::string> rejection_feedback;
};

// One tool-protocol round trip: request json in, response json out.
using ToolCallFn = std::function<nlohmann::json(const nlohmann::json&)>;

struct BackendReply {
  std::string raw_output;  // expected to contain the verdict JSON
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  double usd = 0.0;
};

class AdjudicatorBackend {
 public:
  virtual ~AdjudicatorBackend() = default;
  virtual std::string name() const = 0;
  virtual Capabilities capabilities() const = 0;
  // Must base conclusions on the brief plus artifacts pulled through `tool`.
  // Throws BackendError on transport failure.
  virtual BackendReply adjudicate(const TechniqueBrief& brief, const ToolCallFn& tool) = 0;
};

struct FinalVerdict {
  Label label = Label::benign;
  std::string policy;
  std::vector<std::string> drivers;  // sorted technique ids that triggered
};

struct AggregationPolicy {
  std::string name;
  // Deterministic, order-independent over the verdict multiset.
  std::function<FinalVerdict(const std::vector<TechniqueVerdict>&)> rule;
};

// "any-confirmed": phishing iff some verdict is confirmed, or at least two
// are suspicious with confidence high/medium. Throws UnknownPolicyError.
AggregationPolicy resolve_policy(std::string_view name);

FinalVerdict aggregate(const std::vector<TechniqueVerdict>& verdicts,
                       const AggregationPolicy& policy);

struct ToolLogEntry {
  std::string technique_id;
  nlohmann::json request;
  std::size_t response_bytes = 0;
};

struct RunCost {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  double usd = 0.0;
};

struct AdjudicationRun {
  std::string bundle_id;
  std::string profile;
  std::string backend;
  std::string policy;
  std::vector<TechniqueVerdict> verdicts;  // profile order
  std::vector<std::string> errors;         // technique ids with backend errors
  FinalVerdict final;
  std::vector<ToolLogEntry> tool_call_log;
  RunCost cost;
};

struct AdjudicateOptions {
  int retry_limit = 2;
  int jobs = 1;  // bounded parallelism across techniques
};

// One technique, fresh context. Backend output is parsed against the verdict
// schema and validated via validate_verdict; rejected attempts are retried
// with the rejection reasons appended, then degraded to not_observed/low.
// Tool calls are recorded into `log` when non-null.
TechniqueVerdict adjudicate_technique(const EvidenceApi& api, const TechniqueDef& technique,
                                      AdjudicatorBackend& backend, int retry_limit,
                                      std::vector<ToolLogEntry>* log = nullptr,
                                      RunCost* cost = nullptr);

AdjudicationRun run_checklist(const EvidenceBundle& bundle, const ChecklistProfile& profile,
                              AdjudicatorBackend& backend, const AggregationPolicy& policy,
                              const TechniqueCatalog& catalog,
                              const AdjudicateOptions& options = {});

nlohmann::json run_to_json(const AdjudicationRun& run);   // run.v1
AdjudicationRun run_from_json(const nlohmann::json& doc);  // throws ParseError

}  // namespace triage

#pragma once

// Incident-report synthesis from a completed adjudication run: BLUF
// structure, grounded IOC extraction, deterministic template rendering and
// an optional remote writer whose output is validated, never trusted.

#include <optional>
#include <string>
#include <vector>

#include "triage/adjudicator.hpp"
#include "triage/bundle.hpp"
#include "triage/remote.hpp"

namespace triage {

extern const std::string_view kReportWriterSystemPrompt;

// The seven section titles, in rendering order.
extern const std::string_view kReportSectionTitles[7];

struct IOC {
  enum class Type { domain, ip, url, hash };
  Type type = Type::domain;
  std::string value;
  std::vector<std::string> citations;  // first-citation order preserved
};

std::string_view ioc_type_name(IOC::Type t);

struct TimelineEntry {
  RelTime t;
  std::string event;     // synthesized; never repeats IOC values
  std::string citation;
};

struct VerdictXref {
  std::string technique_id;
  std::string name;
  std::string status;
  std::string confidence;
  bool degraded = false;
  std::vector<EvidenceItem> evidence;
};

struct IncidentReport {
  std::string bundle_id;
  struct {
    std::string verdict;     // "Phishing" | "Safe"
    std::string confidence;  // high | medium | low
    std::string rationale;
  } executive_summary;
  std::vector<std::string> scope_context;
  double epoch_t0 = 0.0;
  std::vector<TimelineEntry> timeline;
  std::vector<IOC> iocs;
  std::string risk_assessment;
  std::vector<std::string> recommendations;
  std::vector<VerdictXref> evidence_cross_reference;  // appendix A
  std::vector<std::string> attack_mapping;            // appendix B lines
  std::string degradation_note;  // set when a remote writer was bypassed
};

// Domains/IPs/URLs from cited network records, hashes from cited resources;
// de-duplicated preserving first citation order. Persona secrets never
// survive into IOC values.
std::vector<IOC> extract_iocs(const AdjudicationRun& run, const EvidenceBundle& bundle);

// Remediation table (recommendations.v1): ordered technique id -> action
// rows, operator-editable without code changes.
class RecommendationRules {
 public:
  struct Rule {
    std::string technique_id;
    std::string action;
  };

  static RecommendationRules builtin();
  static RecommendationRules load(std::string_view document);  // throws SchemaError

  const std::vector<Rule>& rules() const { return rules_; }
  std::string to_document() const;

 private:
  std::vector<Rule> rules_;
};

// Deterministic template synthesis.
IncidentReport synthesize(const AdjudicationRun& run, const EvidenceBundle& bundle,
                          const RecommendationRules& recommendations =
                              RecommendationRules::builtin());

// Deterministic plain-markup rendering; byte-identical for identical inputs.
std::string render(const IncidentReport& report);

// Remote writer path: sends the report-writer system prompt plus the run
// facts, then validates the reply (structure, grounding, secret hygiene).
// Violations or transport failure fall back to the template rendering with a
// degradation note. Returns the final document.
std::string synthesize_remote(const AdjudicationRun& run, const EvidenceBundle& bundle,
                              const RemoteEndpointConfig& config);

// Validation used on both template and remote output. Each returns a list of
// human-readable problems; empty means the check passed.
std::vector<std::string> check_report_structure(const std::string& document);
std::vector<std::string> check_report_grounding(const std::string& document,
                                                const AdjudicationRun& run,
                                                const EvidenceBundle& bundle);
std::vector<std::string> check_secret_hygiene(const std::string& document,
                                              const Persona& persona);
// IOC values may appear at most once outside the appendices.
std::vector<std::string> check_no_repetition(const std::string& document,
                                             const std::vector<IOC>& iocs);

}  // namespace triage

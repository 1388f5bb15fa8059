#pragma once

// Technique definitions, the three nested checklist profiles, the verdict
// schema and the evidence-citation validator. A verdict that asserts anything
// other than not_observed must cite artifacts that resolve in the bundle.

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/bundle.hpp"

namespace triage {

enum class Label { phishing, benign };

std::string_view label_name(Label l);
std::optional<Label> label_from_name(std::string_view name);

struct TechniqueDef {
  std::string technique_id;  // "T1566.002"
  std::string name;
  std::string guidance;     // investigation prompt text
  std::string oracle_rule;  // rule-spec identifier, may be empty
};

bool valid_technique_id(std::string_view id);

class TechniqueCatalog {
 public:
  // The 14 techniques used by the shipped profiles.
  static TechniqueCatalog builtin();
  // Parses a techniques.v1 document. Throws SchemaError on malformed ids or
  // structure, DuplicateTechniqueError on repeated ids.
  static TechniqueCatalog load(std::string_view document);

  const TechniqueDef* find(std::string_view technique_id) const;
  const std::vector<TechniqueDef>& all() const { return defs_; }
  std::size_t size() const { return defs_.size(); }

  std::string to_document() const;  // techniques.v1 serialization

 private:
  std::vector<TechniqueDef> defs_;
};

struct ChecklistProfile {
  std::string name;                        // minimal | standard | comprehensive
  std::vector<std::string> technique_ids;  // ordered
};

// Throws UnknownProfileError for names other than the three shipped profiles.
ChecklistProfile resolve_profile(std::string_view name);

// Operator-editable profile table (profiles.v1: map name -> ordered id list).
// Load validates id syntax, duplicates within a profile, membership in the
// catalog when one is given, and the minimal/standard/comprehensive nesting.
class ProfileSet {
 public:
  static ProfileSet builtin();
  static ProfileSet load(std::string_view document,
                         const TechniqueCatalog* catalog = nullptr);

  // Throws UnknownProfileError.
  ChecklistProfile resolve(std::string_view name) const;
  const std::vector<ChecklistProfile>& all() const { return profiles_; }

  std::string to_document() const;

 private:
  std::vector<ChecklistProfile> profiles_;
};

enum class VerdictStatus { confirmed, suspicious, not_observed };
enum class Confidence { high, medium, low };

std::string_view verdict_status_name(VerdictStatus s);
std::string_view confidence_name(Confidence c);
std::optional<VerdictStatus> verdict_status_from_name(std::string_view name);
std::optional<Confidence> confidence_from_name(std::string_view name);

struct EvidenceItem {
  std::string source;  // "resource:<id>" | "net:<seq>" | "frame:<t_rel>"
  std::string observation;
  std::string relevance;
};

struct TechniqueVerdict {
  std::string technique_id;
  VerdictStatus status = VerdictStatus::not_observed;
  Confidence confidence = Confidence::low;
  std::vector<EvidenceItem> evidence;
  bool degraded = false;  // produced by retry exhaustion, not by the backend
};

nlohmann::json verdict_to_json(const TechniqueVerdict& v);

enum class RejectReason {
  uncited,            // status != not_observed with empty evidence
  dangling_citation,  // citation does not resolve in the bundle
  bad_status,
  bad_confidence,
  bad_technique_id,
  bad_source_syntax,
  empty_observation,
  malformed,  // not a JSON object / missing required fields
};

std::string_view reject_reason_name(RejectReason r);

struct Rejection {
  RejectReason reason;
  std::string detail;
};

struct ValidationResult {
  bool accepted = false;
  std::vector<Rejection> rejections;
  // The parsed verdict when schema-valid (even if citations dangle).
  std::optional<TechniqueVerdict> verdict;
};

// Full protocol check over a raw verdict document: schema validity plus,
// for any status other than not_observed, resolution of every citation
// (`resource:` id present, `net:` seq present, `frame:` t_rel within
// [0, session_end]).
ValidationResult validate_verdict(const nlohmann::json& raw, const EvidenceBundle& bundle);
ValidationResult validate_verdict(const TechniqueVerdict& v, const EvidenceBundle& bundle);

// Extracts the first JSON object from free-form backend output (models may
// wrap the verdict in prose or code fences). nullopt when none parses.
std::optional<nlohmann::json> extract_json_object(std::string_view raw);

}  // namespace triage

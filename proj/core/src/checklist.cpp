#include "triage/checklist.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

#include "triage/errors.hpp"

namespace triage {

using json = nlohmann::json;

std::string_view label_name(Label l) {
  return l == Label::phishing ? "phishing" : "benign";
}

std::optional<Label> label_from_name(std::string_view name) {
  if (name == "phishing") return Label::phishing;
  if (name == "benign") return Label::benign;
  return std::nullopt;
}

bool valid_technique_id(std::string_view id) {
  // T\d{4}(\.\d{3})?
  if (id.size() != 5 && id.size() != 9) return false;
  if (id[0] != 'T') return false;
  for (int i = 1; i <= 4; ++i)
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  if (id.size() == 9) {
    if (id[5] != '.') return false;
    for (int i = 6; i <= 8; ++i)
      if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  }
  return true;
}

namespace {

struct BuiltinDef {
  const char* id;
  const char* name;
  const char* guidance;
  const char* rule;
};

// Guidance strings are the per-technique investigation briefs handed to the
// adjudication backend together with the auditor framing.
constexpr BuiltinDef kBuiltins[] = {
    {"T1189", "Drive-by Compromise",
     "Inspect network responses for executable or archive payloads delivered "
     "without an explicit user download action. Check mime types and response "
     "headers of fetched resources.",
     "executable_response"},
    {"T1566.002", "Phishing Link",
     "Compare the lure sender domain against the landing domain. Look for "
     "brand-impersonating or deceptive hostnames reached from the lure's "
     "call-to-action.",
     "lure_target_mismatch"},
    {"T1133", "External Remote Services",
     "Look for logins or session establishment against remote access "
     "services (VPN portals, RDP/SSH gateways) unrelated to the lure's "
     "claimed service.",
     ""},
    {"T1204.001", "User Execution: Malicious Link",
     "Determine whether the operator was induced to click through to a "
     "navigation that loaded attacker-controlled content.",
     "click_navigate_chain"},
    {"T1056.002", "Input Capture: GUI Input Capture",
     "Check the action trace for credential or payment data typed into "
     "rendered form fields, and correlate with form markup in the captured "
     "resources.",
     "persona_input_capture"},
    {"T1041", "Exfiltration Over C2 Channel",
     "Search request bodies for persona identifiers or secrets leaving the "
     "browser, especially toward hosts other than the landing origin.",
     "secret_exfiltration"},
    {"T1027", "Obfuscated Files or Information",
     "Assess captured scripts for packing, encoding layers or high-entropy "
     "payloads that hide behavior from static review.",
     "script_obfuscation"},
    {"T1059.007", "Command and Scripting Interpreter: JavaScript",
     "Identify scripts that perform dynamic code execution or rebuild their "
     "payload at runtime.",
     ""},
    {"T1071.001", "Application Layer Protocol: Web Protocols",
     "Review HTTP(S) exchanges for command-and-control style polling or "
     "beaconing beyond ordinary page loads.",
     ""},
    {"T1102", "Web Service",
     "Check whether attacker content is staged on legitimate third-party "
     "web services or storage buckets.",
     ""},
    {"T1078", "Valid Accounts",
     "Look for use of legitimate credentials against real services in a way "
     "that indicates account takeover rather than collection.",
     ""},
    {"T1098", "Account Manipulation",
     "Look for flows that change account settings, recovery addresses or "
     "credentials after authentication.",
     ""},
    {"T1110.003", "Brute Force: Password Spraying",
     "Check for repeated authentication attempts across accounts with a "
     "small set of passwords.",
     ""},
    {"T1539", "Steal Web Session Cookie",
     "Look for session cookies read by scripts or transmitted outside the "
     "landing origin.",
     ""},
};

}  // namespace

TechniqueCatalog TechniqueCatalog::builtin() {
  TechniqueCatalog c;
  for (const auto& d : kBuiltins)
    c.defs_.push_back(TechniqueDef{d.id, d.name, d.guidance, d.rule});
  return c;
}

TechniqueCatalog TechniqueCatalog::load(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("techniques.v1: ") + e.what());
  }
  if (!root.is_object() || root.value("version", "") != "techniques.v1" ||
      !root.contains("techniques") || !root["techniques"].is_array())
    throw SchemaError("techniques.v1: expected {version, techniques[]}");

  TechniqueCatalog c;
  for (const auto& t : root["techniques"]) {
    if (!t.is_object() || !t.contains("technique_id") || !t["technique_id"].is_string())
      throw SchemaError("techniques.v1: entry missing technique_id");
    TechniqueDef def;
    def.technique_id = t["technique_id"].get<std::string>();
    if (!valid_technique_id(def.technique_id))
      throw SchemaError("techniques.v1: bad technique id '" + def.technique_id + "'");
    if (c.find(def.technique_id))
      throw DuplicateTechniqueError("techniques.v1: duplicate id " + def.technique_id);
    def.name = t.value("name", "");
    def.guidance = t.value("guidance", "");
    def.oracle_rule = t.value("oracle_rule", "");
    c.defs_.push_back(std::move(def));
  }
  return c;
}

const TechniqueDef* TechniqueCatalog::find(std::string_view technique_id) const {
  for (const auto& d : defs_)
    if (d.technique_id == technique_id) return &d;
  return nullptr;
}

std::string TechniqueCatalog::to_document() const {
  json arr = json::array();
  for (const auto& d : defs_) {
    arr.push_back(json{{"technique_id", d.technique_id},
                       {"name", d.name},
                       {"guidance", d.guidance},
                       {"oracle_rule", d.oracle_rule}});
  }
  return json{{"version", "techniques.v1"}, {"techniques", arr}}.dump(2) + "\n";
}

namespace {

const std::vector<std::string>& minimal_ids() {
  static const std::vector<std::string> ids = {
      "T1189", "T1566.002", "T1133", "T1204.001", "T1056.002", "T1041", "T1027"};
  return ids;
}

const std::vector<std::string>& standard_extra_ids() {
  static const std::vector<std::string> ids = {"T1059.007", "T1071.001", "T1102", "T1078",
                                               "T1098"};
  return ids;
}

const std::vector<std::string>& comprehensive_extra_ids() {
  static const std::vector<std::string> ids = {"T1110.003", "T1539"};
  return ids;
}

}  // namespace

ChecklistProfile resolve_profile(std::string_view name) {
  ChecklistProfile p;
  p.name = std::string(name);
  if (name == "minimal") {
    p.technique_ids = minimal_ids();
    return p;
  }
  if (name == "standard" || name == "comprehensive") {
    p.technique_ids = minimal_ids();
    auto& extra = standard_extra_ids();
    p.technique_ids.insert(p.technique_ids.end(), extra.begin(), extra.end());
    if (name == "comprehensive") {
      auto& extra2 = comprehensive_extra_ids();
      p.technique_ids.insert(p.technique_ids.end(), extra2.begin(), extra2.end());
    }
    return p;
  }
  throw UnknownProfileError("unknown checklist profile '" + std::string(name) + "'");
}

ProfileSet ProfileSet::builtin() {
  ProfileSet set;
  for (const char* name : {"minimal", "standard", "comprehensive"})
    set.profiles_.push_back(resolve_profile(name));
  return set;
}

ProfileSet ProfileSet::load(std::string_view document, const TechniqueCatalog* catalog) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("profiles.v1: ") + e.what());
  }
  if (!root.is_object() || root.value("version", "") != "profiles.v1" ||
      !root.contains("profiles") || !root["profiles"].is_object())
    throw SchemaError("profiles.v1: expected {version, profiles{}}");

  ProfileSet set;
  for (auto it = root["profiles"].begin(); it != root["profiles"].end(); ++it) {
    if (!it.value().is_array())
      throw SchemaError("profiles.v1: profile '" + it.key() + "' must be an id list");
    ChecklistProfile p;
    p.name = it.key();
    std::set<std::string> seen;
    for (const auto& idj : it.value()) {
      if (!idj.is_string())
        throw SchemaError("profiles.v1: ids must be strings in '" + it.key() + "'");
      std::string id = idj.get<std::string>();
      if (!valid_technique_id(id))
        throw SchemaError("profiles.v1: bad technique id '" + id + "'");
      if (!seen.insert(id).second)
        throw SchemaError("profiles.v1: duplicate id " + id + " in '" + it.key() + "'");
      if (catalog && !catalog->find(id))
        throw SchemaError("profiles.v1: id " + id + " missing from the catalog");
      p.technique_ids.push_back(std::move(id));
    }
    set.profiles_.push_back(std::move(p));
  }

  // The three shipped names, when present, must nest.
  auto find = [&](std::string_view name) -> const ChecklistProfile* {
    for (const auto& p : set.profiles_)
      if (p.name == name) return &p;
    return nullptr;
  };
  auto subset = [](const ChecklistProfile& a, const ChecklistProfile& b) {
    std::set<std::string> bs(b.technique_ids.begin(), b.technique_ids.end());
    for (const auto& id : a.technique_ids)
      if (!bs.count(id)) return false;
    return true;
  };
  const ChecklistProfile* minimal = find("minimal");
  const ChecklistProfile* standard = find("standard");
  const ChecklistProfile* comprehensive = find("comprehensive");
  if (minimal && standard && !subset(*minimal, *standard))
    throw SchemaError("profiles.v1: minimal is not a subset of standard");
  if (standard && comprehensive && !subset(*standard, *comprehensive))
    throw SchemaError("profiles.v1: standard is not a subset of comprehensive");
  return set;
}

ChecklistProfile ProfileSet::resolve(std::string_view name) const {
  for (const auto& p : profiles_)
    if (p.name == name) return p;
  throw UnknownProfileError("unknown checklist profile '" + std::string(name) + "'");
}

std::string ProfileSet::to_document() const {
  json profiles = json::object();
  for (const auto& p : profiles_) profiles[p.name] = p.technique_ids;
  return json{{"version", "profiles.v1"}, {"profiles", profiles}}.dump(2) + "\n";
}

std::string_view verdict_status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::confirmed: return "confirmed";
    case VerdictStatus::suspicious: return "suspicious";
    case VerdictStatus::not_observed: return "not_observed";
  }
  return "not_observed";
}

std::string_view confidence_name(Confidence c) {
  switch (c) {
    case Confidence::high: return "high";
    case Confidence::medium: return "medium";
    case Confidence::low: return "low";
  }
  return "low";
}

std::optional<VerdictStatus> verdict_status_from_name(std::string_view name) {
  if (name == "confirmed") return VerdictStatus::confirmed;
  if (name == "suspicious") return VerdictStatus::suspicious;
  if (name == "not_observed") return VerdictStatus::not_observed;
  return std::nullopt;
}

std::optional<Confidence> confidence_from_name(std::string_view name) {
  if (name == "high") return Confidence::high;
  if (name == "medium") return Confidence::medium;
  if (name == "low") return Confidence::low;
  return std::nullopt;
}

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::uncited: return "UNCITED";
    case RejectReason::dangling_citation: return "DANGLING_CITATION";
    case RejectReason::bad_status: return "BAD_STATUS";
    case RejectReason::bad_confidence: return "BAD_CONFIDENCE";
    case RejectReason::bad_technique_id: return "BAD_TECHNIQUE_ID";
    case RejectReason::bad_source_syntax: return "BAD_SOURCE_SYNTAX";
    case RejectReason::empty_observation: return "EMPTY_OBSERVATION";
    case RejectReason::malformed: return "MALFORMED";
  }
  return "MALFORMED";
}

json verdict_to_json(const TechniqueVerdict& v) {
  json evidence = json::array();
  for (const auto& e : v.evidence) {
    evidence.push_back(json{{"source", e.source},
                            {"observation", e.observation},
                            {"relevance", e.relevance}});
  }
  json j{{"technique_id", v.technique_id},
         {"status", std::string(verdict_status_name(v.status))},
         {"confidence", std::string(confidence_name(v.confidence))},
         {"evidence", evidence}};
  if (v.degraded) j["degraded"] = true;
  return j;
}

namespace {

enum class CitationScheme { resource, net, frame };

struct Citation {
  CitationScheme scheme;
  std::string body;
};

std::optional<Citation> parse_citation(std::string_view source) {
  auto colon = source.find(':');
  if (colon == std::string_view::npos || colon + 1 >= source.size()) return std::nullopt;
  std::string_view scheme = source.substr(0, colon);
  std::string body(source.substr(colon + 1));
  if (scheme == "resource") return Citation{CitationScheme::resource, std::move(body)};
  if (scheme == "net") {
    for (char c : body)
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return Citation{CitationScheme::net, std::move(body)};
  }
  if (scheme == "frame") {
    if (!parse_reltime(body)) return std::nullopt;
    return Citation{CitationScheme::frame, std::move(body)};
  }
  return std::nullopt;
}

bool citation_resolves(const Citation& c, const EvidenceBundle& bundle) {
  switch (c.scheme) {
    case CitationScheme::resource:
      return bundle.resources.contains(c.body);
    case CitationScheme::net: {
      std::uint64_t seq = 0;
      for (char ch : c.body) seq = seq * 10 + static_cast<std::uint64_t>(ch - '0');
      for (const auto& r : bundle.network)
        if (r.seq == seq) return true;
      return false;
    }
    case CitationScheme::frame: {
      auto t = parse_reltime(c.body);
      return t && *t <= bundle.session_end;
    }
  }
  return false;
}

}  // namespace

ValidationResult validate_verdict(const json& raw, const EvidenceBundle& bundle) {
  ValidationResult result;
  auto reject = [&](RejectReason r, std::string detail) {
    result.rejections.push_back(Rejection{r, std::move(detail)});
  };

  if (!raw.is_object()) {
    reject(RejectReason::malformed, "verdict is not a JSON object");
    return result;
  }

  TechniqueVerdict v;
  if (raw.contains("technique_id") && raw["technique_id"].is_string()) {
    v.technique_id = raw["technique_id"].get<std::string>();
    if (!valid_technique_id(v.technique_id))
      reject(RejectReason::bad_technique_id, "technique_id '" + v.technique_id + "'");
  }

  if (!raw.contains("status") || !raw["status"].is_string()) {
    reject(RejectReason::bad_status, "status missing");
  } else if (auto s = verdict_status_from_name(raw["status"].get<std::string>())) {
    v.status = *s;
  } else {
    reject(RejectReason::bad_status, "status '" + raw["status"].get<std::string>() + "'");
  }

  if (!raw.contains("confidence") || !raw["confidence"].is_string()) {
    reject(RejectReason::bad_confidence, "confidence missing");
  } else if (auto c = confidence_from_name(raw["confidence"].get<std::string>())) {
    v.confidence = *c;
  } else {
    reject(RejectReason::bad_confidence,
           "confidence '" + raw["confidence"].get<std::string>() + "'");
  }

  if (raw.contains("evidence") && !raw["evidence"].is_array()) {
    reject(RejectReason::malformed, "evidence is not an array");
  } else if (raw.contains("evidence")) {
    for (const auto& e : raw["evidence"]) {
      if (!e.is_object() || !e.contains("source") || !e["source"].is_string()) {
        reject(RejectReason::bad_source_syntax, "evidence item without source string");
        continue;
      }
      EvidenceItem item;
      item.source = e["source"].get<std::string>();
      item.observation = e.value("observation", "");
      item.relevance = e.value("relevance", "");
      if (!parse_citation(item.source)) {
        reject(RejectReason::bad_source_syntax, "source '" + item.source + "'");
      }
      if (item.observation.empty())
        reject(RejectReason::empty_observation, "source '" + item.source + "'");
      v.evidence.push_back(std::move(item));
    }
  }

  if (!result.rejections.empty()) return result;

  // Schema is valid; enforce the citation protocol.
  if (v.status != VerdictStatus::not_observed) {
    if (v.evidence.empty()) {
      reject(RejectReason::uncited,
             std::string(verdict_status_name(v.status)) + " verdict with no evidence");
    } else {
      for (const auto& item : v.evidence) {
        auto c = parse_citation(item.source);
        if (!c || !citation_resolves(*c, bundle))
          reject(RejectReason::dangling_citation, "source '" + item.source + "'");
      }
    }
  }

  result.verdict = std::move(v);
  result.accepted = result.rejections.empty();
  return result;
}

ValidationResult validate_verdict(const TechniqueVerdict& v, const EvidenceBundle& bundle) {
  return validate_verdict(verdict_to_json(v), bundle);
}

std::optional<json> extract_json_object(std::string_view raw) {
  std::size_t start = raw.find('{');
  while (start != std::string_view::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          auto candidate = raw.substr(start, i - start + 1);
          json parsed = json::parse(candidate, nullptr, false);
          if (!parsed.is_discarded()) return parsed;
          break;
        }
      }
    }
    start = raw.find('{', start + 1);
  }
  return std::nullopt;
}

}  // namespace triage

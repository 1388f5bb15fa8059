#include "triage/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>

#include "triage/errors.hpp"
#include "triage/timeline.hpp"

namespace triage {

const std::string_view kReportWriterSystemPrompt =
    "You are an expert Incident Response Report Writer. Your goal is to turn "
    "structured findings into a polished, actionable report.\n"
    "\n"
    "Critical Style Guidelines:\n"
    "- NO REPETITION: Do not repeat facts across sections.\n"
    "- Action-Oriented: Focus on \"what happened\" and \"what to do next.\"\n"
    "- Evidence-Based: Cite tool invocation IDs explicitly.\n"
    "\n"
    "Report Template Structure:\n"
    "1. Executive Summary: Verdict (Phishing/Safe), Confidence, Rationale.\n"
    "2. Scope & Context: Assets and accounts involved.\n"
    "3. Timeline (UTC): Ordered list of key events with timestamps.\n"
    "4. IOCs: Domains, IPs, hashes supported by data.\n"
    "5. Risk Assessment: Impact and blast radius.\n"
    "6. Actionable Recommendations: Prioritized \"To-Do\" checklist.\n"
    "7. Appendices: Evidence Cross-Reference, MITRE ATT&CK Mapping.\n";

const std::string_view kReportSectionTitles[7] = {
    "Executive Summary", "Scope & Context",           "Timeline (UTC)", "IOCs",
    "Risk Assessment",   "Actionable Recommendations", "Appendices"};

std::string_view ioc_type_name(IOC::Type t) {
  switch (t) {
    case IOC::Type::domain: return "domain";
    case IOC::Type::ip: return "ip";
    case IOC::Type::url: return "url";
    case IOC::Type::hash: return "hash";
  }
  return "domain";
}

namespace {

std::string redact_secrets(std::string value, const Persona& persona) {
  for (const auto& secret : persona.secrets()) {
    std::size_t pos;
    while ((pos = value.find(secret)) != std::string::npos)
      value.replace(pos, secret.size(), "[redacted]");
  }
  return value;
}

const NetworkRecord* record_by_seq(const EvidenceBundle& b, std::uint64_t seq) {
  for (const auto& r : b.network)
    if (r.seq == seq) return &r;
  return nullptr;
}

int confidence_rank(Confidence c) {
  switch (c) {
    case Confidence::high: return 3;
    case Confidence::medium: return 2;
    case Confidence::low: return 1;
  }
  return 0;
}

}  // namespace

std::vector<IOC> extract_iocs(const AdjudicationRun& run, const EvidenceBundle& bundle) {
  std::vector<IOC> iocs;
  auto upsert = [&](IOC::Type type, std::string value, const std::string& citation) {
    if (value.empty()) return;
    value = redact_secrets(std::move(value), bundle.context.persona);
    for (auto& ioc : iocs) {
      if (ioc.type == type && ioc.value == value) {
        if (std::find(ioc.citations.begin(), ioc.citations.end(), citation) ==
            ioc.citations.end())
          ioc.citations.push_back(citation);
        return;
      }
    }
    iocs.push_back(IOC{type, std::move(value), {citation}});
  };

  for (const auto& v : run.verdicts) {
    for (const auto& e : v.evidence) {
      if (e.source.rfind("net:", 0) == 0) {
        std::uint64_t seq = std::strtoull(e.source.c_str() + 4, nullptr, 10);
        if (const NetworkRecord* r = record_by_seq(bundle, seq)) {
          upsert(looks_like_ipv4(r->host) ? IOC::Type::ip : IOC::Type::domain, r->host,
                 e.source);
          upsert(IOC::Type::url, r->url, e.source);
        }
      } else if (e.source.rfind("resource:", 0) == 0) {
        std::string id = e.source.substr(9);
        if (const Resource* res = bundle.resources.find(id))
          upsert(IOC::Type::hash, to_hex(res->sha256), e.source);
      }
    }
  }
  return iocs;
}

RecommendationRules RecommendationRules::builtin() {
  RecommendationRules r;
  r.rules_ = {
      {"T1041", "Block every domain listed in the IOC section at the egress proxy and "
                "sinkhole in DNS."},
      {"T1056.002", "Reset the credentials and cancel the payment card used by the "
                    "analysis persona; treat any real submissions to this page as "
                    "compromised."},
      {"T1566.002", "Add the lure sender's domain to the mail-gateway blocklist and pull "
                    "matching messages from user mailboxes."},
      {"T1204.001", "Notify targeted recipients that the link chain is confirmed "
                    "malicious and should not be followed."},
      {"T1189", "Quarantine any files fetched during the session and sweep endpoints for "
                "execution of the delivered payload."},
      {"T1027", "Submit the script hashes from the IOC section to the sandbox/AV "
                "pipeline for detonation and signature coverage."},
  };
  return r;
}

RecommendationRules RecommendationRules::load(std::string_view document) {
  nlohmann::json root = nlohmann::json::parse(document, nullptr, false);
  if (root.is_discarded() || !root.is_object() ||
      root.value("version", "") != "recommendations.v1" || !root.contains("rules") ||
      !root["rules"].is_array())
    throw SchemaError("recommendations.v1: expected {version, rules[]}");
  RecommendationRules r;
  for (const auto& rule : root["rules"]) {
    if (!rule.is_object() || !rule.contains("technique_id") || !rule.contains("action"))
      throw SchemaError("recommendations.v1: rule needs technique_id and action");
    std::string id = rule["technique_id"].get<std::string>();
    if (!valid_technique_id(id))
      throw SchemaError("recommendations.v1: bad technique id '" + id + "'");
    r.rules_.push_back(Rule{std::move(id), rule["action"].get<std::string>()});
  }
  return r;
}

std::string RecommendationRules::to_document() const {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rule : rules_)
    rules.push_back(nlohmann::json{{"technique_id", rule.technique_id},
                                   {"action", rule.action}});
  return nlohmann::json{{"version", "recommendations.v1"}, {"rules", rules}}.dump(2) + "\n";
}

namespace {

std::string ioc_ref(std::size_t index) { return "IOC-" + std::to_string(index + 1); }

// Index of the IOC covering this value, if any.
std::optional<std::size_t> find_ioc(const std::vector<IOC>& iocs, IOC::Type type,
                                    const std::string& value) {
  for (std::size_t i = 0; i < iocs.size(); ++i)
    if (iocs[i].type == type && iocs[i].value == value) return i;
  return std::nullopt;
}

}  // namespace

IncidentReport synthesize(const AdjudicationRun& run, const EvidenceBundle& bundle,
                          const RecommendationRules& recommendations) {
  IncidentReport rep;
  rep.bundle_id = bundle.bundle_id;
  rep.epoch_t0 = bundle.epoch_t0;
  rep.iocs = extract_iocs(run, bundle);

  const bool phishing = run.final.label == Label::phishing;
  bool any_degraded = !run.errors.empty();
  for (const auto& v : run.verdicts) any_degraded = any_degraded || v.degraded;

  rep.executive_summary.verdict = phishing ? "Phishing" : "Safe";
  if (phishing) {
    int best = 0;
    for (const auto& v : run.verdicts) {
      if (std::find(run.final.drivers.begin(), run.final.drivers.end(), v.technique_id) !=
          run.final.drivers.end())
        best = std::max(best, confidence_rank(v.confidence));
    }
    rep.executive_summary.confidence = best >= 3 ? "high" : best == 2 ? "medium" : "low";
    std::string drivers;
    for (const auto& d : run.final.drivers) {
      if (!drivers.empty()) drivers += ", ";
      drivers += d;
    }
    rep.executive_summary.rationale =
        "The " + run.final.policy + " policy reached a phishing verdict from " +
        std::to_string(run.final.drivers.size()) +
        " affirmative technique finding(s): " + drivers + ".";
  } else {
    rep.executive_summary.confidence = any_degraded ? "low" : "high";
    rep.executive_summary.rationale =
        "None of the " + std::to_string(run.verdicts.size()) +
        " adjudicated techniques produced an affirmative finding" +
        (any_degraded ? "; one or more slots were degraded, lowering confidence." : ".");
  }

  // Scope & Context. IOC values are referenced by id, never restated.
  const std::string landing_host = host_of_url(bundle.context.target_url);
  auto landing_ioc = find_ioc(rep.iocs, IOC::Type::domain, landing_host);
  rep.scope_context.push_back("Evidence bundle: " + bundle.bundle_id);
  rep.scope_context.push_back(
      "Landing page: " +
      (landing_ioc ? ioc_ref(*landing_ioc) + " (see IOCs)" : bundle.context.target_url));
  rep.scope_context.push_back("Lure sender: " + bundle.context.lure_from);
  rep.scope_context.push_back("Lure subject: " + bundle.context.lure_subject);
  rep.scope_context.push_back("Persona account exposed: " + bundle.context.persona.username +
                              " (" + bundle.context.persona.email + ")");
  rep.scope_context.push_back("Adjudication: profile " + run.profile + ", backend " +
                              run.backend + ", policy " + run.policy);

  // Timeline from cited artifacts, ascending.
  std::set<std::pair<std::int64_t, std::string>> seen;
  for (const auto& v : run.verdicts) {
    for (const auto& e : v.evidence) {
      if (e.source.rfind("net:", 0) == 0) {
        std::uint64_t seq = std::strtoull(e.source.c_str() + 4, nullptr, 10);
        const NetworkRecord* r = record_by_seq(bundle, seq);
        if (!r) continue;
        RelTime t = to_relative(r->started_at, bundle.epoch_t0);
        auto host_ioc = find_ioc(rep.iocs, looks_like_ipv4(r->host) ? IOC::Type::ip
                                                                    : IOC::Type::domain,
                                 r->host);
        std::string event =
            "HTTP " + r->method + " exchange (status " + std::to_string(r->status) +
            ") with " + (host_ioc ? ioc_ref(*host_ioc) : "the landing host");
        if (seen.insert({t.micros, e.source}).second)
          rep.timeline.push_back(TimelineEntry{t, std::move(event), e.source});
      } else if (e.source.rfind("frame:", 0) == 0) {
        auto t = parse_reltime(std::string_view(e.source).substr(6));
        if (!t) continue;
        // Describe via the audit annotation recorded at the cited instant.
        std::string event = "Operator interaction captured on screen";
        for (const auto& a : bundle.actions) {
          if (a.t_rel == *t && !a.annotation.empty()) {
            event = "Operator action: " + a.annotation;
            break;
          }
        }
        if (seen.insert({t->micros, e.source}).second)
          rep.timeline.push_back(TimelineEntry{*t, std::move(event), e.source});
      }
    }
  }
  std::sort(rep.timeline.begin(), rep.timeline.end(),
            [](const TimelineEntry& a, const TimelineEntry& b) {
              return a.t == b.t ? a.citation < b.citation : a.t < b.t;
            });

  // Risk assessment per driver class.
  if (phishing) {
    std::string risk;
    auto fired = [&](std::string_view id) {
      for (const auto& v : run.verdicts)
        if (v.technique_id == id && v.status != VerdictStatus::not_observed) return true;
      return false;
    };
    if (fired("T1056.002"))
      risk += "Credential or payment input was captured by the page. ";
    if (fired("T1041"))
      risk +=
          "Captured data left the browser toward collection infrastructure; assume "
          "anything submitted is compromised. ";
    if (fired("T1189"))
      risk += "An executable payload was delivered, so endpoint compromise is in scope. ";
    if (fired("T1027"))
      risk += "Obfuscated scripting indicates deliberate evasion of static review. ";
    if (fired("T1566.002") || fired("T1204.001"))
      risk +=
          "The lure-to-landing chain is reproducible, so additional recipients are at "
          "risk until the campaign is blocked.";
    if (risk.empty())
      risk = "Affirmative findings were recorded; review the appendices for details.";
    while (!risk.empty() && risk.back() == ' ') risk.pop_back();
    rep.risk_assessment = risk;
  } else {
    rep.risk_assessment =
        "No data capture, exfiltration or payload delivery was observed in the recorded "
        "session; adverse impact is not expected.";
  }

  // Recommendations from the shipped rule table, per fired technique.
  if (phishing) {
    for (const auto& rule : recommendations.rules()) {
      for (const auto& v : run.verdicts) {
        if (v.technique_id == rule.technique_id &&
            v.status != VerdictStatus::not_observed) {
          rep.recommendations.push_back(rule.action);
          break;
        }
      }
    }
    // Per-IOC containment actions, referencing IOC ids only.
    for (std::size_t i = 0; i < rep.iocs.size(); ++i) {
      if (rep.iocs[i].type == IOC::Type::domain || rep.iocs[i].type == IOC::Type::ip)
        rep.recommendations.push_back("Block the endpoint referenced by " + ioc_ref(i) +
                                      ".");
    }
  } else {
    rep.recommendations.push_back(
        "No action required; the session produced no adverse findings.");
  }

  // Appendices.
  TechniqueCatalog catalog = TechniqueCatalog::builtin();
  for (const auto& v : run.verdicts) {
    VerdictXref x;
    x.technique_id = v.technique_id;
    if (const TechniqueDef* def = catalog.find(v.technique_id)) x.name = def->name;
    x.status = std::string(verdict_status_name(v.status));
    x.confidence = std::string(confidence_name(v.confidence));
    x.degraded = v.degraded;
    x.evidence = v.evidence;
    rep.evidence_cross_reference.push_back(std::move(x));
    std::string line = v.technique_id;
    if (const TechniqueDef* def = catalog.find(v.technique_id))
      line += " " + def->name;
    line += " - " + std::string(verdict_status_name(v.status));
    rep.attack_mapping.push_back(std::move(line));
  }
  return rep;
}

std::string render(const IncidentReport& rep) {
  std::string out;
  out += "# Incident Report: " + rep.bundle_id + "\n\n";

  out += "## Executive Summary\n\n";
  out += "- Verdict: " + rep.executive_summary.verdict + "\n";
  out += "- Confidence: " + rep.executive_summary.confidence + "\n";
  out += "- Rationale: " + rep.executive_summary.rationale + "\n\n";

  out += "## Scope & Context\n\n";
  for (const auto& line : rep.scope_context) out += "- " + line + "\n";
  out += "\n";

  out += "## Timeline (UTC)\n\n";
  out += "Session epoch T0: " + format_rfc3339_utc(rep.epoch_t0) + "\n";
  if (rep.timeline.empty()) {
    out += "No cited events.\n";
  } else {
    for (const auto& e : rep.timeline)
      out += "- T+" + e.t.str() + "s - " + e.event + " [" + e.citation + "]\n";
  }
  out += "\n";

  out += "## IOCs\n\n";
  if (rep.iocs.empty()) {
    out += "None.\n";
  } else {
    for (std::size_t i = 0; i < rep.iocs.size(); ++i) {
      const IOC& ioc = rep.iocs[i];
      out += "- IOC-" + std::to_string(i + 1) + " (" +
             std::string(ioc_type_name(ioc.type)) + "): " + ioc.value + " [";
      for (std::size_t c = 0; c < ioc.citations.size(); ++c) {
        if (c) out += ", ";
        out += ioc.citations[c];
      }
      out += "]\n";
    }
  }
  out += "\n";

  out += "## Risk Assessment\n\n";
  out += rep.risk_assessment + "\n\n";

  out += "## Actionable Recommendations\n\n";
  for (std::size_t i = 0; i < rep.recommendations.size(); ++i)
    out += std::to_string(i + 1) + ". " + rep.recommendations[i] + "\n";
  out += "\n";

  out += "## Appendices\n\n";
  out += "### Evidence Cross-Reference\n\n";
  for (const auto& x : rep.evidence_cross_reference) {
    out += "- " + x.technique_id + (x.name.empty() ? "" : " (" + x.name + ")") + ": " +
           x.status + "/" + x.confidence + (x.degraded ? " [degraded]" : "") + "\n";
    for (const auto& e : x.evidence) {
      out += "  - [" + e.source + "] " + e.observation;
      if (!e.relevance.empty()) out += " Relevance: " + e.relevance;
      out += "\n";
    }
  }
  out += "\n### MITRE ATT&CK Mapping\n\n";
  for (const auto& line : rep.attack_mapping) out += "- " + line + "\n";

  if (!rep.degradation_note.empty()) out += "\nNote: " + rep.degradation_note + "\n";
  return out;
}

std::vector<std::string> check_report_structure(const std::string& document) {
  std::vector<std::string> problems;
  std::size_t last_pos = 0;
  for (const auto& title : kReportSectionTitles) {
    std::string header = "## " + std::string(title) + "\n";
    std::size_t first = document.find(header);
    if (first == std::string::npos) {
      problems.push_back("missing section header: " + std::string(title));
      continue;
    }
    if (document.find(header, first + 1) != std::string::npos)
      problems.push_back("duplicated section header: " + std::string(title));
    if (first < last_pos)
      problems.push_back("section out of order: " + std::string(title));
    last_pos = first;
  }
  return problems;
}

namespace {

// Everything a rendered fact token may legitimately come from.
std::vector<std::string> grounding_corpus(const AdjudicationRun& run,
                                          const EvidenceBundle& bundle) {
  std::vector<std::string> corpus;
  corpus.push_back(bundle.bundle_id);
  corpus.push_back(bundle.context.lure_from);
  corpus.push_back(bundle.context.lure_subject);
  corpus.push_back(bundle.context.lure_body_text);
  corpus.push_back(bundle.context.target_url);
  corpus.push_back(bundle.context.persona.username);
  corpus.push_back(bundle.context.persona.email);
  corpus.push_back(bundle.context.persona.full_name);
  for (const auto& r : bundle.network) {
    corpus.push_back(r.url);
    corpus.push_back(r.host);
    corpus.push_back(r.mime_type);
  }
  for (const auto& a : bundle.actions) {
    corpus.push_back(a.annotation);
    if (a.kind == ActionKind::note) corpus.push_back(std::get<NotePayload>(a.payload).text);
    if (a.kind == ActionKind::type) corpus.push_back(std::get<TypePayload>(a.payload).target);
    if (a.kind == ActionKind::navigate)
      corpus.push_back(std::get<NavigatePayload>(a.payload).url);
  }
  for (const auto& [id, res] : bundle.resources.entries()) {
    corpus.push_back(id);
    corpus.push_back(to_hex(res.sha256));
  }
  for (const auto& v : run.verdicts) {
    for (const auto& e : v.evidence) {
      corpus.push_back(e.source);
      corpus.push_back(e.observation);
      corpus.push_back(e.relevance);
    }
  }
  return corpus;
}

bool in_corpus(const std::vector<std::string>& corpus, const std::string& token) {
  for (const auto& c : corpus)
    if (c.find(token) != std::string::npos) return true;
  return false;
}

}  // namespace

std::vector<std::string> check_report_grounding(const std::string& document,
                                                const AdjudicationRun& run,
                                                const EvidenceBundle& bundle) {
  std::vector<std::string> problems;
  const std::vector<std::string> corpus = grounding_corpus(run, bundle);

  // Allowed relative times: any recorded artifact instant.
  std::set<std::int64_t> times{bundle.session_end.micros};
  for (const auto& r : bundle.network)
    times.insert(to_relative(r.started_at, bundle.epoch_t0).micros);
  for (const auto& f : bundle.frames) times.insert(f.t_rel.micros);
  for (const auto& a : bundle.actions) times.insert(a.t_rel.micros);

  std::set<std::string> technique_ids;
  for (const auto& v : run.verdicts) technique_ids.insert(v.technique_id);

  const std::string text = to_lower(document);

  // Domain-like tokens: labels joined by dots, last label alphabetic (>=2).
  for (std::size_t i = 0; i < text.size();) {
    auto is_label_char = [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    };
    if (!is_label_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && (is_label_char(text[i]) || text[i] == '.')) ++i;
    std::string token = text.substr(start, i - start);
    while (!token.empty() && (token.back() == '.' || token.back() == '-'))
      token.pop_back();
    if (token.find('.') == std::string::npos) continue;
    auto last_dot = token.rfind('.');
    std::string tld = token.substr(last_dot + 1);
    if (tld.size() < 2 ||
        !std::all_of(tld.begin(), tld.end(), [](char c) { return c >= 'a' && c <= 'z'; }))
      continue;
    if (!in_corpus(corpus, token))
      problems.push_back("ungrounded domain-like token: " + token);
  }

  // T+<seconds>s tokens must match a recorded instant.
  for (std::size_t pos = text.find("t+"); pos != std::string::npos;
       pos = text.find("t+", pos + 1)) {
    std::size_t end = pos + 2;
    while (end < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.'))
      ++end;
    if (end == pos + 2 || end >= text.size() || text[end] != 's') continue;
    auto t = parse_reltime(text.substr(pos + 2, end - pos - 2));
    if (!t || !times.count(t->micros))
      problems.push_back("ungrounded timestamp token: " + text.substr(pos, end - pos + 1));
  }

  // Technique ids must belong to the run.
  for (std::size_t i = 0; i + 5 <= document.size(); ++i) {
    if (document[i] != 'T' || !std::isdigit(static_cast<unsigned char>(document[i + 1])))
      continue;
    std::size_t len = 1;
    while (i + len < document.size() &&
           (std::isdigit(static_cast<unsigned char>(document[i + len])) ||
            document[i + len] == '.'))
      ++len;
    std::string token = document.substr(i, len);
    while (!token.empty() && token.back() == '.') token.pop_back();
    if (valid_technique_id(token) && !technique_ids.count(token))
      problems.push_back("technique id outside the run: " + token);
    i += len;
  }

  // 64-hex tokens must be resource digests.
  std::set<std::string> hashes;
  for (const auto& [id, res] : bundle.resources.entries()) hashes.insert(to_hex(res.sha256));
  for (std::size_t i = 0; i < text.size();) {
    auto is_hex = [](char c) {
      return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    };
    if (!is_hex(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && is_hex(text[i])) ++i;
    if (i - start == 64 && !hashes.count(text.substr(start, 64)))
      problems.push_back("ungrounded hash token: " + text.substr(start, 64));
  }
  return problems;
}

std::vector<std::string> check_secret_hygiene(const std::string& document,
                                              const Persona& persona) {
  std::vector<std::string> problems;
  for (const auto& secret : persona.secrets()) {
    if (!secret.empty() && document.find(secret) != std::string::npos)
      problems.push_back("persona secret material appears in the document");
  }
  return problems;
}

std::vector<std::string> check_no_repetition(const std::string& document,
                                             const std::vector<IOC>& iocs) {
  std::vector<std::string> problems;
  std::size_t appendix_pos = document.find("## Appendices");
  std::string body =
      appendix_pos == std::string::npos ? document : document.substr(0, appendix_pos);
  for (const auto& ioc : iocs) {
    std::size_t count = 0;
    for (std::size_t pos = body.find(ioc.value); pos != std::string::npos;
         pos = body.find(ioc.value, pos + 1)) {
      // URL values subsume their host; count standalone occurrences only.
      bool inside_longer = false;
      for (const auto& other : iocs) {
        if (other.value.size() <= ioc.value.size() || other.value == ioc.value) continue;
        std::size_t other_len = other.value.size();
        std::size_t lo = pos >= other_len ? pos - other_len : 0;
        for (std::size_t p = lo; p <= pos; ++p) {
          if (p + other_len <= body.size() &&
              body.compare(p, other_len, other.value) == 0 && pos >= p &&
              pos + ioc.value.size() <= p + other_len) {
            inside_longer = true;
            break;
          }
        }
        if (inside_longer) break;
      }
      if (!inside_longer) ++count;
    }
    if (count > 1)
      problems.push_back("IOC value repeated outside appendices: " + ioc.value);
  }
  return problems;
}

std::string synthesize_remote(const AdjudicationRun& run, const EvidenceBundle& bundle,
                              const RemoteEndpointConfig& config) {
  IncidentReport template_report = synthesize(run, bundle);

  auto fallback = [&](const std::string& why) {
    IncidentReport rep = template_report;
    rep.degradation_note = "remote writer bypassed (" + why + "); deterministic template "
                           "rendering used.";
    return render(rep);
  };

  nlohmann::json facts = run_to_json(run);
  facts["iocs"] = nlohmann::json::array();
  for (const auto& ioc : template_report.iocs)
    facts["iocs"].push_back(nlohmann::json{{"type", std::string(ioc_type_name(ioc.type))},
                                           {"value", ioc.value},
                                           {"citations", ioc.citations}});
  std::string user =
      "Write the incident report for the following adjudication facts. Use '## ' "
      "markdown headers named exactly after the seven template sections.\n\n" +
      facts.dump(2);

  CompletionResult completion;
  try {
    completion = remote_complete(config, std::string(kReportWriterSystemPrompt), user);
  } catch (const BackendError& e) {
    return fallback(std::string("unreachable: ") + e.what());
  }

  if (!check_report_structure(completion.content).empty())
    return fallback("reply failed the section-structure check");
  if (!check_report_grounding(completion.content, run, bundle).empty())
    return fallback("reply failed the grounding check");
  if (!check_secret_hygiene(completion.content, bundle.context.persona).empty())
    return fallback("reply failed the secret-hygiene check");
  return completion.content;
}

}  // namespace triage

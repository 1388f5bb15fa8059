#include "triage/oracle.hpp"

#include <algorithm>
#include <array>

#include "triage/errors.hpp"

namespace triage {

namespace {

// Embedded public-suffix snapshot: enough of the registry for deterministic
// offline comparisons. Multi-label suffixes first so longest match wins.
constexpr std::string_view kSuffixes[] = {
    "co.uk", "org.uk", "ac.uk", "gov.uk", "com.au", "net.au", "org.au", "com.br",
    "net.br", "org.br", "com.cn", "net.cn", "org.cn", "co.jp", "ne.jp", "or.jp",
    "co.kr", "or.kr", "co.in", "net.in", "org.in", "com.mx", "com.tr", "com.ar",
    "com",   "org",    "net",   "edu",    "gov",    "mil",    "int",    "info",
    "biz",   "name",   "io",    "co",     "me",     "cc",     "tv",     "dev",
    "app",   "xyz",    "site",  "online", "top",    "shop",   "club",   "live",
    "us",    "uk",     "de",    "fr",     "nl",     "ru",     "cn",     "jp",
    "kr",    "in",     "br",    "au",     "ca",     "it",     "es",     "example",
};

bool suffix_matches(std::string_view host, std::string_view suffix) {
  if (host.size() <= suffix.size()) return false;
  if (host.compare(host.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
  return host[host.size() - suffix.size() - 1] == '.';
}

}  // namespace

std::string registrable_domain(std::string_view host_in) {
  std::string host = to_lower(host_in);
  if (host.empty() || looks_like_ipv4(host)) return host;
  if (host.find('.') == std::string::npos) return host;

  std::string_view best;
  for (std::string_view s : kSuffixes) {
    if (suffix_matches(host, s) && s.size() > best.size()) best = s;
  }
  std::string_view labels(host);
  if (best.empty()) {
    // Unknown suffix: fall back to the last two labels.
    auto last = labels.rfind('.');
    auto prev = labels.rfind('.', last - 1);
    if (prev == std::string_view::npos) return host;
    return std::string(labels.substr(prev + 1));
  }
  std::string_view rest = labels.substr(0, labels.size() - best.size() - 1);
  auto dot = rest.rfind('.');
  std::string_view label = dot == std::string_view::npos ? rest : rest.substr(dot + 1);
  return std::string(label) + "." + std::string(best);
}

namespace {

bool contains_secret(std::string_view text, const std::vector<std::string>& secrets) {
  for (const auto& s : secrets) {
    if (!s.empty() && text.find(s) != std::string_view::npos) return true;
  }
  return false;
}

// First html resource containing a form, if any; used to co-cite the markup
// that solicited the input.
std::optional<std::string> find_form_resource(const EvidenceBundle& b) {
  for (const auto& [id, res] : b.resources.entries()) {
    if (res.kind != ResourceKind::html) continue;
    std::string_view text(reinterpret_cast<const char*>(res.content.data()),
                          res.content.size());
    if (icontains(text, "<form")) return id;
  }
  return std::nullopt;
}

EvidenceItem cite_frame(RelTime t, std::string observation, std::string relevance) {
  return EvidenceItem{"frame:" + t.str(), std::move(observation), std::move(relevance)};
}

EvidenceItem cite_net(std::uint64_t seq, std::string observation, std::string relevance) {
  return EvidenceItem{"net:" + std::to_string(seq), std::move(observation),
                      std::move(relevance)};
}

EvidenceItem cite_resource(std::string_view id, std::string observation,
                           std::string relevance) {
  return EvidenceItem{"resource:" + std::string(id), std::move(observation),
                      std::move(relevance)};
}

}  // namespace

std::optional<TechniqueVerdict> detect_input_capture(const EvidenceBundle& b) {
  const auto secrets = b.context.persona.secrets();
  const std::string& username = b.context.persona.username;

  const ActionEvent* secret_typed = nullptr;
  const ActionEvent* identifier_typed = nullptr;
  for (const auto& a : b.actions) {
    if (a.kind != ActionKind::type) continue;
    const auto& p = std::get<TypePayload>(a.payload);
    if (contains_secret(p.text, secrets)) {
      secret_typed = &a;
      break;
    }
    if (!identifier_typed && !username.empty() &&
        p.text.find(username) != std::string::npos) {
      identifier_typed = &a;
    }
  }

  if (secret_typed) {
    const auto& p = std::get<TypePayload>(secret_typed->payload);
    TechniqueVerdict v;
    v.technique_id = "T1056.002";
    v.status = VerdictStatus::confirmed;
    v.confidence = Confidence::high;
    v.evidence.push_back(cite_frame(
        secret_typed->t_rel,
        "Operator typed persona secret material into field '" + p.target + "' at T+" +
            secret_typed->t_rel.str() + "s.",
        "GUI input capture of credential or payment data."));
    if (auto form = find_form_resource(b)) {
      v.evidence.push_back(cite_resource(
          *form, "Captured page markup contains the soliciting form element.",
          "Form markup corroborates the typed input."));
    }
    return v;
  }
  if (identifier_typed) {
    const auto& p = std::get<TypePayload>(identifier_typed->payload);
    TechniqueVerdict v;
    v.technique_id = "T1056.002";
    v.status = VerdictStatus::suspicious;
    v.confidence = Confidence::medium;
    v.evidence.push_back(cite_frame(
        identifier_typed->t_rel,
        "Operator typed the persona account identifier into field '" + p.target +
            "' with no secret material observed.",
        "Identifier collection without a secret suggests staged harvesting."));
    return v;
  }
  return std::nullopt;
}

std::optional<TechniqueVerdict> detect_exfiltration(const EvidenceBundle& b) {
  const auto secrets = b.context.persona.secrets();
  const std::string landing_host = host_of_url(b.context.target_url);

  for (const auto& r : b.network) {
    if (r.request_body.empty() || !contains_secret(r.request_body, secrets)) continue;
    TechniqueVerdict v;
    v.technique_id = "T1041";
    const bool cross_origin = !landing_host.empty() && r.host != landing_host;
    v.status = cross_origin ? VerdictStatus::confirmed : VerdictStatus::suspicious;
    v.confidence = cross_origin ? Confidence::high : Confidence::medium;
    v.evidence.push_back(cite_net(
        r.seq,
        std::string("Request body carries persona secret material in a ") + r.method +
            " to " + r.host + (cross_origin ? ", which is not the landing host."
                                            : ", the landing host itself."),
        cross_origin ? "Secrets leaving the browser toward a collector endpoint."
                     : "Same-origin capture of secret material."));
    return v;
  }
  return std::nullopt;
}

std::optional<TechniqueVerdict> detect_obfuscation(const EvidenceBundle& b) {
  for (const auto& [id, res] : b.resources.entries()) {
    if (res.kind != ResourceKind::script) continue;
    std::string_view text(reinterpret_cast<const char*>(res.content.data()),
                          res.content.size());
    double entropy = shannon_entropy(res.content);
    bool eval_decode = false;
    for (std::string_view pat :
         {"eval(atob(", "eval(unescape(", "eval(decodeURIComponent(",
          "eval(String.fromCharCode("}) {
      if (text.find(pat) != std::string_view::npos) {
        eval_decode = true;
        break;
      }
    }
    if (entropy > kScriptEntropyThreshold || eval_decode) {
      char ebuf[32];
      std::snprintf(ebuf, sizeof(ebuf), "%.2f", entropy);
      TechniqueVerdict v;
      v.technique_id = "T1027";
      v.status = VerdictStatus::suspicious;
      v.confidence = Confidence::medium;
      v.evidence.push_back(cite_resource(
          id,
          eval_decode
              ? "Script executes decoded string content (eval of a decoding call)."
              : std::string("Script byte entropy ") + ebuf +
                    " bits/char exceeds the packed-payload threshold.",
          "Obfuscated or packed script hides behavior from static review."));
      return v;
    }
  }
  return std::nullopt;
}

std::optional<TechniqueVerdict> detect_phishing_link(const EvidenceBundle& b) {
  const std::string target_host = host_of_url(b.context.target_url);
  if (target_host.empty()) return std::nullopt;
  auto at = b.context.lure_from.rfind('@');
  if (at == std::string::npos) return std::nullopt;
  std::string lure_domain = registrable_domain(
      std::string_view(b.context.lure_from).substr(at + 1));
  std::string target_domain = registrable_domain(target_host);
  if (lure_domain.empty() || lure_domain == target_domain) return std::nullopt;

  const bool form_interaction = detect_input_capture(b).has_value();

  TechniqueVerdict v;
  v.technique_id = "T1566.002";
  v.status = form_interaction ? VerdictStatus::confirmed : VerdictStatus::suspicious;
  v.confidence = Confidence::medium;
  std::string obs = "Lure sender domain " + lure_domain +
                    " does not match landing domain " + target_domain + ".";
  if (form_interaction) obs += " A credential form interaction occurred on the landing page.";
  // Cite the landing fetch when present, else the first record.
  const NetworkRecord* cited = nullptr;
  for (const auto& r : b.network) {
    if (r.host == target_host) {
      cited = &r;
      break;
    }
  }
  if (!cited && !b.network.empty()) cited = &b.network.front();
  if (!cited) return std::nullopt;  // no network evidence to cite
  v.evidence.push_back(cite_net(cited->seq, std::move(obs),
                                "Landing infrastructure is unrelated to the lure's claimed "
                                "sender."));
  return v;
}

std::optional<TechniqueVerdict> detect_link_execution(const EvidenceBundle& b) {
  for (std::size_t i = 0; i + 1 < b.actions.size(); ++i) {
    if (b.actions[i].kind == ActionKind::click &&
        b.actions[i + 1].kind == ActionKind::navigate) {
      const auto& nav = std::get<NavigatePayload>(b.actions[i + 1].payload);
      TechniqueVerdict v;
      v.technique_id = "T1204.001";
      v.status = VerdictStatus::confirmed;
      v.confidence = Confidence::medium;
      v.evidence.push_back(cite_frame(
          b.actions[i].t_rel,
          "Click at T+" + b.actions[i].t_rel.str() + "s was immediately followed by "
              "navigation to " + nav.url + ".",
          "Operator was induced to execute the link."));
      return v;
    }
  }
  return std::nullopt;
}

std::optional<TechniqueVerdict> detect_driveby(const EvidenceBundle& b) {
  static constexpr std::string_view kExecutableMimes[] = {
      "application/x-msdownload",
      "application/x-msdos-program",
      "application/x-executable",
      "application/vnd.microsoft.portable-executable",
      "application/x-elf",
      "application/java-archive",
  };
  for (const auto& r : b.network) {
    for (std::string_view mime : kExecutableMimes) {
      if (iequals(r.mime_type, mime)) {
        TechniqueVerdict v;
        v.technique_id = "T1189";
        v.status = VerdictStatus::confirmed;
        v.confidence = Confidence::medium;
        v.evidence.push_back(cite_net(
            r.seq,
            "Response from " + r.host + " delivered executable content (" + r.mime_type +
                ") without an explicit download flow.",
            "Executable payload delivery consistent with drive-by compromise."));
        return v;
      }
    }
  }
  return std::nullopt;
}

TechniqueVerdict dispatch(std::string_view technique_id, const EvidenceBundle& bundle) {
  std::optional<TechniqueVerdict> v;
  if (technique_id == "T1056.002") {
    v = detect_input_capture(bundle);
  } else if (technique_id == "T1041") {
    v = detect_exfiltration(bundle);
  } else if (technique_id == "T1027") {
    v = detect_obfuscation(bundle);
  } else if (technique_id == "T1566.002") {
    v = detect_phishing_link(bundle);
  } else if (technique_id == "T1204.001") {
    v = detect_link_execution(bundle);
  } else if (technique_id == "T1189") {
    v = detect_driveby(bundle);
  } else if (technique_id == "T1133" || technique_id == "T1078" || technique_id == "T1098" ||
             technique_id == "T1102" || technique_id == "T1110.003" ||
             technique_id == "T1539" || technique_id == "T1059.007" ||
             technique_id == "T1071.001") {
    // No behavioral signal is extractable from an offline bundle for these;
    // the oracle deliberately reports not_observed.
    v = std::nullopt;
  } else {
    throw UnknownTechniqueError("oracle: unknown technique '" + std::string(technique_id) +
                                "'");
  }
  if (v) return *v;
  TechniqueVerdict none;
  none.technique_id = std::string(technique_id);
  none.status = VerdictStatus::not_observed;
  none.confidence = Confidence::low;
  return none;
}

BackendReply OracleBackend::adjudicate(const TechniqueBrief& brief, const ToolCallFn&) {
  TechniqueVerdict v = dispatch(brief.technique_id, *bundle_);
  BackendReply reply;
  reply.raw_output = verdict_to_json(v).dump();
  return reply;
}

}  // namespace triage

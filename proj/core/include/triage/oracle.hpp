#pragma once

// Deterministic rule-based adjudication backend. Detectors are pure
// predicates over a sealed bundle; every verdict they emit self-validates
// against the citation protocol. Used as the reproducible stand-in for an
// LLM adjudicator, not as a recall claim.

#include <optional>
#include <string>
#include <string_view>

#include "triage/adjudicator.hpp"
#include "triage/bundle.hpp"
#include "triage/checklist.hpp"

namespace triage {

// Entropy above this (bits per byte) marks a script as packed/encoded.
// Typical source text sits around 4.2-4.9; base64/packed payloads 5.5-6.0.
inline constexpr double kScriptEntropyThreshold = 5.2;

// Registrable domain per an embedded public-suffix snapshot (longest suffix
// match plus one label). Hosts without a known suffix fall back to the last
// two labels; IPs and single labels are returned unchanged.
std::string registrable_domain(std::string_view host);

// T1056.002: persona secret typed into a field -> confirmed/high; persona
// username alone -> suspicious/medium.
std::optional<TechniqueVerdict> detect_input_capture(const EvidenceBundle& bundle);

// T1041: request body carrying a persona secret; cross-origin -> confirmed/
// high, landing host itself -> suspicious/medium.
std::optional<TechniqueVerdict> detect_exfiltration(const EvidenceBundle& bundle);

// T1027: script resource with entropy above threshold or an
// eval-of-decoded-string pattern -> suspicious/medium.
std::optional<TechniqueVerdict> detect_obfuscation(const EvidenceBundle& bundle);

// T1566.002: lure sender and landing page on different registrable domains
// -> suspicious/medium; confirmed/medium when a credential form interaction
// also occurred.
std::optional<TechniqueVerdict> detect_phishing_link(const EvidenceBundle& bundle);

// T1204.001: a click immediately followed by a navigation.
std::optional<TechniqueVerdict> detect_link_execution(const EvidenceBundle& bundle);

// T1189: response delivering an executable mime type.
std::optional<TechniqueVerdict> detect_driveby(const EvidenceBundle& bundle);

// Routes a technique to its detector; techniques without behavioral signal
// in an offline bundle return not_observed/low. Throws UnknownTechniqueError.
TechniqueVerdict dispatch(std::string_view technique_id, const EvidenceBundle& bundle);

// Backend adapter: answers each technique brief by running dispatch on the
// sealed bundle it was constructed over.
class OracleBackend final : public AdjudicatorBackend {
 public:
  explicit OracleBackend(const EvidenceBundle& bundle) : bundle_(&bundle) {}

  std::string name() const override { return "oracle"; }
  Capabilities capabilities() const override { return Capabilities{}; }
  BackendReply adjudicate(const TechniqueBrief& brief, const ToolCallFn& tool) override;

 private:
  const EvidenceBundle* bundle_;
};

}  // namespace triage

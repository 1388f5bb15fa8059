#pragma once

// Deterministic synthetic sessions: scripted page state machines plus a
// scripted operator, emitting sealed bundles with constructed ground truth.
// Covers the attack taxonomy the pipeline is evaluated against, including
// gated flows and their documented failure modes.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "triage/bundle.hpp"
#include "triage/checklist.hpp"

namespace triage {

enum class ScenarioKind {
  benign,
  brand_impersonation,
  logoless_harvester,
  noncrp_crypto,
  gated_arith,
  gated_slider_loop,
  progressive_chat,
  legit_service_abuse,
};

inline constexpr ScenarioKind kAllScenarioKinds[] = {
    ScenarioKind::benign,          ScenarioKind::brand_impersonation,
    ScenarioKind::logoless_harvester, ScenarioKind::noncrp_crypto,
    ScenarioKind::gated_arith,     ScenarioKind::gated_slider_loop,
    ScenarioKind::progressive_chat, ScenarioKind::legit_service_abuse,
};

std::string_view scenario_kind_name(ScenarioKind k);
std::optional<ScenarioKind> scenario_kind_from_name(std::string_view name);

enum class GateKind { arithmetic, slider, chat };

struct ArithmeticGate {
  int a = 0;
  int b = 0;   // single-digit operands
  char op = '+';  // '+' or '-'
};
struct SliderGate {
  bool pass = true;    // false encodes an infinite challenge loop
  int loop_count = 0;  // finite loops clear after loop_count+1 attempts
};
struct ChatGate {
  int turns_before_pii = 3;
};

struct GateSpec {
  GateKind kind = GateKind::arithmetic;
  std::variant<ArithmeticGate, SliderGate, ChatGate> params;
};

enum class FailureMode { none, symbol_hallucination, literal_transcription };

std::string_view failure_mode_name(FailureMode m);
std::optional<FailureMode> failure_mode_from_name(std::string_view name);

struct ScenarioScript {
  ScenarioKind kind = ScenarioKind::benign;
  std::uint64_t seed = 0;
  std::vector<GateSpec> gates;
  std::optional<std::string> exfil_host;
  Label expected_label = Label::benign;
  // Techniques detectable on the solved path; non-empty iff label is phishing.
  std::set<std::string> expected_techniques;

  static ScenarioScript for_kind(ScenarioKind kind, std::uint64_t seed);
};

struct GroundTruth {
  Label label = Label::benign;
  std::set<std::string> techniques;  // detectable in the produced bundle
  bool blocked = false;              // challenge loop never cleared
};

struct GateAttempt {
  std::string answer;
  bool solved = false;
};

// Operator behavior at a gate under a failure mode. Modes other than `none`
// are defined for arithmetic gates only (ScenarioError otherwise).
GateAttempt solve_gate(const GateSpec& gate, FailureMode mode);

// Deterministic in (script, persona, mode). Returns a sealed bundle plus the
// constructed ground truth for this run (blocked runs carry only the
// evidence that survived the gate).
std::pair<EvidenceBundle, GroundTruth> run_scenario(const ScenarioScript& script,
                                                    const Persona& persona,
                                                    FailureMode mode = FailureMode::none);

struct CorpusSpec {
  std::vector<std::pair<ScenarioKind, int>> counts;  // generation order
  std::uint64_t seed = 0;
};

// Per-bundle seeds derive from the master seed; the same spec reproduces the
// same bundles (and digests) on every run.
std::vector<std::pair<EvidenceBundle, GroundTruth>> build_corpus(const CorpusSpec& spec);

// corpus.v1 document: {"version","seed","counts":{kind:n}}.
CorpusSpec corpus_spec_from_json(std::string_view text);
std::string corpus_spec_to_json(const CorpusSpec& spec);

}  // namespace triage
